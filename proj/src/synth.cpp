#include "cwrgeom/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cwrgeom/error.hpp"
#include "cwrgeom/sts_eval.hpp"

namespace cwrgeom::synth {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * normal(rng);
    return m;
}

Eigen::RowVectorXd gaussian_row(std::size_t cols, double scale, std::mt19937_64& rng) {
    return gaussian(1, cols, scale, rng).row(0);
}

std::string word_form(std::size_t id) {
    static constexpr std::string_view kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa",
                                                      "ti", "vo", "ze", "pa", "qu", "do"};
    constexpr std::size_t n = std::size(kSyllables);
    std::string out;
    std::size_t x = id;
    do {
        out += kSyllables[x % n];
        x /= n;
    } while (x > 0);
    return out;
}

/// Splits `word` into 1..3 pieces, continuation pieces prefixed with "##".
std::vector<std::string> split_word(const std::string& word, std::size_t pieces) {
    pieces = std::clamp<std::size_t>(pieces, 1, std::max<std::size_t>(1, word.size() / 2));
    std::vector<std::string> out;
    const std::size_t step = word.size() / pieces;
    for (std::size_t i = 0; i < pieces; ++i) {
        const std::size_t begin = i * step;
        const std::size_t len = i + 1 == pieces ? word.size() - begin : step;
        out.push_back((i == 0 ? "" : "##") + word.substr(begin, len));
    }
    return out;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ArgumentError(message);
}

}  // namespace

Matrix round_to_f32(Matrix m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = static_cast<double>(static_cast<float>(m.data()[i]));
    }
    return m;
}

EmbeddingMatrix isotropic(std::size_t rows, std::size_t dims, std::uint64_t seed,
                          double noise_scale, std::string language) {
    require(rows > 0 && dims > 0, "synthetic matrix needs positive rows and dims");
    require(noise_scale > 0.0, "noise scale must be positive");
    std::mt19937_64 rng(seed);
    Matrix data = round_to_f32(gaussian(rows, dims, noise_scale, rng));
    return EmbeddingMatrix(std::move(data), EmbeddingMatrix::placeholder_meta(rows),
                           std::move(language), "synthetic-isotropic");
}

EmbeddingMatrix offset(const EmbeddingMatrix& m, double per_coordinate) {
    Matrix data = m.data().array() + per_coordinate;
    return m.with_data(round_to_f32(std::move(data)));
}

EmbeddingMatrix shift_by_norm(const EmbeddingMatrix& m, double norm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::RowVectorXd dir = gaussian_row(m.dims(), 1.0, rng);
    dir *= norm / dir.norm();
    Matrix data = m.data().rowwise() + dir;
    return m.with_data(round_to_f32(std::move(data)));
}

Matrix random_orthogonal(std::size_t dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd g = gaussian(dims, dims, 1.0, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    // Make the factorization unique: positive diagonal of R.
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    }
    return q;
}

// ---------------------------------------------------------------------------

Corpus anisotropic(const AnisotropicParams& p) {
    require(p.rows > 0 && p.dims > 0, "synthetic matrix needs positive rows and dims");
    require(p.clusters >= 1 && p.clusters <= p.rows, "cluster count must be in [1, rows]");
    require(p.dominant_per_cluster < p.dims, "too many dominant directions for dims");
    require(p.vocabulary >= 1, "vocabulary must be non-empty");
    require(p.noise_scale > 0.0, "noise scale must be positive");
    for (auto d : p.outlier_dims) require(d < p.dims, "outlier dimension out of range");

    const auto d = static_cast<Eigen::Index>(p.dims);
    std::mt19937_64 structure(p.structure_seed);

    // Shared offset with random signs per coordinate.
    Eigen::RowVectorXd common(d);
    std::bernoulli_distribution coin(0.5);
    for (Eigen::Index i = 0; i < d; ++i) common[i] = coin(structure) ? p.common_offset : -p.common_offset;
    const Eigen::RowVectorXd freq_dir =
        common.norm() > 0 ? Eigen::RowVectorXd(common / common.norm())
                          : Eigen::RowVectorXd(gaussian_row(p.dims, 1.0, structure).normalized());

    Corpus out{EmbeddingMatrix(Matrix::Zero(1, 1)), {}, {}, Matrix(static_cast<Eigen::Index>(p.clusters), d)};
    std::vector<Matrix> directions;
    for (std::size_t c = 0; c < p.clusters; ++c) {
        out.cluster_means.row(static_cast<Eigen::Index>(c)) =
            common + gaussian_row(p.dims, p.cluster_spread, structure);
        const Matrix q = random_orthogonal(p.dims, structure());
        directions.push_back(q.leftCols(static_cast<Eigen::Index>(p.dominant_per_cluster)).transpose());
    }

    // Zipfian vocabulary; each word lives in one cluster.
    std::vector<double> weights(p.vocabulary);
    std::vector<double> per_million(p.vocabulary);
    double harmonic = 0.0;
    for (std::size_t r = 0; r < p.vocabulary; ++r) harmonic += 1.0 / static_cast<double>(r + 1);
    for (std::size_t r = 0; r < p.vocabulary; ++r) {
        weights[r] = 1.0 / static_cast<double>(r + 1);
        per_million[r] = 1e6 * weights[r] / harmonic;
    }
    double mean_log = 0.0, sd_log = 0.0;
    for (auto f : per_million) mean_log += std::log10(f);
    mean_log /= static_cast<double>(p.vocabulary);
    for (auto f : per_million) sd_log += std::pow(std::log10(f) - mean_log, 2);
    sd_log = std::sqrt(sd_log / static_cast<double>(p.vocabulary));
    if (sd_log == 0.0) sd_log = 1.0;

    std::uniform_int_distribution<std::size_t> pick_cluster(0, p.clusters - 1);
    std::uniform_int_distribution<std::size_t> pick_pieces(1, 3);
    std::vector<std::size_t> word_cluster(p.vocabulary);
    std::vector<std::string> forms(p.vocabulary);
    std::vector<std::size_t> word_pieces(p.vocabulary);
    for (std::size_t r = 0; r < p.vocabulary; ++r) {
        word_cluster[r] = pick_cluster(structure);
        forms[r] = word_form(r);
        word_pieces[r] = pick_pieces(structure);
        out.frequencies[forms[r]] = per_million[r];
    }

    std::mt19937_64 rng(p.sample_seed);
    std::discrete_distribution<std::size_t> pick_word(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> sentence_len(8, 15);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix data(static_cast<Eigen::Index>(p.rows), d);
    std::vector<TokenMeta> meta;
    meta.reserve(p.rows);
    out.true_clusters.reserve(p.rows);
    std::int64_t sentence = 0, word_in_sentence = 0;
    std::size_t words_left = sentence_len(rng);
    while (meta.size() < p.rows) {
        if (words_left == 0) {
            ++sentence;
            word_in_sentence = 0;
            words_left = sentence_len(rng);
        }
        const std::size_t w = pick_word(rng);
        const double z_freq = (std::log10(per_million[w]) - mean_log) / sd_log;
        const auto c = word_cluster[w];
        for (const auto& piece : split_word(forms[w], word_pieces[w])) {
            if (meta.size() == p.rows) break;
            const auto row = static_cast<Eigen::Index>(meta.size());
            Eigen::RowVectorXd x = out.cluster_means.row(static_cast<Eigen::Index>(c));
            for (Eigen::Index j = 0; j < directions[c].rows(); ++j) {
                x += p.dominant_scale * normal(rng) * directions[c].row(j);
            }
            x += p.frequency_scale * z_freq * freq_dir;
            x += gaussian_row(p.dims, p.noise_scale, rng);
            for (auto od : p.outlier_dims) x[static_cast<Eigen::Index>(od)] += p.outlier_shift;
            data.row(row) = x;
            meta.push_back({piece, word_in_sentence, sentence, std::nullopt});
            out.true_clusters.push_back(c);
        }
        ++word_in_sentence;
        --words_left;
    }
    out.matrix = EmbeddingMatrix(round_to_f32(std::move(data)), std::move(meta), p.language,
                                 "synthetic-anisotropic");
    return out;
}

// ---------------------------------------------------------------------------

EmbeddingMatrix planted_outliers(const OutlierParams& p) {
    require(p.rows > 0 && p.dims >= 2, "outlier fixture needs rows > 0 and dims >= 2");
    require(p.outlier_dims.size() < p.dims, "too many outlier dimensions");
    for (auto d : p.outlier_dims) require(d < p.dims, "outlier dimension out of range");
    require(p.noise_scale >= 0.0, "noise scale must be non-negative");

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<bool> is_outlier(p.dims, false);
    for (auto d : p.outlier_dims) is_outlier[d] = true;

    Vector base(static_cast<Eigen::Index>(p.dims));
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.dims; ++i) {
        base[static_cast<Eigen::Index>(i)] = uniform(rng);
        if (is_outlier[i]) continue;
        sum += base[static_cast<Eigen::Index>(i)];
        sum_sq += base[static_cast<Eigen::Index>(i)] * base[static_cast<Eigen::Index>(i)];
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    const double sigma = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean));
    for (auto d : p.outlier_dims) {
        const double sign = coin(rng) ? 1.0 : -1.0;
        base[static_cast<Eigen::Index>(d)] = mean + sign * p.magnitude_sigmas * sigma;
    }

    Matrix data = gaussian(p.rows, p.dims, p.noise_scale, rng);
    data.rowwise() += base.transpose();
    return EmbeddingMatrix(round_to_f32(std::move(data)), EmbeddingMatrix::placeholder_meta(p.rows),
                           p.language, "synthetic-outliers");
}

// ---------------------------------------------------------------------------

StsBenchmark sts_benchmark(const StsParams& p) {
    require(p.pairs >= 2, "STS benchmark needs at least two pairs");
    require(p.signal_dims >= 1 && p.signal_dims + p.dominant_dirs <= p.dims,
            "signal and dominant subspaces must fit in dims");
    require(p.min_tokens >= 1 && p.min_tokens <= p.max_tokens, "invalid token count range");

    const Matrix basis = random_orthogonal(p.dims, p.structure_seed);
    const auto s = static_cast<Eigen::Index>(p.signal_dims);
    const auto nd = static_cast<Eigen::Index>(p.dominant_dirs);
    const Matrix signal = basis.leftCols(s).transpose();       // s x d
    const Matrix dominant = basis.middleCols(s, nd).transpose();  // nd x d

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> tokens(p.min_tokens, p.max_tokens);

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<TokenMeta> meta;
    StsDataset ds;
    std::int64_t sentence = 0;
    auto emit_sentence = [&](const Eigen::RowVectorXd& center) {
        RowRange range{rows.size(), rows.size()};
        const std::size_t n = tokens(rng);
        for (std::size_t t = 0; t < n; ++t) {
            rows.push_back(center + gaussian_row(p.dims, p.token_noise, rng));
            meta.push_back({"s" + std::to_string(sentence) + "t" + std::to_string(t),
                            static_cast<std::int64_t>(t), sentence, std::nullopt});
        }
        range.end = rows.size();
        ++sentence;
        return range;
    };

    for (std::size_t i = 0; i < p.pairs; ++i) {
        const double rho = unit(rng);
        const Eigen::RowVectorXd a = gaussian_row(p.signal_dims, 1.0, rng);
        const Eigen::RowVectorXd noise = gaussian_row(p.signal_dims, 1.0, rng);
        const Eigen::RowVectorXd b = rho * a + std::sqrt(1.0 - rho * rho) * noise;
        Eigen::RowVectorXd first = a * signal;
        Eigen::RowVectorXd second = b * signal;
        if (!p.monotone && nd > 0) {
            first += p.dominant_scale * gaussian_row(p.dominant_dirs, 1.0, rng) * dominant;
            second += p.dominant_scale * gaussian_row(p.dominant_dirs, 1.0, rng) * dominant;
        }
        StsPair pair;
        pair.first = emit_sentence(first);
        pair.second = emit_sentence(second);
        pair.gold = 5.0 * rho;
        ds.pairs.push_back(pair);
    }

    Matrix data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.dims));
    for (std::size_t i = 0; i < rows.size(); ++i) data.row(static_cast<Eigen::Index>(i)) = rows[i];
    EmbeddingMatrix m(round_to_f32(std::move(data)), std::move(meta), p.language,
                      "synthetic-sts");
    if (p.monotone) {
        const auto cosines = score_pairs(m, ds);
        for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
            ds.pairs[i].gold = std::clamp(2.5 * (1.0 + cosines[i]), 0.0, 5.0);
        }
    }
    return {std::move(m), std::move(ds)};
}

}  // namespace cwrgeom::synth
