#include "cwrgeom/geometry_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numeric>

#include "cwrgeom/error.hpp"

namespace cwrgeom {

namespace {

Vector row_norms(const Matrix& data, const std::vector<IndexPair>& pairs) {
    Vector norms = Vector::Constant(data.rows(), -1.0);
    for (const auto& p : pairs) {
        for (auto idx : {p.first, p.second}) {
            const auto r = static_cast<Eigen::Index>(idx);
            if (norms[r] >= 0.0) continue;
            norms[r] = data.row(r).norm();
            if (norms[r] == 0.0) {
                throw DataError("sampled row " + std::to_string(idx) + " has zero norm");
            }
        }
    }
    return norms;
}

void append_number(std::string& out, double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

}  // namespace

double isotropy_cos(const EmbeddingMatrix& m, std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs == 0) throw ArgumentError("pair count must be positive");
    const auto pairs = sample_pairs(m.rows(), n_pairs, seed);
    const Matrix& w = m.data();
    const Vector norms = row_norms(w, pairs);
    double total = 0.0;
    for (const auto& p : pairs) {
        const auto a = static_cast<Eigen::Index>(p.first);
        const auto b = static_cast<Eigen::Index>(p.second);
        total += w.row(a).dot(w.row(b)) / (norms[a] * norms[b]);
    }
    return total / static_cast<double>(pairs.size());
}

IsotropyPc isotropy_pc(const EmbeddingMatrix& m) {
    if (m.rows() < 2) throw ArgumentError("isotropy_pc needs at least two rows");
    const Matrix& w = m.data();
    if (w.isZero(0.0)) throw DataError("isotropy_pc is undefined for an all-zero matrix");

    const Eigen::MatrixXd gram = w.transpose() * w;
    const auto eig = symmetric_eigen(gram);
    // scores(i, j) = u_j . w_i for every eigenvector u_j.
    const Eigen::MatrixXd scores = w * eig.vectors.transpose();

    IsotropyPc out;
    out.near_degenerate = eig.near_degenerate;
    out.log_min = std::numeric_limits<double>::infinity();
    out.log_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        const auto col = scores.col(j).array();
        for (const double sign : {1.0, -1.0}) {
            const double peak = (sign * col).maxCoeff();
            const double log_f = peak + std::log((sign * col - peak).exp().sum());
            out.log_min = std::min(out.log_min, log_f);
            out.log_max = std::max(out.log_max, log_f);
        }
    }
    out.value = std::exp(out.log_min - out.log_max);
    return out;
}

IsotropyReport dimension_contributions(const EmbeddingMatrix& m, std::size_t n_pairs,
                                       std::uint64_t seed, std::size_t top_k) {
    if (n_pairs == 0) throw ArgumentError("pair count must be positive");
    const auto pairs = sample_pairs(m.rows(), n_pairs, seed);
    const Matrix& w = m.data();
    const Vector norms = row_norms(w, pairs);

    Eigen::RowVectorXd sums = Eigen::RowVectorXd::Zero(w.cols());
    for (const auto& p : pairs) {
        const auto a = static_cast<Eigen::Index>(p.first);
        const auto b = static_cast<Eigen::Index>(p.second);
        sums += w.row(a).cwiseProduct(w.row(b)) / (norms[a] * norms[b]);
    }
    const auto n = static_cast<double>(pairs.size());

    IsotropyReport report;
    report.n_pairs = pairs.size();
    report.seed = seed;
    report.mean_contributions.resize(m.dims());
    for (std::size_t i = 0; i < m.dims(); ++i) {
        report.mean_contributions[i] = sums[static_cast<Eigen::Index>(i)] / n;
    }
    report.i_cos = std::accumulate(report.mean_contributions.begin(),
                                   report.mean_contributions.end(), 0.0);

    std::vector<std::size_t> order(m.dims());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.mean_contributions[a] > report.mean_contributions[b];
    });
    order.resize(std::min(top_k, order.size()));
    for (auto dim : order) report.top_contributions.push_back({dim, report.mean_contributions[dim]});
    return report;
}

IsotropyReport isotropy_report(const EmbeddingMatrix& m, std::size_t n_pairs, std::uint64_t seed,
                               std::size_t top_k) {
    auto report = dimension_contributions(m, n_pairs, seed, top_k);
    report.i_pc = isotropy_pc(m);
    return report;
}

// ---------------------------------------------------------------------------

OutlierReport outliers_of(const Vector& mean_rep, double threshold_sigmas) {
    if (!(threshold_sigmas > 0.0) || !std::isfinite(threshold_sigmas)) {
        throw ArgumentError("threshold must be a positive number of standard deviations");
    }
    if (mean_rep.size() == 0) throw ArgumentError("empty mean representation");
    OutlierReport out;
    out.mean_rep = mean_rep;
    out.threshold_sigmas = threshold_sigmas;
    out.dist_mean = mean_rep.mean();
    out.dist_sigma = std::sqrt((mean_rep.array() - out.dist_mean).square().mean());
    if (out.dist_sigma == 0.0) {
        out.degenerate = true;
        return out;
    }
    const double limit = threshold_sigmas * out.dist_sigma;
    for (Eigen::Index i = 0; i < mean_rep.size(); ++i) {
        if (std::abs(mean_rep[i] - out.dist_mean) >= limit) {
            out.outliers.push_back(static_cast<std::size_t>(i));
        }
    }
    return out;
}

OutlierReport detect_outliers(const EmbeddingMatrix& m, std::size_t n_samples, std::uint64_t seed,
                              double threshold_sigmas) {
    if (n_samples == 0) throw ArgumentError("sample count must be positive");
    const auto rows = sample_rows(m.rows(), n_samples, seed);
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(m.dims()));
    for (auto r : rows) sum += m.data().row(static_cast<Eigen::Index>(r)).transpose();
    auto report = outliers_of(sum / static_cast<double>(rows.size()), threshold_sigmas);
    report.n_samples = n_samples;
    report.seed = seed;
    return report;
}

// ---------------------------------------------------------------------------

FreqBiasExport frequency_bias_export(const EmbeddingMatrix& m) {
    const auto words = word_occurrences(m);
    if (words.empty()) {
        throw PreconditionError("frequency export needs word_index metadata");
    }
    const bool any_freq = std::any_of(words.begin(), words.end(), [&](const WordOccurrence& w) {
        return m.meta()[w.rows.start].frequency_per_million.has_value();
    });
    if (!any_freq) throw PreconditionError("no word has a frequency attached");

    Matrix vectors(static_cast<Eigen::Index>(words.size()), m.data().cols());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& r = words[i].rows;
        vectors.row(static_cast<Eigen::Index>(i)) =
            m.data()
                .middleRows(static_cast<Eigen::Index>(r.start), static_cast<Eigen::Index>(r.size()))
                .colwise()
                .mean();
    }

    FreqBiasExport out;
    auto& basis = out.pca_basis;
    basis.mean = vectors.colwise().mean().transpose();
    const Matrix centered = vectors.rowwise() - basis.mean.transpose();
    const auto eig = symmetric_eigen((centered.transpose() * centered) /
                                     static_cast<double>(vectors.rows()));
    const Eigen::Index r = std::min<Eigen::Index>(2, vectors.cols());
    basis.components = eig.vectors.topRows(r);
    basis.eigenvalues = eig.values.head(r).cwiseMax(0.0);
    basis.near_degenerate = eig.near_degenerate;
    const Matrix coords = centered * basis.components.transpose();

    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& freq = m.meta()[words[i].rows.start].frequency_per_million;
        if (!freq) continue;
        const auto row = static_cast<Eigen::Index>(i);
        out.records.push_back({words[i].text, *freq, coords(row, 0), r > 1 ? coords(row, 1) : 0.0});
    }
    return out;
}

std::string to_tsv(const FreqBiasExport& e) {
    std::string out;
    for (const auto& rec : e.records) {
        out += rec.word;
        out += '\t';
        append_number(out, rec.frequency_per_million);
        out += '\t';
        append_number(out, rec.pc1);
        out += '\t';
        append_number(out, rec.pc2);
        out += '\n';
    }
    return out;
}

}  // namespace cwrgeom
