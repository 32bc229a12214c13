#include "cwrgeom/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cwrgeom/error.hpp"

namespace cwrgeom {

namespace {

constexpr double kDegenerateGap = 1e-10;

double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    return (a - b).squaredNorm();
}

}  // namespace

void canonicalize_sign(Eigen::Ref<Eigen::RowVectorXd> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symmetric eigendecomposition did not converge");
    }
    const auto n = symmetric.rows();
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    // Eigen returns ascending order.
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values[i] = solver.eigenvalues()[n - 1 - i];
        out.vectors.row(i) = solver.eigenvectors().col(n - 1 - i).transpose();
        canonicalize_sign(out.vectors.row(i));
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (out.values[i] - out.values[i + 1] < kDegenerateGap) out.near_degenerate = true;
    }
    return out;
}

Matrix PcaResult::project(const Matrix& data) const {
    return (data.rowwise() - mean.transpose()) * components.transpose();
}

PcaResult pca(const Matrix& data, bool center, std::size_t r) {
    const auto m = static_cast<std::size_t>(data.rows());
    const auto d = static_cast<std::size_t>(data.cols());
    if (m == 0 || d == 0) throw ArgumentError("pca needs a non-empty matrix");
    if (r == 0 || r > std::min(m, d)) {
        throw ArgumentError("pca component count " + std::to_string(r) + " outside [1, " +
                            std::to_string(std::min(m, d)) + "]");
    }
    PcaResult out;
    out.mean = center ? Vector(data.colwise().mean().transpose()) : Vector::Zero(data.cols());
    const Matrix centered = data.rowwise() - out.mean.transpose();
    const Eigen::MatrixXd scatter =
        (centered.transpose() * centered) / static_cast<double>(m);
    const auto eig = symmetric_eigen(scatter);
    const auto rr = static_cast<Eigen::Index>(r);
    out.components = eig.vectors.topRows(rr);
    out.eigenvalues = eig.values.head(rr).cwiseMax(0.0);
    const auto checked = std::min<Eigen::Index>(rr + 1, eig.values.size());
    for (Eigen::Index i = 0; i + 1 < checked; ++i) {
        if (eig.values[i] - eig.values[i + 1] < kDegenerateGap) out.near_degenerate = true;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::size_t nearest_centroid(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                             const Matrix& centroids) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double dist = squared_distance(row, centroids.row(c));
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

namespace {

Matrix kmeans_plus_plus(const Matrix& data, std::size_t k, std::mt19937_64& rng) {
    const auto m = static_cast<std::size_t>(data.rows());
    Matrix centroids(static_cast<Eigen::Index>(k), data.cols());
    std::vector<bool> chosen(m, false);
    std::uniform_int_distribution<std::size_t> first(0, m - 1);
    std::size_t idx = first(rng);
    chosen[idx] = true;
    centroids.row(0) = data.row(static_cast<Eigen::Index>(idx));

    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) {
        d2[i] = squared_distance(data.row(static_cast<Eigen::Index>(i)), centroids.row(0));
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            idx = m;
            for (std::size_t i = 0; i < m; ++i) {
                if (d2[i] <= 0.0) continue;
                acc += d2[i];
                idx = i;
                if (acc > target) break;
            }
        } else {
            // Every point coincides with a chosen center.
            idx = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) -
                                           chosen.begin());
        }
        chosen[idx] = true;
        const auto ci = static_cast<Eigen::Index>(c);
        centroids.row(ci) = data.row(static_cast<Eigen::Index>(idx));
        for (std::size_t i = 0; i < m; ++i) {
            d2[i] = std::min(d2[i], squared_distance(data.row(static_cast<Eigen::Index>(i)),
                                                     centroids.row(ci)));
        }
    }
    return centroids;
}

double assign_all(const Matrix& data, const Matrix& centroids, std::vector<std::size_t>& out) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto c = nearest_centroid(data.row(i), centroids);
        out[static_cast<std::size_t>(i)] = c;
        inertia += squared_distance(data.row(i), centroids.row(static_cast<Eigen::Index>(c)));
    }
    return inertia;
}

std::vector<std::size_t> cluster_sizes(const std::vector<std::size_t>& assignments,
                                       std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignments) ++sizes[a];
    return sizes;
}

Matrix cluster_means(const Matrix& data, const std::vector<std::size_t>& assignments,
                     std::size_t k, const Matrix& fallback) {
    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), data.cols());
    const auto sizes = cluster_sizes(assignments, k);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        sums.row(static_cast<Eigen::Index>(assignments[static_cast<std::size_t>(i)])) +=
            data.row(i);
    }
    for (std::size_t c = 0; c < k; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        if (sizes[c] == 0) {
            sums.row(ci) = fallback.row(ci);
        } else {
            sums.row(ci) /= static_cast<double>(sizes[c]);
        }
    }
    return sums;
}

/// Moves the point farthest from its centroid (among clusters with more than
/// one member) into each empty cluster. Returns true if anything moved.
bool reseed_empty(const Matrix& data, std::vector<std::size_t>& assignments, Matrix& centroids) {
    const auto k = static_cast<std::size_t>(centroids.rows());
    auto sizes = cluster_sizes(assignments, k);
    bool moved = false;
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) continue;
        std::size_t far = assignments.size();
        double far_dist = -1.0;
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            if (sizes[assignments[i]] < 2) continue;
            const double dist =
                squared_distance(data.row(static_cast<Eigen::Index>(i)),
                                 centroids.row(static_cast<Eigen::Index>(assignments[i])));
            if (dist > far_dist) {
                far_dist = dist;
                far = i;
            }
        }
        --sizes[assignments[far]];
        assignments[far] = c;
        sizes[c] = 1;
        centroids.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(far));
        moved = true;
    }
    return moved;
}

}  // namespace

KMeansResult kmeans(const Matrix& data, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
    const auto m = static_cast<std::size_t>(data.rows());
    if (k == 0 || k > m) {
        throw ArgumentError("k-means cluster count " + std::to_string(k) + " outside [1, " +
                            std::to_string(m) + "]");
    }
    if (!(options.tol >= 0.0)) throw ArgumentError("k-means tolerance must be non-negative");

    std::mt19937_64 rng(seed);
    KMeansResult out;
    out.centroids = kmeans_plus_plus(data, k, rng);
    out.assignments.assign(m, 0);
    out.inertia_history.push_back(assign_all(data, out.centroids, out.assignments));

    std::vector<std::size_t> next(m, 0);
    bool stale_means = false;
    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        reseed_empty(data, out.assignments, out.centroids);
        Matrix updated = cluster_means(data, out.assignments, k, out.centroids);
        const double movement = (updated - out.centroids).rowwise().norm().maxCoeff();
        out.centroids = std::move(updated);

        out.inertia_history.push_back(assign_all(data, out.centroids, next));
        out.iterations = iter + 1;
        const bool changed = next != out.assignments;
        out.assignments.swap(next);
        stale_means = changed;
        if (!changed || movement < options.tol) {
            out.converged = true;
            break;
        }
    }

    // Final centroids are the means of the returned assignment, and no
    // cluster is left empty.
    while (reseed_empty(data, out.assignments, out.centroids)) stale_means = true;
    if (stale_means) {
        out.centroids = cluster_means(data, out.assignments, k, out.centroids);
    }
    out.inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        out.inertia += squared_distance(data.row(static_cast<Eigen::Index>(i)),
                                        out.centroids.row(static_cast<Eigen::Index>(
                                            out.assignments[i])));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("spearman inputs differ in length");
    if (a.size() < 2) throw ArgumentError("spearman needs at least two observations");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw DataError("spearman input " + std::to_string(i) + " is not finite");
        }
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw NumericError("spearman correlation undefined: an input has zero rank variance");
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

std::vector<IndexPair> sample_pairs(std::size_t rows, std::size_t n, std::uint64_t seed) {
    if (rows < 2) throw ArgumentError("pair sampling needs at least two rows");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
    std::vector<IndexPair> pairs;
    pairs.reserve(n);
    while (pairs.size() < n) {
        const auto i = pick(rng);
        const auto j = pick(rng);
        if (i != j) pairs.push_back({i, j});
    }
    return pairs;
}

std::vector<std::size_t> sample_rows(std::size_t rows, std::size_t n, std::uint64_t seed) {
    if (rows == 0) throw ArgumentError("cannot sample from zero rows");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out;
    if (n > rows) {
        std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
        out.resize(n);
        for (auto& idx : out) idx = pick(rng);
        return out;
    }
    out.resize(rows);
    std::iota(out.begin(), out.end(), std::size_t{0});
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, rows - 1);
        std::swap(out[i], out[pick(rng)]);
    }
    out.resize(n);
    return out;
}

double log_partition(const Vector& u, const Matrix& data) {
    if (u.size() != data.cols()) throw ArgumentError("direction and data dimensions differ");
    if (!u.allFinite()) throw ArgumentError("direction contains NaN or Inf");
    if (data.rows() == 0) throw ArgumentError("partition function over zero rows");
    const Vector scores = data * u;
    const double peak = scores.maxCoeff();
    const double sum = (scores.array() - peak).exp().sum();
    return peak + std::log(sum);
}

}  // namespace cwrgeom
