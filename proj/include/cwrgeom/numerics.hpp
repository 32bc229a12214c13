#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cwrgeom/embedding_store.hpp"

namespace cwrgeom {

/// Eigenvalues are reported in descending order; eigenvectors are rows.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
    bool near_degenerate = false;  ///< some adjacent eigenvalue gap < 1e-10
};

/// Full eigendecomposition of a symmetric matrix, sorted descending, each
/// eigenvector's first non-zero coordinate made positive.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& symmetric);

/// Flips `v` so its first coordinate with magnitude above 1e-12 is positive.
void canonicalize_sign(Eigen::Ref<Eigen::RowVectorXd> v);

struct PcaResult {
    Vector mean;         ///< zero vector when fitted without centering
    Matrix components;   ///< r x d, orthonormal rows, descending eigenvalue
    Vector eigenvalues;  ///< of the (1/M)-scaled scatter matrix, clamped at 0
    bool near_degenerate = false;

    /// Coordinates of each row of `data` (after subtracting `mean`) in the basis.
    Matrix project(const Matrix& data) const;
};

/// Top-r principal directions of `data`, computed from the d x d scatter matrix.
/// Throws ArgumentError unless 1 <= r <= min(M, d).
PcaResult pca(const Matrix& data, bool center, std::size_t r);

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-6;
};

struct KMeansResult {
    Matrix centroids;                      ///< k x d
    std::vector<std::size_t> assignments;  ///< one cluster id per row
    double inertia = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> inertia_history;   ///< after every assignment step
};

/// Index of the nearest centroid by squared Euclidean distance; ties go to
/// the lowest index.
std::size_t nearest_centroid(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                             const Matrix& centroids);

/// Lloyd's algorithm with k-means++ seeding.
KMeansResult kmeans(const Matrix& data, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Ranks starting at 1, tied values sharing the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

struct IndexPair {
    std::size_t first = 0;
    std::size_t second = 0;
    bool operator==(const IndexPair&) const = default;
};

/// N ordered index pairs drawn uniformly with replacement, first != second.
std::vector<IndexPair> sample_pairs(std::size_t rows, std::size_t n, std::uint64_t seed);

/// `n` row indices: a uniform subset when n <= rows, else draws with replacement.
std::vector<std::size_t> sample_rows(std::size_t rows, std::size_t n, std::uint64_t seed);

/// log(sum_i exp(u . w_i)) evaluated with a max shift.
double log_partition(const Vector& u, const Matrix& data);

}  // namespace cwrgeom
