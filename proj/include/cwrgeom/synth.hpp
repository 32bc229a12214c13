#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cwrgeom/embedding_store.hpp"

/// Seeded generators for self-contained benchmarks. Every generated payload is
/// rounded to f32 so that in-memory results match those obtained after a
/// save/load round trip.
namespace cwrgeom::synth {

/// Rounds every entry to the nearest f32 value.
Matrix round_to_f32(Matrix m);

/// M x d i.i.d. N(0, scale^2), single sentence, no word metadata.
EmbeddingMatrix isotropic(std::size_t rows, std::size_t dims, std::uint64_t seed,
                          double noise_scale = 1.0, std::string language = "synthetic");

/// Adds `per_coordinate` to every entry.
EmbeddingMatrix offset(const EmbeddingMatrix& m, double per_coordinate);

/// Adds a constant vector with the given Euclidean norm, direction drawn from `seed`.
EmbeddingMatrix shift_by_norm(const EmbeddingMatrix& m, double norm, std::uint64_t seed);

/// Random d x d orthogonal matrix (QR of a Gaussian matrix).
Matrix random_orthogonal(std::size_t dims, std::uint64_t seed);

/**
 * Clustered, anisotropic token space: a shared offset, well separated cluster
 * means, a few high-variance directions per cluster, a component along the
 * offset direction proportional to standardized log word frequency, constant
 * shifts on planted outlier dimensions, and isotropic noise.
 *
 * `structure_seed` fixes the geometry (offset, cluster means, directions,
 * vocabulary); `sample_seed` fixes the drawn tokens. Two draws sharing the
 * structure seed behave like two languages sharing one representation space.
 */
struct AnisotropicParams {
    std::size_t rows = 7000;
    std::size_t dims = 64;
    std::size_t clusters = 7;
    std::size_t dominant_per_cluster = 4;
    std::size_t vocabulary = 500;
    double noise_scale = 1.0;
    double common_offset = 3.0;    ///< per-coordinate magnitude of the shared offset
    double cluster_spread = 6.0;   ///< per-coordinate sd of cluster means around the offset
    double dominant_scale = 6.0;   ///< sd along each planted dominant direction
    double frequency_scale = 2.0;  ///< sd of the frequency-correlated component
    std::vector<std::size_t> outlier_dims;
    double outlier_shift = 10.0;
    std::uint64_t structure_seed = 1;
    std::uint64_t sample_seed = 2;
    std::string language = "synthetic";
};

struct Corpus {
    EmbeddingMatrix matrix;
    FrequencyTable frequencies;
    std::vector<std::size_t> true_clusters;  ///< generating cluster of each row
    Matrix cluster_means;                    ///< generating means, clusters x d
};

Corpus anisotropic(const AnisotropicParams& p);

/// A matrix whose mean representation has planted outlier dimensions.
struct OutlierParams {
    std::size_t rows = 5000;
    std::size_t dims = 128;
    std::vector<std::size_t> outlier_dims = {5};
    /// Planted deviation in units of the sd of the non-outlier mean entries.
    double magnitude_sigmas = 10.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 1;
    std::string language = "synthetic";
};

EmbeddingMatrix planted_outliers(const OutlierParams& p);

/**
 * Sentence pairs whose gold score is 5 * rho for a latent correlation rho of
 * the pair's signal vectors. Each sentence also carries a large random
 * component in a few dominant directions that is unrelated to the gold
 * score. With `monotone` set, the dominant component is omitted and gold is
 * 2.5 * (1 + cosine of the pooled sentence vectors), so cosine ranks gold exactly.
 */
struct StsParams {
    std::size_t pairs = 300;
    std::size_t dims = 128;
    std::size_t signal_dims = 48;
    std::size_t dominant_dirs = 4;
    double dominant_scale = 8.0;
    double token_noise = 0.3;
    std::size_t min_tokens = 4;
    std::size_t max_tokens = 12;
    bool monotone = false;
    std::uint64_t structure_seed = 1;  ///< signal and dominant subspaces
    std::uint64_t seed = 2;            ///< pairs, tokens and noise
    std::string language = "synthetic";
};

struct StsBenchmark {
    EmbeddingMatrix matrix;
    StsDataset dataset;
};

StsBenchmark sts_benchmark(const StsParams& p);

}  // namespace cwrgeom::synth
