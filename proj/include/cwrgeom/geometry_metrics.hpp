#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cwrgeom/embedding_store.hpp"
#include "cwrgeom/numerics.hpp"

namespace cwrgeom {

inline constexpr std::size_t kDefaultPairs = 1000;
inline constexpr std::size_t kDefaultOutlierSamples = 10000;
inline constexpr double kDefaultThresholdSigmas = 3.0;
inline constexpr std::size_t kDefaultTopK = 3;

/// Mean cosine similarity over `n_pairs` seeded random pairs of distinct rows.
double isotropy_cos(const EmbeddingMatrix& m, std::size_t n_pairs, std::uint64_t seed);

struct IsotropyPc {
    double value = 0.0;  ///< min F(u) / max F(u), in (0, 1]
    double log_min = 0.0;
    double log_max = 0.0;
    bool near_degenerate = false;  ///< Gram spectrum has a gap below 1e-10
};

/// Partition-function isotropy over the eigenvectors of the uncentered Gram
/// matrix W^T W. Both +u and -u are evaluated for every eigenvector.
IsotropyPc isotropy_pc(const EmbeddingMatrix& m);

struct DimensionContribution {
    std::size_t dim = 0;
    double mean = 0.0;
};

struct IsotropyReport {
    double i_cos = 0.0;                ///< sum of mean_contributions
    std::optional<IsotropyPc> i_pc;    ///< filled by isotropy_report only
    std::size_t n_pairs = 0;
    std::uint64_t seed = 0;
    std::vector<double> mean_contributions;  ///< one per dimension
    std::vector<DimensionContribution> top_contributions;  ///< descending by mean
};

/// Per-dimension contribution x_i y_i / (|x| |y|) averaged over the sampled
/// pairs. Dimensions are ranked after averaging over all pairs.
IsotropyReport dimension_contributions(const EmbeddingMatrix& m, std::size_t n_pairs,
                                       std::uint64_t seed, std::size_t top_k = kDefaultTopK);

/// dimension_contributions plus isotropy_pc.
IsotropyReport isotropy_report(const EmbeddingMatrix& m, std::size_t n_pairs, std::uint64_t seed,
                               std::size_t top_k = kDefaultTopK);

struct OutlierReport {
    Vector mean_rep;
    double dist_mean = 0.0;
    double dist_sigma = 0.0;  ///< population standard deviation over the d entries
    std::vector<std::size_t> outliers;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    double threshold_sigmas = kDefaultThresholdSigmas;
    bool degenerate = false;  ///< dist_sigma == 0; no outliers reported
};

/// Flags dimensions i with |mean_rep[i] - dist_mean| >= threshold * sigma, computed
/// from a given mean representation.
OutlierReport outliers_of(const Vector& mean_rep, double threshold_sigmas);

/// Averages `n_samples` seeded random rows (with replacement only when
/// n_samples exceeds M) and applies outliers_of.
OutlierReport detect_outliers(const EmbeddingMatrix& m, std::size_t n_samples, std::uint64_t seed,
                              double threshold_sigmas = kDefaultThresholdSigmas);

struct FreqBiasRecord {
    std::string word;
    double frequency_per_million = 0.0;
    double pc1 = 0.0;
    double pc2 = 0.0;
};

struct FreqBiasExport {
    std::vector<FreqBiasRecord> records;
    PcaResult pca_basis;  ///< up to two centered components over all word vectors
};

/// One record per word occurrence with a known frequency. Word vectors are the
/// mean of their sub-token rows; PCA is fitted on every word occurrence.
FreqBiasExport frequency_bias_export(const EmbeddingMatrix& m);

/// Serializes a frequency export as word<TAB>freq<TAB>pc1<TAB>pc2 lines.
std::string to_tsv(const FreqBiasExport& e);

}  // namespace cwrgeom
