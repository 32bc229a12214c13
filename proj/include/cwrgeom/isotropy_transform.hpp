#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cwrgeom/embedding_store.hpp"
#include "cwrgeom/numerics.hpp"

namespace cwrgeom {

inline constexpr std::size_t kDefaultClusters = 7;
inline constexpr std::size_t kDefaultRemove = 12;
inline constexpr std::uint32_t kTransformVersion = 1;

struct TransformCluster {
    Vector centroid;    ///< d
    Matrix components;  ///< d_remove x d, orthonormal rows
};

/**
 * Cluster-wise isotropy enhancement: each embedding is assigned to its nearest
 * centroid, centered on it, and stripped of that cluster's dominant directions.
 * The centroid is not added back.
 */
struct IsotropyTransform {
    std::size_t dims = 0;
    std::size_t d_remove = 0;
    std::vector<TransformCluster> clusters;
    Json provenance = Json::object();

    std::size_t k() const { return clusters.size(); }
    const std::string source_language() const {
        return provenance.value("source_language", std::string{});
    }
};

struct FitOptions {
    std::size_t k = kDefaultClusters;
    std::size_t d_remove = kDefaultRemove;
    std::uint64_t seed = 0;
    KMeansOptions kmeans{};
};

/// Throws FitError when a cluster holds d_remove or fewer members.
IsotropyTransform fit_transform(const EmbeddingMatrix& m, const FitOptions& options);

struct AppliedTransform {
    EmbeddingMatrix matrix;
    std::vector<std::size_t> assignments;
};

/// Works unchanged for zero-shot use: a transform fitted on one language's
/// embeddings is applied to another's with the source centroids and directions.
AppliedTransform apply_transform_with_assignments(const IsotropyTransform& t,
                                                  const EmbeddingMatrix& m);
EmbeddingMatrix apply_transform(const IsotropyTransform& t, const EmbeddingMatrix& m);

/// Checks shapes, finiteness and orthonormality (1e-8); throws FormatError.
void validate_transform(const IsotropyTransform& t);

void save_transform(const IsotropyTransform& t, const std::filesystem::path& path);
IsotropyTransform load_transform(const std::filesystem::path& path);

}  // namespace cwrgeom
