#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cwrgeom/embedding_store.hpp"
#include "cwrgeom/isotropy_transform.hpp"

namespace cwrgeom {

enum class StsSetting { Baseline, Individual, ZeroShot };

std::string_view to_string(StsSetting s);
/// Accepts "baseline", "individual", "zero-shot" (or "zero_shot").
StsSetting parse_setting(std::string_view text);

struct StsResult {
    double spearman_pct = 0.0;
    std::size_t n_pairs = 0;
    StsSetting setting = StsSetting::Baseline;
    double i_pc_after = 0.0;  ///< isotropy of the token matrix that was scored
    std::vector<double> scores;
    std::vector<double> gold;
    Json provenance = Json::object();
};

/// Arithmetic mean of the rows in `range`.
Vector pool_sentence(const EmbeddingMatrix& m, RowRange range);

/// Cosine similarity of the pooled sentence vectors, one per pair, in order.
std::vector<double> score_pairs(const EmbeddingMatrix& m, const StsDataset& ds);

/// Scores `ds` on `m`, first passing the token rows through `transform` when
/// given. Baseline takes no transform; the other settings require one. The
/// input matrix is never modified.
StsResult evaluate_sts(const EmbeddingMatrix& m, const StsDataset& ds,
                       const IsotropyTransform* transform, StsSetting setting);

Json to_json(const StsResult& r);
/// gold<TAB>predicted per pair, in dataset order.
std::string pairs_tsv(const StsResult& r);

}  // namespace cwrgeom
