#include "cwrgeom/sts_eval.hpp"

#include <charconv>

#include "cwrgeom/error.hpp"
#include "cwrgeom/geometry_metrics.hpp"
#include "cwrgeom/numerics.hpp"

namespace cwrgeom {

std::string_view to_string(StsSetting s) {
    switch (s) {
        case StsSetting::Baseline: return "baseline";
        case StsSetting::Individual: return "individual";
        case StsSetting::ZeroShot: return "zero-shot";
    }
    return "baseline";
}

StsSetting parse_setting(std::string_view text) {
    if (text == "baseline") return StsSetting::Baseline;
    if (text == "individual") return StsSetting::Individual;
    if (text == "zero-shot" || text == "zero_shot") return StsSetting::ZeroShot;
    throw ArgumentError("unknown STS setting '" + std::string(text) +
                        "' (expected baseline, individual or zero-shot)");
}

Vector pool_sentence(const EmbeddingMatrix& m, RowRange range) {
    if (range.empty()) throw ArgumentError("cannot pool an empty row range");
    if (range.end > m.rows()) throw ArgumentError("row range exceeds matrix rows");
    return m.data()
        .middleRows(static_cast<Eigen::Index>(range.start), static_cast<Eigen::Index>(range.size()))
        .colwise()
        .mean()
        .transpose();
}

std::vector<double> score_pairs(const EmbeddingMatrix& m, const StsDataset& ds) {
    validate_sts(ds, m.rows());
    std::vector<double> scores;
    scores.reserve(ds.size());
    for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
        const Vector a = pool_sentence(m, ds.pairs[i].first);
        const Vector b = pool_sentence(m, ds.pairs[i].second);
        const double na = a.norm();
        const double nb = b.norm();
        if (na == 0.0 || nb == 0.0) {
            throw DataError("pair " + std::to_string(i) + " has a zero-norm pooled sentence");
        }
        scores.push_back(a.dot(b) / (na * nb));
    }
    return scores;
}

StsResult evaluate_sts(const EmbeddingMatrix& m, const StsDataset& ds,
                       const IsotropyTransform* transform, StsSetting setting) {
    if (setting == StsSetting::Baseline && transform != nullptr) {
        throw ArgumentError("the baseline setting takes no transform");
    }
    if (setting != StsSetting::Baseline && transform == nullptr) {
        throw PreconditionError("setting '" + std::string(to_string(setting)) +
                                "' requires a fitted transform");
    }

    const EmbeddingMatrix evaluated = transform ? apply_transform(*transform, m) : m;

    StsResult r;
    r.setting = setting;
    r.n_pairs = ds.size();
    r.scores = score_pairs(evaluated, ds);
    r.gold.reserve(ds.size());
    for (const auto& p : ds.pairs) r.gold.push_back(p.gold);
    r.spearman_pct = 100.0 * spearman(r.scores, r.gold);
    r.i_pc_after = isotropy_pc(evaluated).value;

    r.provenance["setting"] = to_string(setting);
    r.provenance["n_pairs"] = r.n_pairs;
    r.provenance["pooling"] = "mean of token rows";
    r.provenance["transform_stage"] = "token level, before pooling";
    r.provenance["target_language"] = m.language();
    r.provenance["target_model"] = m.model_id();
    if (transform) {
        r.provenance["source_language"] = transform->source_language();
        r.provenance["cross_language"] = transform->source_language() != m.language();
        r.provenance["transform"] = transform->provenance;
    }
    return r;
}

Json to_json(const StsResult& r) {
    Json j;
    j["spearman_pct"] = r.spearman_pct;
    j["n_pairs"] = r.n_pairs;
    j["setting"] = to_string(r.setting);
    j["i_pc_after"] = r.i_pc_after;
    j["provenance"] = r.provenance;
    return j;
}

std::string pairs_tsv(const StsResult& r) {
    std::string out = "gold\tpredicted\n";
    char buf[64];
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
        auto [e1, ec1] = std::to_chars(buf, buf + sizeof buf, r.gold[i]);
        out.append(buf, e1);
        out += '\t';
        auto [e2, ec2] = std::to_chars(buf, buf + sizeof buf, r.scores[i]);
        out.append(buf, e2);
        out += '\n';
    }
    return out;
}

}  // namespace cwrgeom
