#include "cwrgeom/report.hpp"

namespace cwrgeom {

Json to_json(const IsotropyPc& pc) {
    Json j;
    j["value"] = pc.value;
    j["log_min_partition"] = pc.log_min;
    j["log_max_partition"] = pc.log_max;
    j["near_degenerate_spectrum"] = pc.near_degenerate;
    return j;
}

Json to_json(const IsotropyReport& r) {
    Json j;
    j["i_cos"] = r.i_cos;
    if (r.i_pc) {
        j["i_pc"] = r.i_pc->value;
        j["i_pc_detail"] = to_json(*r.i_pc);
    }
    j["n_pairs"] = r.n_pairs;
    j["seed"] = r.seed;
    j["pair_sampling"] = "uniform with replacement, distinct indices";
    j["contribution_ranking"] = "per-dimension mean over all pairs, then ranked";
    Json top = Json::array();
    for (const auto& c : r.top_contributions) {
        Json e;
        e["dim"] = c.dim;
        e["mean_contribution"] = c.mean;
        top.push_back(std::move(e));
    }
    j["top_contributions"] = std::move(top);
    j["mean_contributions"] = r.mean_contributions;
    return j;
}

Json to_json(const OutlierReport& r) {
    Json j;
    j["n_samples"] = r.n_samples;
    j["seed"] = r.seed;
    j["threshold_sigmas"] = r.threshold_sigmas;
    j["dist_mean"] = r.dist_mean;
    j["dist_sigma"] = r.dist_sigma;
    j["sigma"] = "population";
    j["degenerate"] = r.degenerate;
    j["outliers"] = r.outliers;
    std::vector<double> mean_rep(r.mean_rep.data(), r.mean_rep.data() + r.mean_rep.size());
    j["mean_rep"] = std::move(mean_rep);
    return j;
}

Json describe(const EmbeddingMatrix& m) {
    Json j;
    j["rows"] = m.rows();
    j["dims"] = m.dims();
    j["language"] = m.language();
    j["model_id"] = m.model_id();
    return j;
}

Json describe(const IsotropyTransform& t) {
    Json j;
    j["k"] = t.k();
    j["d"] = t.dims;
    j["d_remove"] = t.d_remove;
    j["provenance"] = t.provenance;
    return j;
}

}  // namespace cwrgeom
