// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cwrgeom/geometry_metrics.hpp"
#include "cwrgeom/isotropy_transform.hpp"
#include "cwrgeom/numerics.hpp"
#include "cwrgeom/sts_eval.hpp"
#include "cwrgeom/synth.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cwrgeom;

namespace {

// Tolerances and limits, fixed here rather than taken from the command line.
constexpr double kIdentityTol = 1e-9;
constexpr double kIdentitySeconds = 10.0;
constexpr double kIsotropicCosBound = 0.02;
constexpr double kAnisotropicCosFloor = 0.9;
constexpr double kOffsetNoiseMultiple = 10.0;
constexpr double kEnhancedCosBound = 0.05;
constexpr double kAnnihilationTol = 1e-6;
constexpr double kEnhancementSeconds = 60.0;
constexpr double kMinPlantedSigmas = 5.0;
constexpr double kPcaTol = 1e-8;
constexpr double kKMeansRelTol = 1e-9;
constexpr double kSpearmanTol = 1e-12;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

oracle::Dense to_dense(const Matrix& m) {
    oracle::Dense out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out[static_cast<std::size_t>(r)].assign(m.row(r).data(), m.row(r).data() + m.cols());
    }
    return out;
}

// Largest |<x - c, u>| over rows x and the components u of the cluster each row lands in.
double max_residual_projection(const IsotropyTransform& t, const EmbeddingMatrix& out,
                               const std::vector<std::size_t>& assignments) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < out.data().rows(); ++i) {
        const auto& comps = t.clusters[assignments[static_cast<std::size_t>(i)]].components;
        if (comps.rows() == 0) continue;
        worst = std::max(worst, (comps * out.data().row(i).transpose()).cwiseAbs().maxCoeff());
    }
    return worst;
}

Outcome decomposition_identity() {
    const auto start = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> rows(5, 400), dims(2, 96);
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const EmbeddingMatrix m(testing::random_matrix(rows(rng), dims(rng), 1000 + trial,
                                                       trial % 2 ? 1.0 : 5.0));
        const auto report = dimension_contributions(m, kDefaultPairs, trial);
        double sum = 0.0;
        for (double c : report.mean_contributions) sum += c;
        worst = std::max(worst, std::abs(sum - isotropy_cos(m, kDefaultPairs, trial)));
    }
    const double secs = seconds_since(start);
    return {worst <= kIdentityTol && secs < kIdentitySeconds,
            fmt("max |sum CC - I_Cos| = %.3g", worst) + fmt(", %.2f s", secs)};
}

Outcome isotropic_baseline() {
    const auto iso = synth::isotropic(10000, 32, 7);
    const auto aniso = synth::offset(iso, kOffsetNoiseMultiple * 1.0);
    const double c_iso = isotropy_cos(iso, kDefaultPairs, 1);
    const double c_aniso = isotropy_cos(aniso, kDefaultPairs, 1);
    return {std::abs(c_iso) < kIsotropicCosBound && c_aniso > kAnisotropicCosFloor,
            fmt("I_Cos isotropic = %.4f", c_iso) + fmt(", offset = %.4f", c_aniso)};
}

Outcome enhancement_effect() {
    const auto start = Clock::now();
    const auto corpus = synth::anisotropic({});
    const auto before_pc = isotropy_pc(corpus.matrix).value;
    const auto t = fit_transform(corpus.matrix, {.k = 7, .d_remove = 12, .seed = 1});
    const auto applied = apply_transform_with_assignments(t, corpus.matrix);
    const auto after_pc = isotropy_pc(applied.matrix).value;
    const double after_cos = isotropy_cos(applied.matrix, kDefaultPairs, 1);
    const double residual = max_residual_projection(t, applied.matrix, applied.assignments);
    const double secs = seconds_since(start);
    return {after_pc > before_pc && std::abs(after_cos) < kEnhancedCosBound &&
                residual <= kAnnihilationTol && secs < kEnhancementSeconds,
            fmt("I_PC %.3g", before_pc) + fmt(" -> %.3g", after_pc) +
                fmt(", I_Cos after = %.4f", after_cos) + fmt(", residual %.2g", residual) +
                fmt(", %.1f s", secs)};
}

Outcome outlier_recovery() {
    std::mt19937_64 rng(404);
    int exact = 0;
    double min_sigmas = 1e300;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        synth::OutlierParams p;
        p.seed = 500 + trial;
        p.magnitude_sigmas = 12.0;
        std::uniform_int_distribution<std::size_t> count(1, 3), dim(0, p.dims - 1);
        std::set<std::size_t> planted;
        const auto n = count(rng);
        while (planted.size() < n) planted.insert(dim(rng));
        p.outlier_dims.assign(planted.begin(), planted.end());
        const auto report = detect_outliers(synth::planted_outliers(p), kDefaultOutlierSamples, trial);
        for (auto d : planted) {
            min_sigmas = std::min(min_sigmas,
                                  std::abs(report.mean_rep[static_cast<Eigen::Index>(d)] - report.dist_mean) /
                                      report.dist_sigma);
        }
        if (report.outliers == p.outlier_dims) ++exact;
    }
    Vector hand = Vector::Zero(100);
    hand[42] = 10.0;
    const auto ref = outliers_of(hand, kDefaultThresholdSigmas);
    const bool hand_ok = ref.outliers == std::vector<std::size_t>{42} &&
                         std::abs(ref.dist_mean - 0.1) < 1e-12 &&
                         std::abs(ref.dist_sigma - std::sqrt(0.99)) < 1e-12;
    return {exact == 20 && min_sigmas >= kMinPlantedSigmas && hand_ok,
            std::to_string(exact) + "/20 exact" + fmt(", smallest planted deviation %.2f sigma", min_sigmas) +
                (hand_ok ? ", d=100 example ok" : ", d=100 example MISMATCH")};
}

Outcome oracle_equivalence() {
    double pca_err = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Matrix data = testing::random_matrix(40, 8, seed, 1.0 + static_cast<double>(seed % 4));
        for (bool center : {true, false}) {
            const auto p = pca(data, center, 8);
            const auto ref = oracle::jacobi_eigen(oracle::scatter(to_dense(data), center));
            for (std::size_t i = 0; i < 8; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                pca_err = std::max(pca_err, std::abs(p.eigenvalues[ii] - ref.values[i]));
                for (std::size_t j = 0; j < 8; ++j) {
                    pca_err = std::max(pca_err, std::abs(p.components(ii, static_cast<Eigen::Index>(j)) -
                                                         ref.vectors[i][j]));
                }
            }
        }
    }

    std::mt19937_64 rng(55);
    std::normal_distribution<double> jitter(0.0, 0.4);
    int km_ok = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 4);  // 5..8 points
        const std::size_t k = 2 + static_cast<std::size_t>(trial % 3);  // 2..4 clusters
        Matrix data(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            data(ii, 0) = 6.0 * static_cast<double>(i % k) + jitter(rng);
            data(ii, 1) = jitter(rng);
            data(ii, 2) = jitter(rng);
        }
        const auto ref = oracle::best_partition(to_dense(data), k);
        const auto km = kmeans(data, k, static_cast<std::uint64_t>(trial));
        if (std::abs(km.inertia - ref.inertia) <= kKMeansRelTol * std::max(1.0, ref.inertia)) ++km_ok;
    }

    double rho_err = 0.0;
    std::uniform_int_distribution<int> level(0, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(30), b(30);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = level(rng);  // few levels, so heavy ties
            b[i] = level(rng) + 0.5 * a[i];
        }
        rho_err = std::max(rho_err, std::abs(spearman(a, b) - oracle::spearman(a, b)));
    }
    return {pca_err <= kPcaTol && km_ok == 20 && rho_err <= kSpearmanTol,
            fmt("PCA max err %.2g", pca_err) + ", k-means " + std::to_string(km_ok) +
                "/20 optimal" + fmt(", Spearman max err %.2g", rho_err)};
}

Outcome zero_shot_transfer() {
    synth::AnisotropicParams a;
    a.rows = 5000;
    a.sample_seed = 11;
    a.language = "lang-a";
    synth::AnisotropicParams b = a;
    b.sample_seed = 12;
    b.language = "lang-b";
    const auto corpus_a = synth::anisotropic(a);
    const auto corpus_b = synth::anisotropic(b);
    const auto t = fit_transform(corpus_a.matrix, {.seed = 3});
    const auto before = isotropy_pc(corpus_b.matrix).value;
    const auto out = apply_transform(t, corpus_b.matrix);
    const auto after = isotropy_pc(out).value;
    const auto& prov = out.provenance()["isotropy_transform"];
    const bool prov_ok = prov["source_language"] == "lang-a" && prov["target_language"] == "lang-b" &&
                         prov["cross_language"] == true;
    return {after > before && prov_ok,
            fmt("I_PC(B) %.3g", before) + fmt(" -> %.3g", after) +
                (prov_ok ? ", provenance lang-a -> lang-b" : ", provenance MISSING")};
}

Outcome synthetic_sts() {
    const auto bench = synth::sts_benchmark({});
    const auto t = fit_transform(bench.matrix, {.seed = 1});
    const auto base = evaluate_sts(bench.matrix, bench.dataset, nullptr, StsSetting::Baseline);
    const auto ind = evaluate_sts(bench.matrix, bench.dataset, &t, StsSetting::Individual);
    return {base.spearman_pct < ind.spearman_pct,
            fmt("baseline %.2f", base.spearman_pct) + fmt(" < individual %.2f", ind.spearman_pct)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"decomposition identity", decomposition_identity},
        {"isotropic baseline", isotropic_baseline},
        {"enhancement effect", enhancement_effect},
        {"outlier recovery", outlier_recovery},
        {"oracle equivalence", oracle_equivalence},
        {"zero-shot structure transfer", zero_shot_transfer},
        {"synthetic STS", synthetic_sts},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
