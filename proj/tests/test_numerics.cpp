#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "cwrgeom/error.hpp"
#include "cwrgeom/numerics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cwrgeom;
using testing::random_matrix;
using testing::rows_of;

namespace {

oracle::Dense to_dense(const Matrix& m) {
    oracle::Dense out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out[static_cast<std::size_t>(r)].assign(m.row(r).data(), m.row(r).data() + m.cols());
    }
    return out;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("pca of points on the diagonal") {
    const auto p = pca(rows_of({{1, 1}, {2, 2}, {3, 3}}), true, 1);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(p.mean[0] == doctest::Approx(2.0));
    CHECK(p.mean[1] == doctest::Approx(2.0));
    CHECK(p.components(0, 0) == doctest::Approx(h).epsilon(1e-12));
    CHECK(p.components(0, 1) == doctest::Approx(h).epsilon(1e-12));
    // Covariance diag (2/3, 2/3) with off-diagonal 2/3: top eigenvalue 4/3.
    CHECK(p.eigenvalues[0] == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("uncentered pca of {e1, -e1}") {
    const auto p = pca(rows_of({{1, 0}, {-1, 0}}), false, 1);
    CHECK(p.components(0, 0) == doctest::Approx(1.0));
    CHECK(p.components(0, 1) == doctest::Approx(0.0));
    CHECK(p.mean.isZero());
}

TEST_CASE("pca matches a Jacobi eigensolver oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Matrix data = random_matrix(20, 5, seed);
        for (bool center : {true, false}) {
            const auto p = pca(data, center, 5);
            const auto ref = oracle::jacobi_eigen(oracle::scatter(to_dense(data), center));
            for (int i = 0; i < 5; ++i) {
                CHECK(p.eigenvalues[i] == doctest::Approx(ref.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
                for (int j = 0; j < 5; ++j) {
                    CHECK(std::abs(p.components(i, j) - ref.vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("pca components are orthonormal and reconstruct centered data") {
    const Matrix data = random_matrix(30, 6, 7, 3.0);
    const auto p = pca(data, true, 6);
    const Eigen::MatrixXd gram = p.components * p.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
    const Matrix centered = data.rowwise() - p.mean.transpose();
    const Matrix back = p.project(data) * p.components;
    CHECK((back - centered).cwiseAbs().maxCoeff() < 1e-6);
    for (int i = 0; i + 1 < 6; ++i) CHECK(p.eigenvalues[i] >= p.eigenvalues[i + 1]);
}

TEST_CASE("pca rejects out-of-range component counts") {
    const Matrix data = random_matrix(3, 5, 1);
    CHECK_THROWS_AS(pca(data, true, 0), ArgumentError);
    CHECK_THROWS_AS(pca(data, true, 4), ArgumentError);
    CHECK_NOTHROW(pca(data, true, 3));
}

TEST_CASE("degenerate spectra are flagged") {
    CHECK(pca(rows_of({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}), false, 1).near_degenerate);
    CHECK_FALSE(pca(rows_of({{2, 0}, {-2, 0}, {0, 1}, {0, -1}}), false, 1).near_degenerate);
}

TEST_CASE("kmeans separates two 1-D groups at the global optimum") {
    const Matrix data = rows_of({{0.0}, {0.1}, {10.0}, {10.1}});
    const auto ref = oracle::best_partition(to_dense(data), 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto km = kmeans(data, 2, seed);
        CHECK(km.inertia == doctest::Approx(ref.inertia).epsilon(1e-12));
        CHECK(km.assignments[0] == km.assignments[1]);
        CHECK(km.assignments[2] == km.assignments[3]);
        CHECK(km.assignments[0] != km.assignments[2]);
        const auto low = static_cast<Eigen::Index>(km.assignments[0]);
        CHECK(km.centroids(low, 0) == doctest::Approx(0.05));
        CHECK(km.centroids(1 - low, 0) == doctest::Approx(10.05));
    }
}

TEST_CASE("kmeans with k = 1 returns the mean") {
    const Matrix data = random_matrix(40, 3, 5);
    const auto km = kmeans(data, 1, 3);
    const Eigen::RowVectorXd mean = data.colwise().mean();
    CHECK((km.centroids.row(0) - mean).cwiseAbs().maxCoeff() < 1e-12);
    const double total_variance = (data.rowwise() - mean).squaredNorm() / 40.0;
    CHECK(km.inertia == doctest::Approx(total_variance * 40.0));
}

TEST_CASE("kmeans with k = M has zero inertia") {
    const Matrix data = random_matrix(6, 2, 8);
    const auto km = kmeans(data, 6, 1);
    CHECK(km.inertia == doctest::Approx(0.0));
    std::vector<bool> used(6, false);
    for (auto a : km.assignments) used[a] = true;
    CHECK(std::all_of(used.begin(), used.end(), [](bool u) { return u; }));
}

TEST_CASE("kmeans with duplicate points still returns no empty cluster") {
    const Matrix data = rows_of({{1, 1}, {1, 1}, {1, 1}, {5, 5}});
    const auto km = kmeans(data, 3, 4);
    std::vector<int> count(3, 0);
    for (auto a : km.assignments) ++count[a];
    for (int c : count) CHECK(c > 0);
}

TEST_CASE("kmeans argument checks") {
    const Matrix data = random_matrix(3, 2, 1);
    CHECK_THROWS_AS(kmeans(data, 4, 0), ArgumentError);
    CHECK_THROWS_AS(kmeans(data, 0, 0), ArgumentError);
}

TEST_CASE("kmeans finds the exhaustive optimum on small clustered sets") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal(0.0, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 6 + static_cast<std::size_t>(trial % 3);  // 6..8 points
        const std::size_t k = 2 + static_cast<std::size_t>(trial % 2);  // 2..3 clusters
        Matrix data(static_cast<Eigen::Index>(n), 2);
        for (std::size_t i = 0; i < n; ++i) {
            const double cx = 5.0 * static_cast<double>(i % k);
            data(static_cast<Eigen::Index>(i), 0) = cx + normal(rng);
            data(static_cast<Eigen::Index>(i), 1) = normal(rng);
        }
        const auto ref = oracle::best_partition(to_dense(data), k);
        const auto km = kmeans(data, k, static_cast<std::uint64_t>(trial));
        CHECK(km.inertia == doctest::Approx(ref.inertia).epsilon(1e-9));
    }
}

TEST_CASE("kmeans properties: monotone inertia, fixed point, centroid = mean, determinism") {
    const Matrix data = random_matrix(300, 4, 21, 2.0);
    const auto km = kmeans(data, 5, 11);
    for (std::size_t i = 0; i + 1 < km.inertia_history.size(); ++i) {
        CHECK(km.inertia_history[i + 1] <= km.inertia_history[i] + 1e-9);
    }
    REQUIRE(km.converged);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        CHECK(nearest_centroid(data.row(i), km.centroids) == km.assignments[static_cast<std::size_t>(i)]);
    }
    for (std::size_t c = 0; c < 5; ++c) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(4);
        int n = 0;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            if (km.assignments[static_cast<std::size_t>(i)] == c) {
                sum += data.row(i);
                ++n;
            }
        }
        REQUIRE(n > 0);
        CHECK((km.centroids.row(static_cast<Eigen::Index>(c)) - sum / n).cwiseAbs().maxCoeff() < 1e-8);
    }
    const auto again = kmeans(data, 5, 11);
    CHECK(again.assignments == km.assignments);
    CHECK(again.centroids == km.centroids);
}

TEST_CASE("nearest centroid ties go to the lowest index") {
    const Matrix centroids = rows_of({{1, 0}, {-1, 0}});
    CHECK(nearest_centroid(Eigen::RowVector2d(0, 5), centroids) == 0);
}

TEST_CASE("spearman on perfect monotone relations") {
    const std::vector<double> a{1, 2, 3};
    CHECK(spearman(a, std::vector<double>{10, 20, 30}) == doctest::Approx(1.0));
    CHECK(spearman(a, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("spearman with ties matches the brute-force rank oracle") {
    const std::vector<double> a{1, 2, 2, 3}, b{1, 3, 2, 4};
    CHECK(std::abs(spearman(a, b) - oracle::spearman(a, b)) < 1e-12);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> small(0, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(15), y(15);
        for (auto& v : x) v = small(rng);
        for (auto& v : y) v = small(rng);
        if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
        if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) continue;
        CHECK(std::abs(spearman(x, y) - oracle::spearman(x, y)) < 1e-12);
    }
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    std::vector<double> x(40), y(40), fx(40), gy(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x[i] = normal(rng);
        y[i] = x[i] + normal(rng);
        fx[i] = std::exp(x[i]);
        gy[i] = std::pow(y[i], 3) + 2.0;
    }
    CHECK(spearman(fx, gy) == doctest::Approx(spearman(x, y)).epsilon(1e-12));
}

TEST_CASE("spearman errors") {
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1}), ArgumentError);
    CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), ArgumentError);
    CHECK_THROWS_AS(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), NumericError);
}

TEST_CASE("sample_pairs basics") {
    for (const auto& p : sample_pairs(2, 3, 9)) {
        CHECK(((p.first == 0 && p.second == 1) || (p.first == 1 && p.second == 0)));
    }
    CHECK(sample_pairs(50, 100, 4) == sample_pairs(50, 100, 4));
    CHECK_FALSE(sample_pairs(50, 100, 4) == sample_pairs(50, 100, 5));
    CHECK_THROWS_AS(sample_pairs(1, 3, 0), ArgumentError);
}

TEST_CASE("sample_pairs index distribution is uniform (chi-square)") {
    // 2000 indices over 1000 bins per seed; aggregate 20 seeds so every bin
    // expects 40 draws. The chi-square statistic has 999 degrees of freedom,
    // mean 999 and sd ~44.7; 1200 is ~4.5 sd above the mean.
    std::vector<double> counts(1000, 0.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (const auto& p : sample_pairs(1000, 1000, seed)) {
            CHECK(p.first != p.second);
            counts[p.first] += 1;
            counts[p.second] += 1;
        }
    }
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - 40.0) * (c - 40.0) / 40.0;
    CHECK(chi2 < 1200.0);
    CHECK(chi2 > 800.0);
}

TEST_CASE("sample_rows draws without replacement up to M") {
    auto rows = sample_rows(10, 10, 3);
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(rows[i] == i);
    CHECK(sample_rows(3, 7, 1).size() == 7);
}

TEST_CASE("log_partition") {
    const Matrix pm = rows_of({{1, 0}, {-1, 0}});
    CHECK(log_partition(Vector::Zero(2), random_matrix(17, 2, 3)) == doctest::Approx(std::log(17.0)));
    CHECK(log_partition(Eigen::Vector2d(1, 0), pm) ==
          doctest::Approx(std::log(std::exp(1.0) + std::exp(-1.0))));
    CHECK(log_partition(Eigen::Vector2d(1, 0), pm) == doctest::Approx(1.1269).epsilon(1e-4));
    // u.w = 1000 and 0: exp(1000) overflows a double, the shifted form does not.
    const double big = log_partition(Eigen::Vector2d(1, 0), rows_of({{1000, 0}, {0, 3}}));
    CHECK(std::isfinite(big));
    CHECK(std::abs(big - oracle::exact_log_sum_exp({1000.0, 0.0})) < 1e-12);
    CHECK_THROWS_AS(log_partition(Eigen::Vector2d(std::nan(""), 0), pm), ArgumentError);
    CHECK_THROWS_AS(log_partition(Eigen::Vector3d(1, 0, 0), pm), ArgumentError);
}

TEST_CASE("log_partition agrees with high-precision arithmetic on small integer inputs") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> small(-4, 4);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + trial % 4;
        Matrix data(m, 3);
        Vector u(3);
        for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = small(rng);
        for (Eigen::Index i = 0; i < 3; ++i) u[i] = small(rng);
        std::vector<double> scores;
        for (int r = 0; r < m; ++r) scores.push_back(data.row(r).dot(u));
        CHECK(std::abs(log_partition(u, data) - oracle::exact_log_sum_exp(scores)) < 1e-12);
    }
}

}  // TEST_SUITE
