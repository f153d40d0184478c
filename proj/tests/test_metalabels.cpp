#include <doctest.h>

#include <cmath>

#include "mws/metalabels.hpp"
#include "mws/rng.hpp"
#include "test_util.hpp"

using namespace mws;

namespace {

// Classical second form of the Friedman statistic (valid without ties):
// chi2 = 12/(N k (k+1)) * sum_j R_j^2 - 3 N (k+1), R_j the rank sums.
double friedman_brute_force(const Matrix& ranks) {
    const double n = static_cast<double>(ranks.rows());
    const double k = static_cast<double>(ranks.cols());
    double sum_sq = 0.0;
    for (Eigen::Index j = 0; j < ranks.cols(); ++j) {
        const double rj = ranks.col(j).sum();
        sum_sq += rj * rj;
    }
    return 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
}

Dataset linear_dataset(int n) {
    Dataset d;
    d.features.resize(n, 1);
    d.target.resize(n);
    SeededRng rng(77);
    for (int i = 0; i < n; ++i) {
        d.features(i, 0) = rng.uniform(-2.0, 2.0);
        d.target(i) = d.features(i, 0);
    }
    d.column_names = {"x"};
    d.name = "linear";
    return d;
}

}  // namespace

TEST_CASE("rank_splits average-rank rule") {
    PerformanceMatrix perf;
    perf.scores.resize(3, 5);
    perf.scores.row(0) << 0.9, 0.5, 0.5, 0.2, 0.1;
    perf.scores.row(1) << 0.1, 0.1, 0.1, 0.1, 0.1;
    perf.scores.row(2) << 0.9, 0.8, 0.7, 0.6, 0.5;
    const Matrix ranks = rank_splits(perf);
    CHECK(ranks(0, 0) == doctest::Approx(1.0));
    CHECK(ranks(0, 1) == doctest::Approx(2.5));
    CHECK(ranks(0, 2) == doctest::Approx(2.5));
    CHECK(ranks(0, 3) == doctest::Approx(4.0));
    CHECK(ranks(0, 4) == doctest::Approx(5.0));
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(ranks(1, j) == doctest::Approx(3.0));
    for (Eigen::Index j = 0; j < 5; ++j)
        CHECK(ranks(2, j) == doctest::Approx(j + 1.0));
    // Each row sums to k(k+1)/2 = 15.
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(ranks.row(i).sum() == doctest::Approx(15.0));
}

TEST_CASE("friedman_test on an all-equal matrix is the null case") {
    const Matrix ranks = Matrix::Constant(100, 5, 3.0);
    auto [stat, p] = friedman_test(ranks);
    CHECK(stat == doctest::Approx(0.0));
    CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("friedman_test rejects when one algorithm dominates") {
    Matrix ranks(100, 5);
    for (int i = 0; i < 100; ++i) {
        ranks(i, 0) = 1.0;  // strict winner; rest tied at (2+3+4+5)/4
        for (int j = 1; j < 5; ++j) ranks(i, j) = 3.5;
    }
    auto [stat, p] = friedman_test(ranks);
    CHECK(stat > 0.0);
    CHECK(p < 0.05);
}

TEST_CASE("friedman_test matches the brute-force second form on tie-free data") {
    SeededRng rng(123);
    PerformanceMatrix perf;
    perf.scores.resize(100, 5);
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 5; ++j)
            perf.scores(i, j) = rng.uniform() + 0.05 * j;  // continuous: no ties
    const Matrix ranks = rank_splits(perf);
    auto [stat, p] = friedman_test(ranks);
    CHECK(stat == doctest::Approx(friedman_brute_force(ranks)).epsilon(1e-9));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}

TEST_CASE("nemenyi_cd values and scaling laws") {
    // k=5, N=100 with q = 2.728: CD = 2.728 * sqrt(30/600).
    CHECK(std::fabs(nemenyi_cd(5, 100) - 0.6100) < 0.0005);
    // Quadrupling N halves the CD.
    CHECK(nemenyi_cd(5, 400) == doctest::Approx(nemenyi_cd(5, 100) / 2.0));
    CHECK(nemenyi_cd(2, 25) == doctest::Approx(nemenyi_cd(2, 100) * 2.0));
    // k=2 instantiates to q2 * sqrt(1/N).
    CHECK(nemenyi_cd(2, 100) ==
          doctest::Approx(nemenyi_cd(2, 1) * std::sqrt(1.0 / 100.0)));
    CHECK_THROWS(nemenyi_cd(25, 100));
    CHECK_THROWS(nemenyi_cd(1, 100));
}

TEST_CASE("assign_multilabel threshold rule") {
    Vector ranks(5);
    ranks << 1.2, 1.7, 2.5, 4.0, 4.6;
    auto bits = assign_multilabel(ranks, 0.61);
    CHECK(bits == std::array<int, 5>{1, 1, 0, 0, 0});
    // CD >= k-1 covers every possible gap.
    bits = assign_multilabel(ranks, 4.0);
    CHECK(bits == std::array<int, 5>{1, 1, 1, 1, 1});
    // Best-ranked algorithm is always labeled.
    bits = assign_multilabel(ranks, 0.0);
    CHECK(bits[0] == 1);
    // Monotonicity: growing CD never clears a bit.
    auto prev = assign_multilabel(ranks, 0.1);
    for (double cd : {0.5, 1.0, 2.0, 3.0}) {
        auto cur = assign_multilabel(ranks, cd);
        for (int a = 0; a < 5; ++a) CHECK(cur[a] >= prev[a]);
        prev = cur;
    }
}

TEST_CASE("tune: ols returns the default config; knn prefers small k on y = x") {
    const Dataset d = linear_dataset(90);
    TuningSpec spec;
    spec.algorithm = Algorithm::kLr;
    const AlgoConfig lr = tune(Algorithm::kLr, d, spec);
    const AlgoConfig defaults;
    CHECK(lr.k == defaults.k);
    CHECK(lr.alpha == defaults.alpha);

    spec.algorithm = Algorithm::kKnn;
    spec.trial_budget = 50;
    spec.seed = 3;
    const AlgoConfig knn = tune(Algorithm::kKnn, d, spec);
    CHECK(knn.k <= 3);
    CHECK(knn.weighting == KnnWeighting::kDistance);
    // Determinism.
    const AlgoConfig again = tune(Algorithm::kKnn, d, spec);
    CHECK(again.k == knn.k);
    CHECK(again.weighting == knn.weighting);
}

TEST_CASE("outer_evaluate on noiseless linear data with ols is perfect") {
    const Dataset d = linear_dataset(80);
    const auto scores = outer_evaluate(d, Algorithm::kLr, AlgoConfig{}, 10, 10, 0);
    REQUIRE(scores.size() == 100);
    for (double s : scores) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("outer_evaluate on a constant target stays finite") {
    Dataset d = linear_dataset(40);
    d.target.setConstant(2.0);
    const auto scores = outer_evaluate(d, Algorithm::kLr, AlgoConfig{}, 5, 2, 1);
    for (double s : scores) CHECK(std::isfinite(s));
}

TEST_CASE("label_dataset produces a coherent MetaInstance") {
    Dataset d = linear_dataset(60);
    SeededRng rng(5);
    for (int i = 0; i < 60; ++i) d.target(i) += 0.05 * rng.gaussian();
    LabelingConfig cfg;
    cfg.outer_folds = 5;
    cfg.outer_repeats = 2;
    cfg.trial_budget = 10;
    const MetaInstance m = label_dataset(d, "real", cfg);
    CHECK(m.provenance == "real");
    CHECK(m.friedman_p >= 0.0);
    CHECK(m.friedman_p <= 1.0);
    // Near-linear data: the linear family scores close to 1.
    CHECK(m.continuous[0] > 0.9);
    // At least one applicable algorithm, and labels are bits.
    int set = 0;
    for (int b : m.binary) {
        CHECK((b == 0 || b == 1));
        set += b;
    }
    CHECK(set >= 1);
    // Performance-space coordinates mirror the continuous labels.
    CHECK(m.coord_x() == m.continuous[1]);
    CHECK(m.coord_y() == m.continuous[0]);
    // If Friedman is not rejected the labels are all ones.
    if (m.friedman_p >= 0.05)
        for (int b : m.binary) CHECK(b == 1);
}

TEST_CASE("meta CSV round-trips") {
    auto dir = testutil::temp_dir("meta");
    std::vector<MetaInstance> rows(2);
    rows[0].name = "a";
    rows[0].provenance = "real";
    rows[0].features.c1 = 0.25;
    rows[0].features.t2 = 12.5;
    rows[0].continuous = {0.1, 0.2, 0.3, 0.4, 0.5};
    rows[0].binary = {1, 0, 1, 0, 1};
    rows[0].friedman_p = 0.01;
    rows[0].cd = 0.61;
    rows[1].name = "b";
    rows[1].provenance = "synthetic";
    rows[1].friedman_p = 0.5;  // cd stays NaN (absent)
    write_meta_csv(rows, (dir / "meta.csv").string());
    const auto back = read_meta_csv((dir / "meta.csv").string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "a");
    CHECK(back[0].features.c1 == doctest::Approx(0.25));
    CHECK(back[0].continuous[4] == doctest::Approx(0.5));
    CHECK(back[0].binary == rows[0].binary);
    CHECK(back[0].cd == doctest::Approx(0.61));
    CHECK(back[1].provenance == "synthetic");
    CHECK(std::isnan(back[1].cd));
}
