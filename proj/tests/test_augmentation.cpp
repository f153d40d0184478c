#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mws/augmentation.hpp"
#include "mws/rng.hpp"
#include "mws/stats.hpp"

using namespace mws;

namespace {

std::vector<MetaInstance> pool_at(const std::vector<std::pair<double, double>>& xy) {
    std::vector<MetaInstance> pool(xy.size());
    for (size_t i = 0; i < xy.size(); ++i) {
        pool[i].name = "p" + std::to_string(i);
        pool[i].provenance = "synthetic";
        pool[i].continuous[1] = xy[i].first;   // x = KNN label
        pool[i].continuous[0] = xy[i].second;  // y = LR label
    }
    return pool;
}

std::vector<MetaInstance> random_pool(int m, std::uint64_t seed) {
    SeededRng rng(seed);
    std::vector<std::pair<double, double>> xy;
    for (int i = 0; i < m; ++i) xy.emplace_back(rng.uniform(), rng.uniform());
    return pool_at(xy);
}

}  // namespace

TEST_CASE("margin_distance formula") {
    CHECK(margin_distance(0.4, 0.4) == doctest::Approx(0.0));
    CHECK(margin_distance(0.9, 0.2) == doctest::Approx(0.494975).epsilon(1e-5));
    CHECK(margin_distance(0.2, 0.9) == doctest::Approx(margin_distance(0.9, 0.2)));
    CHECK_THROWS(margin_distance(std::nan(""), 0.5));
}

TEST_CASE("selection_probs softmax properties") {
    std::vector<double> equal(8, 0.3);
    for (double p : selection_probs(equal, 10.0))
        CHECK(p == doctest::Approx(1.0 / 8));

    const auto two = selection_probs({0.0, 0.661}, 10.0);
    CHECK(two[0] / two[1] == doctest::Approx(std::exp(6.61)).epsilon(1e-9));

    // alpha -> 0 limit approaches uniform.
    const auto flat = selection_probs({0.0, 0.3, 0.7}, 1e-9);
    for (double p : flat) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-6));

    // Sum-to-one and strict monotonicity in distance.
    std::vector<double> d = {0.5, 0.1, 0.3, 0.0, 0.65};
    const auto probs = selection_probs(d, 10.0);
    double sum = 0.0;
    for (double p : probs) {
        CHECK(p > 0.0);
        sum += p;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
    for (size_t i = 0; i < d.size(); ++i)
        for (size_t j = 0; j < d.size(); ++j)
            if (d[i] < d[j]) CHECK(probs[i] > probs[j]);

    CHECK_THROWS(selection_probs({}, 10.0));
    CHECK_THROWS(selection_probs({0.1}, 0.0));
}

TEST_CASE("sample draws without replacement, deterministically") {
    const auto pool = random_pool(30, 3);
    SamplerSpec spec;
    spec.seed = 11;
    for (auto strategy : {SamplerStrategy::kUniform, SamplerStrategy::kMargin}) {
        spec.strategy = strategy;
        const auto idx = sample(pool, 12, spec);
        CHECK(idx.size() == 12);
        CHECK(std::set<int>(idx.begin(), idx.end()).size() == 12);
        CHECK(sample(pool, 12, spec) == idx);
        // Exhaustion: n = pool size returns the full pool.
        auto all = sample(pool, 30, spec);
        std::sort(all.begin(), all.end());
        for (int i = 0; i < 30; ++i) CHECK(all[i] == i);
        CHECK_THROWS(sample(pool, 31, spec));
    }
}

TEST_CASE("margin sampling with n = 1 picks the on-diagonal item") {
    const auto pool =
        pool_at({{0.9, 0.1}, {0.1, 0.9}, {0.5, 0.5}, {0.95, 0.2}, {0.15, 0.85}});
    SamplerSpec spec;
    spec.strategy = SamplerStrategy::kMargin;
    spec.alpha = 10.0;
    int hits = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        spec.seed = static_cast<std::uint64_t>(t);
        if (sample(pool, 1, spec)[0] == 2) ++hits;
    }
    CHECK(hits >= trials * 98 / 100);
}

TEST_CASE("monte_carlo_frequencies counting identity and convergence") {
    const auto pool = random_pool(20, 5);
    SamplerSpec spec;
    spec.seed = 2;

    spec.strategy = SamplerStrategy::kUniform;
    const FrequencyStudy u = monte_carlo_frequencies(pool, 8, 500, spec);
    double mean = 0.0;
    for (double f : u.frequency) mean += f;
    mean /= pool.size();
    CHECK(mean == doctest::Approx(8.0 / 20).epsilon(1e-12));
    for (double f : u.frequency)
        CHECK(f == doctest::Approx(0.4).epsilon(0.15));  // LLN band

    spec.strategy = SamplerStrategy::kMargin;
    const FrequencyStudy m = monte_carlo_frequencies(pool, 8, 500, spec);
    double m_mean = 0.0;
    for (double f : m.frequency) m_mean += f;
    CHECK(m_mean / pool.size() == doctest::Approx(0.4).epsilon(1e-12));

    // The convergence series settles: late deltas are much smaller.
    REQUIRE(u.convergence.size() == 500);
    CHECK(u.convergence.back() < u.convergence.front());
    CHECK(u.convergence.back() < 0.01);

    CHECK_THROWS(monte_carlo_frequencies(pool, 8, 0, spec));
}

TEST_CASE("margin frequencies anti-correlate with distance") {
    const auto pool = random_pool(120, 9);
    SamplerSpec spec;
    spec.strategy = SamplerStrategy::kMargin;
    spec.seed = 4;
    const FrequencyStudy m = monte_carlo_frequencies(pool, 40, 400, spec);
    const auto d = margin_distances(pool);
    Vector dv(120), fv(120);
    for (int i = 0; i < 120; ++i) {
        dv(i) = d[static_cast<size_t>(i)];
        fv(i) = m.frequency[static_cast<size_t>(i)];
    }
    CHECK(pearson(dv, fv) < -0.8);
}

TEST_CASE("canonical_set top-n with lower-index tie break") {
    const auto set = canonical_set({0.5, 0.9, 0.5, 0.1}, 2);
    CHECK(set == std::vector<int>{0, 1});
    CHECK_THROWS(canonical_set({0.1, 0.2}, 3));
}

TEST_CASE("compare_sets overlap, jaccard, and distance stats") {
    const std::vector<double> d = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    const SetComparison same = compare_sets({0, 1, 2}, {0, 1, 2}, d);
    CHECK(same.overlap == 3);
    CHECK(same.jaccard == doctest::Approx(1.0));
    CHECK(same.mean_distance_a == doctest::Approx(0.1));
    CHECK(same.max_distance_a == doctest::Approx(0.2));

    const SetComparison disjoint = compare_sets({0, 1}, {4, 5}, d);
    CHECK(disjoint.overlap == 0);
    CHECK(disjoint.jaccard == doctest::Approx(0.0));
    CHECK(disjoint.mean_distance_b == doctest::Approx(0.45));

    const SetComparison half = compare_sets({0, 1, 2}, {2, 3, 4}, d);
    CHECK(half.overlap == 1);
    CHECK(half.jaccard == doctest::Approx(1.0 / 5));
}

TEST_CASE("stratified pool: margin canonical set stays near the diagonal") {
    // 45 near-diagonal items and 28 far ones; a 40-item margin canonical set
    // is drawn entirely from the near stratum.
    std::vector<std::pair<double, double>> xy;
    SeededRng rng(31);
    for (int i = 0; i < 45; ++i) {
        const double base = rng.uniform(0.2, 0.8);
        xy.emplace_back(base, base + rng.uniform(-0.05, 0.05));
    }
    for (int i = 0; i < 28; ++i) {
        const double base = rng.uniform(0.0, 0.3);
        xy.emplace_back(base + 0.65, base);
    }
    const auto pool = pool_at(xy);
    SamplerSpec spec;
    spec.strategy = SamplerStrategy::kMargin;
    spec.seed = 6;
    const FrequencyStudy m = monte_carlo_frequencies(pool, 40, 300, spec);
    for (int idx : canonical_set(m.frequency, 40)) CHECK(idx < 45);
}
