#include "mws/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mws/rng.hpp"

namespace mws {

double margin_distance(double s_x, double s_y) {
    if (!std::isfinite(s_x) || !std::isfinite(s_y))
        throw std::invalid_argument("margin_distance: non-finite coordinate");
    return std::fabs(s_x - s_y) / std::sqrt(2.0);
}

std::vector<double> margin_distances(const std::vector<MetaInstance>& pool) {
    std::vector<double> d;
    d.reserve(pool.size());
    for (const auto& m : pool) d.push_back(margin_distance(m.coord_x(), m.coord_y()));
    return d;
}

std::vector<double> selection_probs(const std::vector<double>& distances,
                                    double alpha) {
    if (distances.empty())
        throw std::invalid_argument("selection_probs: empty pool");
    if (alpha <= 0.0) throw std::invalid_argument("selection_probs: alpha must be > 0");
    double max_exp = -std::numeric_limits<double>::infinity();
    for (double d : distances) max_exp = std::max(max_exp, -alpha * d);
    std::vector<double> p(distances.size());
    double sum = 0.0;
    for (size_t i = 0; i < distances.size(); ++i) {
        p[i] = std::exp(-alpha * distances[i] - max_exp);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

std::vector<int> sample(const std::vector<MetaInstance>& pool, int n,
                        const SamplerSpec& spec) {
    const int m = static_cast<int>(pool.size());
    if (n > m) throw std::invalid_argument("sample: n exceeds pool size");
    if (n < 0) throw std::invalid_argument("sample: n must be >= 0");
    SeededRng rng(spec.seed);

    if (spec.strategy == SamplerStrategy::kUniform) {
        std::vector<int> idx(static_cast<size_t>(m));
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < n; ++i) {
            const int j =
                i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
        }
        idx.resize(static_cast<size_t>(n));
        return idx;
    }

    std::vector<double> weights = selection_probs(margin_distances(pool), spec.alpha);
    std::vector<int> remaining(static_cast<size_t>(m));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> out;
    out.reserve(static_cast<size_t>(n));
    for (int draw = 0; draw < n; ++draw) {
        double total = 0.0;
        for (int i : remaining) total += weights[static_cast<size_t>(i)];
        const double u = rng.uniform(0.0, total);
        double acc = 0.0;
        size_t pick = remaining.size() - 1;  // guard against fp undershoot
        for (size_t i = 0; i < remaining.size(); ++i) {
            acc += weights[static_cast<size_t>(remaining[i])];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        out.push_back(remaining[pick]);
        remaining.erase(remaining.begin() + static_cast<long>(pick));
    }
    return out;
}

FrequencyStudy monte_carlo_frequencies(const std::vector<MetaInstance>& pool, int n,
                                       int iterations, const SamplerSpec& spec) {
    if (iterations < 1)
        throw std::invalid_argument("monte_carlo_frequencies: need >= 1 iteration");
    FrequencyStudy study;
    std::vector<long> counts(pool.size(), 0);
    std::vector<double> prev(pool.size(), 0.0);
    study.convergence.reserve(static_cast<size_t>(iterations));
    for (int it = 0; it < iterations; ++it) {
        SamplerSpec iter_spec = spec;
        iter_spec.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(it));
        for (int idx : sample(pool, n, iter_spec)) ++counts[static_cast<size_t>(idx)];
        double delta = 0.0;
        for (size_t i = 0; i < pool.size(); ++i) {
            const double f = static_cast<double>(counts[i]) / (it + 1);
            delta += std::fabs(f - prev[i]);
            prev[i] = f;
        }
        study.convergence.push_back(delta / static_cast<double>(pool.size()));
    }
    study.frequency = std::move(prev);
    return study;
}

std::vector<int> canonical_set(const std::vector<double>& frequencies, int n) {
    if (n > static_cast<int>(frequencies.size()))
        throw std::invalid_argument("canonical_set: n exceeds item count");
    std::vector<int> idx(frequencies.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return frequencies[static_cast<size_t>(a)] > frequencies[static_cast<size_t>(b)];
    });
    idx.resize(static_cast<size_t>(n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

void distance_stats(const std::vector<int>& set, const std::vector<double>& d,
                    double* mean, double* sd, double* max) {
    *mean = *sd = *max = 0.0;
    if (set.empty()) return;
    double sum = 0.0;
    for (int i : set) {
        sum += d[static_cast<size_t>(i)];
        *max = std::max(*max, d[static_cast<size_t>(i)]);
    }
    *mean = sum / static_cast<double>(set.size());
    double ss = 0.0;
    for (int i : set) {
        const double v = d[static_cast<size_t>(i)] - *mean;
        ss += v * v;
    }
    *sd = std::sqrt(ss / static_cast<double>(set.size()));
}

}  // namespace

SetComparison compare_sets(const std::vector<int>& a, const std::vector<int>& b,
                           const std::vector<double>& distances) {
    SetComparison c;
    std::vector<int> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<int> inter, uni;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::back_inserter(inter));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(),
                   std::back_inserter(uni));
    c.overlap = static_cast<int>(inter.size());
    c.jaccard = uni.empty() ? 1.0
                            : static_cast<double>(inter.size()) /
                                  static_cast<double>(uni.size());
    distance_stats(sa, distances, &c.mean_distance_a, &c.std_distance_a,
                   &c.max_distance_a);
    distance_stats(sb, distances, &c.mean_distance_b, &c.std_distance_b,
                   &c.max_distance_b);
    return c;
}

}  // namespace mws
