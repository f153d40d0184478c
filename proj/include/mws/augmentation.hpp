#pragma once

#include <cstdint>
#include <vector>

#include "mws/meta_instance.hpp"

namespace mws {

enum class SamplerStrategy { kUniform, kMargin };

struct SamplerSpec {
    SamplerStrategy strategy = SamplerStrategy::kUniform;
    double alpha = 10.0;  // margin temperature
    std::uint64_t seed = 0;
};

// Perpendicular distance to the diagonal of the (s_x, s_y) square.
double margin_distance(double s_x, double s_y);

std::vector<double> margin_distances(const std::vector<MetaInstance>& pool);

// Max-stabilized softmax over -alpha * d; sums to 1 within 1e-12.
std::vector<double> selection_probs(const std::vector<double>& distances,
                                    double alpha);

// Without-replacement draw of n pool indices. Uniform: seeded partial
// Fisher-Yates. Margin: sequential weighted draws with renormalization after
// each removal (the exact conditional distribution).
std::vector<int> sample(const std::vector<MetaInstance>& pool, int n,
                        const SamplerSpec& spec);

struct FrequencyStudy {
    std::vector<double> frequency;  // per pool item, in [0, 1]
    // Convergence series: mean absolute change of the frequency vector after
    // each iteration (decays ~1/t once the estimate settles).
    std::vector<double> convergence;
};

// N independent iterations with iteration seeds mix(spec.seed, iteration).
FrequencyStudy monte_carlo_frequencies(const std::vector<MetaInstance>& pool, int n,
                                       int iterations, const SamplerSpec& spec);

// Top-n by frequency; ties broken toward the lower pool index.
std::vector<int> canonical_set(const std::vector<double>& frequencies, int n);

struct SetComparison {
    int overlap = 0;
    double jaccard = 0.0;
    double mean_distance_a = 0.0, std_distance_a = 0.0, max_distance_a = 0.0;
    double mean_distance_b = 0.0, std_distance_b = 0.0, max_distance_b = 0.0;
};

SetComparison compare_sets(const std::vector<int>& a, const std::vector<int>& b,
                           const std::vector<double>& distances);

}  // namespace mws
