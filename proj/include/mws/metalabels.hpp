#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mws/dataset.hpp"
#include "mws/learners.hpp"
#include "mws/meta_instance.hpp"

namespace mws {

enum class Algorithm { kLr = 0, kKnn = 1, kLasso = 2, kRidge = 3, kElasticNet = 4 };

struct AlgoConfig {
    int k = 5;
    KnnWeighting weighting = KnnWeighting::kUniform;
    double alpha = 1.0;
    double l1_ratio = 0.5;
};

struct TuningSpec {
    Algorithm algorithm = Algorithm::kLr;
    int trial_budget = 50;
    std::uint64_t seed = 0;
    int inner_folds = 10;
};

// Seeded random search over the per-algorithm space, scored by mean R^2 over
// inner TSCV with the min-max pipeline. LR has an empty space and returns the
// default config with zero trials.
AlgoConfig tune(Algorithm algo, const Dataset& d, const TuningSpec& spec);

// Outer repeated TSCV scores for a fixed configuration, concatenated in
// (repeat, fold) order. Splits with fewer than two test points are excluded;
// the count of exclusions is reported through `excluded` when non-null.
std::vector<double> outer_evaluate(const Dataset& d, Algorithm algo,
                                   const AlgoConfig& config, int outer_folds,
                                   int outer_repeats, std::uint64_t seed,
                                   int* excluded = nullptr);

// rows = outer splits, columns = algorithms.
struct PerformanceMatrix {
    Matrix scores;
    std::string dataset_name;
};

// Per-row descending-R^2 ranks (1 = best) with average ranks on ties.
Matrix rank_splits(const PerformanceMatrix& perf);

// Tie-adjusted Friedman chi-square on the rank matrix, df = k - 1.
std::pair<double, double> friedman_test(const Matrix& ranks);

// CD = q_alpha * sqrt(k (k+1) / (6 N)) from the embedded alpha = 0.05 table.
double nemenyi_cd(int k, int n, double alpha = 0.05);

// bit_a = 1 iff mean rank r_a <= r* + cd.
std::array<int, kNumAlgorithms> assign_multilabel(const Vector& mean_ranks, double cd);

struct LabelingConfig {
    int outer_folds = 10;
    int outer_repeats = 10;
    int trial_budget = 50;
    std::uint64_t seed = 0;
};

// Full two-stage tune-then-evaluate labeling of one dataset: meta-features,
// continuous labels, Friedman/Nemenyi multi-label bits.
MetaInstance label_dataset(const Dataset& d, const std::string& provenance,
                           const LabelingConfig& cfg);

}  // namespace mws
