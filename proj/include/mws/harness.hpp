#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mws/augmentation.hpp"
#include "mws/meta_instance.hpp"
#include "mws/stats.hpp"

namespace mws {

enum class Condition { kNone, kUniform, kMargin };
enum class Formulation { kRegression, kMultilabel };

std::string condition_name(Condition c);
Condition condition_from_name(const std::string& s);
std::string formulation_name(Formulation f);
Formulation formulation_from_name(const std::string& s);

struct ExperimentConfig {
    int k = 10;
    int repeats = 10;
    std::vector<int> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Condition condition = Condition::kNone;
    int n_syn = 0;
    double alpha = 10.0;
    Formulation formulation = Formulation::kRegression;

    void validate(int real_rows, int pool_size) const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// Seed-level scores for one metric.
struct SeedScores {
    std::string metric;
    bool higher_is_better = true;
    std::vector<double> per_seed;         // mean over repeats, per seed
    std::vector<double> within_seed_std;  // sample std over repeats, per seed
    double mean = 0.0;                    // across-seed mean
    double sd = 0.0;                      // across-seed sample std
};

struct MetricReport {
    std::vector<SeedScores> metrics;
    const SeedScores& metric(const std::string& name) const;
};

double hamming_loss(const std::vector<std::array<int, kNumAlgorithms>>& y_true,
                    const std::vector<std::array<int, kNumAlgorithms>>& y_pred);
double subset_accuracy(const std::vector<std::array<int, kNumAlgorithms>>& y_true,
                       const std::vector<std::array<int, kNumAlgorithms>>& y_pred);

// Repeated shuffled k-fold over the real rows only, fold-wise augmentation of
// the training split, SVR meta-learners with pooled out-of-fold R^2 per
// target and per-label GNB with pooled hard predictions. The report carries
// the metrics of the configured formulation: r2_<algo> plus r2_mean, or
// hamming_loss plus subset_accuracy.
MetricReport evaluate_condition(const std::vector<MetaInstance>& meta,
                                const std::vector<MetaInstance>& pool,
                                const ExperimentConfig& cfg);

struct CurvePoint {
    int n_syn = 0;
    MetricReport uniform;
    MetricReport margin;
    // H2: uniform vs margin per metric; suppressed at the full-pool endpoint
    // where the paired samples coincide.
    std::map<std::string, TestResult> h2;
    bool h2_suppressed = false;
};

struct LearningCurve {
    MetricReport none;
    std::vector<CurvePoint> points;
    // H1: full-pool augmentation vs no augmentation, per metric.
    std::map<std::string, TestResult> h1;
};

// n_syn sweep 20..pool step 20 with the pool size as the final point.
LearningCurve learning_curve(const std::vector<MetaInstance>& meta,
                             const std::vector<MetaInstance>& pool,
                             const ExperimentConfig& base,
                             std::vector<int> n_grid = {});

struct GranularityRow {
    std::string metric;
    bool higher_is_better = true;
    double mean_a = 0.0, mean_b = 0.0;
    TestResult test;         // paired a - b on per-seed scores
    std::string favours;     // "pool_a" | "pool_b" | "tie"
};

// Each pool used in turn as the full augmentation pool (n_syn = pool size).
std::vector<GranularityRow> granularity_compare(const std::vector<MetaInstance>& meta,
                                                const std::vector<MetaInstance>& pool_a,
                                                const std::vector<MetaInstance>& pool_b,
                                                const ExperimentConfig& cfg);

// Direction-aware relative delta: positive = improvement, per
// (v_new - v_base)/|v_base| with the sign flipped for lower-is-better metrics.
double relative_delta(double v_base, double v_new, bool higher_is_better);

struct AblationResult {
    MetricReport none;
    MetricReport uniform;
    MetricReport margin;
};

AblationResult run_ablation(const std::vector<MetaInstance>& meta,
                            const std::vector<MetaInstance>& pool,
                            const ExperimentConfig& cfg);

// Report emission. Refuses to reuse an existing directory unless force.
void emit_ablation_report(const AblationResult& r, const ExperimentConfig& cfg,
                          const std::string& out_dir, bool force);
void emit_curve_report(const LearningCurve& curve, const ExperimentConfig& cfg,
                       const std::string& out_dir, bool force);
void emit_condition_report(const MetricReport& r, const ExperimentConfig& cfg,
                           const std::string& out_dir, bool force);
void emit_granularity_report(const std::vector<GranularityRow>& rows,
                             const ExperimentConfig& cfg, const std::string& out_dir,
                             bool force);

// Manifest shared by all reports: full config, seeds and pinned defaults.
nlohmann::json experiment_manifest(const ExperimentConfig& cfg);

}  // namespace mws
