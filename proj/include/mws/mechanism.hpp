#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mws/dataset.hpp"
#include "mws/expr.hpp"
#include "mws/grid.hpp"

namespace mws {

// A numeric field that may instead reference a search-block parameter.
struct ParamValue {
    bool is_ref = false;
    double value = 0.0;
    std::string ref;

    static ParamValue fixed(double v) { return {false, v, {}}; }
    static ParamValue param(std::string name) { return {true, 0.0, std::move(name)}; }
    static ParamValue parse(const nlohmann::json& j);
    nlohmann::json to_json() const;
    double resolve(const Expr::Env& params) const;
};

struct LatentSpec {
    enum class Dist { kGaussian, kUniform };
    std::string name;
    Dist dist = Dist::kGaussian;
    ParamValue a;  // mu / lo
    ParamValue b;  // sigma / hi
};

struct ObservedFeature {
    std::string name;
    Expr expr;             // over latents (+ params)
    ParamValue obs_noise;  // additive gaussian observation-noise scale
};

struct NoiseSpec {
    enum class Kind { kHomoscedastic, kHeteroscedastic, kLabelCorruption };
    Kind kind = Kind::kHomoscedastic;
    ParamValue sigma;    // homoscedastic scale / heteroscedastic scale /
                         // corruption fraction
    int feature_index = 0;  // heteroscedastic driver (observed-feature index)
};

struct SearchPolicy {
    enum class Kind { kFirstInBox, kNearestCenter, kPenalized };
    Kind kind = Kind::kFirstInBox;
    double bonus = 0.5;     // nearest_center multiplier for in-box candidates
    double penalty = 1.0;   // penalized: additive out-of-box penalty
    double y_weight = 1.0;  // penalized: weight on dy^2
};

// Seed-deterministic generative recipe plus a finite parameter search block.
struct MechanismSpec {
    int version = 1;
    int n_rows = 200;
    std::vector<LatentSpec> latents;
    std::vector<ObservedFeature> observed_features;
    Expr target_expr;
    NoiseSpec noise;
    ParamValue distractor_count = ParamValue::fixed(0);
    // Grid in declaration order: the first parameter varies slowest.
    std::vector<std::pair<std::string, std::vector<double>>> params;
    SearchPolicy policy;

    static MechanismSpec parse(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // Throws std::invalid_argument on undeclared names, empty value lists,
    // n_rows < 10, or a candidate grid larger than 10000.
    void validate() const;
    long candidate_count() const;
    Expr::Env candidate_env(long index) const;
};

// x = mean R^2 of KNN (k=5, uniform weights), y = mean R^2 of OLS, both over
// the fixed evaluation splitter, each fold score clamped to [-1, 1].
std::pair<double, double> evaluate_xy(const Dataset& d);

struct ExecutionResult {
    Dataset data;
    double x_score = 0.0;
    double y_score = 0.0;
    Expr::Env chosen_params;
    long candidate_index = 0;
    long candidates_scored = 0;
};

// Enumerates the parameter grid, builds each candidate dataset from
// (seed, candidate index), scores it, and applies the search policy against
// the target cell.
ExecutionResult execute_mechanism(const MechanismSpec& spec, std::uint64_t seed,
                                  const TargetCell& cell);

// Builds one dataset for a fully resolved parameter assignment.
Dataset build_dataset(const MechanismSpec& spec, const Expr::Env& params,
                      std::uint64_t seed);

}  // namespace mws
