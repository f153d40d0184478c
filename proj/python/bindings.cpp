#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "mws/augmentation.hpp"
#include "mws/complexity.hpp"
#include "mws/dataset.hpp"
#include "mws/grid.hpp"
#include "mws/harness.hpp"
#include "mws/learners.hpp"
#include "mws/mechanism.hpp"
#include "mws/metalabels.hpp"
#include "mws/propose.hpp"
#include "mws/resampling.hpp"
#include "mws/runner.hpp"
#include "mws/stats.hpp"

namespace py = pybind11;
using namespace mws;

namespace {

Dataset make_dataset(const Matrix& features, const Vector& target,
                     std::vector<std::string> column_names) {
    Dataset d;
    d.features = features;
    d.target = target;
    if (column_names.empty())
        for (Eigen::Index j = 0; j < features.cols(); ++j)
            column_names.push_back("f" + std::to_string(j));
    d.column_names = std::move(column_names);
    d.validate();
    return d;
}

// Coordinate-only pool for the augmentation helpers: x = KNN label,
// y = LR label.
std::vector<MetaInstance> pool_from_coords(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pool coordinates must have equal length");
    std::vector<MetaInstance> pool(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        pool[i].name = "item_" + std::to_string(i);
        pool[i].provenance = "synthetic";
        pool[i].continuous[1] = x[i];
        pool[i].continuous[0] = y[i];
    }
    return pool;
}

SamplerSpec make_sampler(const std::string& strategy, double alpha,
                         std::uint64_t seed) {
    SamplerSpec s;
    if (strategy == "uniform")
        s.strategy = SamplerStrategy::kUniform;
    else if (strategy == "margin")
        s.strategy = SamplerStrategy::kMargin;
    else
        throw std::invalid_argument("strategy must be 'uniform' or 'margin'");
    s.alpha = alpha;
    s.seed = seed;
    return s;
}

py::dict test_result_dict(const TestResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["df"] = r.df;
    d["mean_diff"] = r.mean_diff;
    d["ci_lo"] = r.ci_lo;
    d["ci_hi"] = r.ci_hi;
    d["degenerate"] = r.degenerate;
    return d;
}

py::dict cell_dict(const TargetCell& c) {
    py::dict d;
    d["ii"] = c.ii;
    d["jj"] = c.jj;
    d["x_lo"] = c.x_lo;
    d["x_hi"] = c.x_hi;
    d["y_lo"] = c.y_lo;
    d["y_hi"] = c.y_hi;
    d["x_center"] = c.x_center;
    d["y_center"] = c.y_center;
    d["id"] = c.id();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Meta-learning workbench core: complexity meta-features, "
              "landmarker evaluation, targeted synthetic generation, and "
              "margin-based augmentation analysis.";

    // --- meta-features and landmarkers ------------------------------------
    m.def(
        "compute_meta_features",
        [](const Matrix& features, const Vector& target) {
            const MetaFeatureVector v =
                compute_meta_features(make_dataset(features, target, {}));
            py::dict d;
            const auto values = v.as_array();
            const auto& names = MetaFeatureVector::names();
            for (size_t i = 0; i < values.size(); ++i) d[names[i]] = values[i];
            return d;
        },
        py::arg("features"), py::arg("target"),
        "The 12 complexity meta-features of a numeric regression dataset.");

    m.def(
        "evaluate_xy",
        [](const Matrix& features, const Vector& target) {
            return evaluate_xy(make_dataset(features, target, {}));
        },
        py::arg("features"), py::arg("target"),
        "Landmarker scores (x = KNN R^2, y = linear R^2) under the fixed "
        "stratified 5-fold splitter.");

    // --- performance grid ---------------------------------------------------
    m.def(
        "grid_cells",
        [](int bins) {
            py::list out;
            for (const auto& c : grid_cells(bins)) out.append(cell_dict(c));
            return out;
        },
        py::arg("bins"));
    m.def(
        "cell_of", [](int bins, double x, double y) { return cell_dict(cell_of(bins, x, y)); },
        py::arg("bins"), py::arg("x"), py::arg("y"));

    // --- mechanism DSL ------------------------------------------------------
    m.def(
        "build_dataset",
        [](const std::string& spec_json, std::uint64_t seed) {
            const MechanismSpec spec =
                MechanismSpec::parse(nlohmann::json::parse(spec_json));
            spec.validate();
            if (!spec.params.empty())
                throw std::invalid_argument(
                    "build_dataset: spec must be fully resolved (no search params)");
            const Dataset d = build_dataset(spec, {}, seed);
            return py::make_tuple(Matrix(d.features), Vector(d.target),
                                  d.column_names);
        },
        py::arg("spec_json"), py::arg("seed"),
        "Materialize a mechanism spec (JSON string, no free search "
        "parameters) into (features, target, column_names).");

    m.def(
        "run_generation",
        [](int grid_b, int witnesses, int budget, std::uint64_t base_seed,
           const std::string& run_dir, int max_rows) {
            RunConfig cfg;
            cfg.grid_b = grid_b;
            cfg.witnesses = witnesses;
            cfg.budget = budget;
            cfg.base_seed = base_seed;
            cfg.validate();
            DeterministicProposer proposer(max_rows);
            const RunSummary s = run_grid(cfg, proposer, run_dir);
            if (!run_dir.empty()) write_run_manifest(s, run_dir);
            return run_manifest(s).dump(2);
        },
        py::arg("grid_b"), py::arg("witnesses"), py::arg("budget"),
        py::arg("base_seed") = 0, py::arg("run_dir") = "",
        py::arg("max_rows") = 0,
        "Deterministic grid-targeted dataset generation; returns the run "
        "manifest as a JSON string.");

    // --- augmentation -------------------------------------------------------
    m.def("margin_distance", &margin_distance, py::arg("s_x"), py::arg("s_y"));
    m.def("selection_probs", &selection_probs, py::arg("distances"),
          py::arg("alpha"));
    m.def(
        "sample_pool",
        [](const std::vector<double>& x, const std::vector<double>& y, int n,
           const std::string& strategy, double alpha, std::uint64_t seed) {
            return sample(pool_from_coords(x, y), n, make_sampler(strategy, alpha, seed));
        },
        py::arg("x"), py::arg("y"), py::arg("n"), py::arg("strategy"),
        py::arg("alpha") = 10.0, py::arg("seed") = 0,
        "Without-replacement draw of n pool indices from landmark "
        "coordinates.");
    m.def(
        "monte_carlo_frequencies",
        [](const std::vector<double>& x, const std::vector<double>& y, int n,
           int iterations, const std::string& strategy, double alpha,
           std::uint64_t seed) {
            const FrequencyStudy f = monte_carlo_frequencies(
                pool_from_coords(x, y), n, iterations, make_sampler(strategy, alpha, seed));
            return py::make_tuple(f.frequency, f.convergence);
        },
        py::arg("x"), py::arg("y"), py::arg("n"), py::arg("iterations"),
        py::arg("strategy"), py::arg("alpha") = 10.0, py::arg("seed") = 0,
        "Selection-frequency study; returns (frequency, convergence).");
    m.def("canonical_set", &canonical_set, py::arg("frequencies"), py::arg("n"));

    // --- resampling ----------------------------------------------------------
    m.def(
        "kfold",
        [](int n, int k, std::uint64_t seed) { return kfold_shuffled(n, k, seed).fold_of; },
        py::arg("n"), py::arg("k"), py::arg("seed") = 0);
    m.def(
        "tscv",
        [](const Vector& y, int k, std::uint64_t seed) {
            return tscv_assign(y, k, seed).fold_of;
        },
        py::arg("y"), py::arg("k"), py::arg("seed") = 0,
        "Totally stratified CV fold assignment over a regression target.");

    // --- metrics and statistics ----------------------------------------------
    m.def(
        "r2_score",
        [](const Vector& y_true, const Vector& y_pred) {
            return r2_score(y_true, y_pred);
        },
        py::arg("y_true"), py::arg("y_pred"));
    m.def(
        "hamming_loss",
        [](const std::vector<std::array<int, kNumAlgorithms>>& t,
           const std::vector<std::array<int, kNumAlgorithms>>& p) {
            return hamming_loss(t, p);
        },
        py::arg("y_true"), py::arg("y_pred"));
    m.def(
        "subset_accuracy",
        [](const std::vector<std::array<int, kNumAlgorithms>>& t,
           const std::vector<std::array<int, kNumAlgorithms>>& p) {
            return subset_accuracy(t, p);
        },
        py::arg("y_true"), py::arg("y_pred"));
    m.def(
        "paired_t_test",
        [](const Vector& a, const Vector& b) {
            return test_result_dict(paired_t_test(a, b));
        },
        py::arg("a"), py::arg("b"));
    m.def("nemenyi_cd", &nemenyi_cd, py::arg("k"), py::arg("n"),
          py::arg("alpha") = 0.05);
    m.def(
        "pearson", [](const Vector& x, const Vector& y) { return pearson(x, y); },
        py::arg("x"), py::arg("y"));
    m.def(
        "spearman", [](const Vector& x, const Vector& y) { return spearman(x, y); },
        py::arg("x"), py::arg("y"));

    m.attr("algorithm_names") = std::vector<std::string>(kAlgorithmNames.begin(),
                                                         kAlgorithmNames.end());
}
