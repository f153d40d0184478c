#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mws/augmentation.hpp"
#include "mws/complexity.hpp"
#include "mws/dataset.hpp"
#include "mws/harness.hpp"
#include "mws/llm_client.hpp"
#include "mws/metalabels.hpp"
#include "mws/runner.hpp"
#include "mws/stats.hpp"

namespace fs = std::filesystem;
using namespace mws;

namespace {

// "0..9" or "0,3,7" or a single integer.
std::vector<int> parse_seeds(const std::string& text) {
    std::vector<int> seeds;
    const auto range = text.find("..");
    if (range != std::string::npos) {
        const int lo = std::stoi(text.substr(0, range));
        const int hi = std::stoi(text.substr(range + 2));
        for (int s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        seeds.push_back(std::stoi(text.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "empty seed list");
    return seeds;
}

PreprocessSpec make_preprocess(const std::string& target,
                               const std::vector<std::string>& drop,
                               const std::vector<std::string>& categorical) {
    PreprocessSpec spec;
    spec.target_column = target;
    spec.drop_columns = drop;
    spec.categorical_columns = categorical;
    return spec;
}

// data.csv files of a generate run, in cell/slot order.
std::vector<std::string> run_dir_datasets(const std::string& run_dir) {
    std::vector<std::string> paths;
    std::vector<fs::path> cells;
    for (const auto& e : fs::directory_iterator(run_dir))
        if (e.is_directory() && e.path().filename().string().rfind("cell_", 0) == 0)
            cells.push_back(e.path());
    std::sort(cells.begin(), cells.end());
    for (const auto& cell : cells) {
        std::vector<fs::path> slots;
        for (const auto& e : fs::directory_iterator(cell))
            if (e.is_directory()) slots.push_back(e.path());
        std::sort(slots.begin(), slots.end());
        for (const auto& slot : slots)
            if (fs::exists(slot / "data.csv")) paths.push_back((slot / "data.csv").string());
    }
    return paths;
}

std::string dataset_label(const std::string& path) {
    fs::path p(path);
    if (p.filename() == "data.csv")  // generate layout: cell_ii_jj/ds_sss/data.csv
        return p.parent_path().parent_path().filename().string() + "__" +
               p.parent_path().filename().string();
    return p.stem().string();
}

int cmd_metafeatures(const std::vector<std::string>& data,
                     const std::string& run_dir, const PreprocessSpec& prep,
                     const std::string& out) {
    std::vector<std::string> paths = data;
    if (!run_dir.empty())
        for (auto& p : run_dir_datasets(run_dir)) paths.push_back(std::move(p));
    if (paths.empty()) throw CLI::ValidationError("metafeatures", "no input datasets");

    std::ofstream os(out, std::ios::binary);
    if (!os) throw CLI::ValidationError("--out", "cannot open " + out);
    os.precision(17);
    os << "name";
    for (const auto& n : MetaFeatureVector::names()) os << "," << n;
    os << "\n";
    for (const auto& path : paths) {
        const Dataset d = load_csv(path, prep);
        const MetaFeatureVector mf = compute_meta_features(d);
        os << dataset_label(path);
        for (double v : mf.as_array()) os << "," << v;
        os << "\n";
    }
    std::cout << "wrote " << paths.size() << " rows to " << out << "\n";
    return 0;
}

int cmd_metalabels(const std::vector<std::string>& data, const std::string& run_dir,
                   const PreprocessSpec& prep, const std::string& provenance,
                   const LabelingConfig& cfg, const std::string& out) {
    std::vector<std::string> paths = data;
    if (!run_dir.empty())
        for (auto& p : run_dir_datasets(run_dir)) paths.push_back(std::move(p));
    if (paths.empty()) throw CLI::ValidationError("metalabels", "no input datasets");

    std::vector<MetaInstance> rows;
    for (const auto& path : paths) {
        Dataset d = load_csv(path, prep);
        d.name = dataset_label(path);
        rows.push_back(label_dataset(d, provenance, cfg));
        std::cout << "labeled " << d.name << "\n";
    }
    write_meta_csv(rows, out);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
    return 0;
}

int cmd_generate(const RunConfig& cfg, const std::string& out,
                 const std::string& llm_config_path, int max_rows) {
    if (fs::exists(out) && !fs::is_empty(out))
        throw CLI::ValidationError("--out", "directory exists and is not empty: " + out);
    std::unique_ptr<Proposer> proposer;
    if (cfg.proposer_backend == "det") {
        proposer = std::make_unique<DeterministicProposer>(max_rows);
    } else if (cfg.proposer_backend == "llm") {
        if (llm_config_path.empty())
            throw CLI::ValidationError("--llm-config", "required for --proposer llm");
        proposer = std::make_unique<LlmProposer>(LlmConfig::from_file(llm_config_path),
                                                 std::make_shared<HttpLlmTransport>());
    } else {
        throw CLI::ValidationError("--proposer", "must be det or llm");
    }
    const RunSummary summary = run_grid(cfg, *proposer, out);
    write_run_manifest(summary, out);
    std::cout << "accepted " << summary.total_accepted << " datasets in "
              << summary.total_attempts << " attempts; manifest at " << out
              << "/manifest.json\n";
    return 0;
}

int cmd_augment_analyze(const std::string& pool_path, int n, int iters, double alpha,
                        std::uint64_t seed, const std::string& out, bool force) {
    const std::vector<MetaInstance> pool = read_meta_csv(pool_path);
    if (n > static_cast<int>(pool.size()))
        throw CLI::ValidationError("--n", "exceeds pool size");
    fs::path dir(out);
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw CLI::ValidationError("--out", "directory exists; pass --force");
    fs::create_directories(dir);

    const std::vector<double> distances = margin_distances(pool);
    SamplerSpec uniform{SamplerStrategy::kUniform, alpha, seed};
    SamplerSpec margin{SamplerStrategy::kMargin, alpha, seed};
    const FrequencyStudy fu = monte_carlo_frequencies(pool, n, iters, uniform);
    const FrequencyStudy fm = monte_carlo_frequencies(pool, n, iters, margin);

    {
        std::ofstream os(dir / "frequencies.csv", std::ios::binary);
        os.precision(10);
        os << "index,name,distance,freq_uniform,freq_margin\n";
        for (size_t i = 0; i < pool.size(); ++i)
            os << i << "," << pool[i].name << "," << distances[i] << ","
               << fu.frequency[i] << "," << fm.frequency[i] << "\n";
    }
    {
        std::ofstream os(dir / "convergence.csv", std::ios::binary);
        os.precision(10);
        os << "iteration,delta_uniform,delta_margin\n";
        for (int it = 0; it < iters; ++it)
            os << it + 1 << "," << fu.convergence[static_cast<size_t>(it)] << ","
               << fm.convergence[static_cast<size_t>(it)] << "\n";
    }
    const std::vector<int> cu = canonical_set(fu.frequency, n);
    const std::vector<int> cm = canonical_set(fm.frequency, n);
    auto write_set = [&](const char* name, const std::vector<int>& set,
                         const std::vector<double>& freq) {
        std::ofstream os(dir / name, std::ios::binary);
        os.precision(10);
        os << "index,name,distance,frequency\n";
        for (int i : set)
            os << i << "," << pool[static_cast<size_t>(i)].name << ","
               << distances[static_cast<size_t>(i)] << ","
               << freq[static_cast<size_t>(i)] << "\n";
    };
    write_set("canonical_uniform.csv", cu, fu.frequency);
    write_set("canonical_margin.csv", cm, fm.frequency);

    const SetComparison cmp = compare_sets(cu, cm, distances);
    Vector dvec(static_cast<Eigen::Index>(pool.size()));
    Vector fvec(static_cast<Eigen::Index>(pool.size()));
    for (size_t i = 0; i < pool.size(); ++i) {
        dvec(static_cast<Eigen::Index>(i)) = distances[i];
        fvec(static_cast<Eigen::Index>(i)) = fm.frequency[i];
    }
    double mean_u = 0.0, ss_u = 0.0;
    for (double v : fu.frequency) mean_u += v;
    mean_u /= static_cast<double>(pool.size());
    for (double v : fu.frequency) ss_u += (v - mean_u) * (v - mean_u);
    const double std_u = std::sqrt(ss_u / static_cast<double>(pool.size()));

    nlohmann::json cmp_json{
        {"pool_size", pool.size()},
        {"n", n},
        {"iterations", iters},
        {"alpha", alpha},
        {"seed", seed},
        {"uniform", {{"mean_frequency", mean_u}, {"std_frequency", std_u}}},
        {"margin", {{"pearson_distance_frequency", pearson(dvec, fvec)}}},
        {"canonical",
         {{"overlap", cmp.overlap},
          {"jaccard", cmp.jaccard},
          {"uniform",
           {{"mean_distance", cmp.mean_distance_a},
            {"std_distance", cmp.std_distance_a},
            {"max_distance", cmp.max_distance_a}}},
          {"margin",
           {{"mean_distance", cmp.mean_distance_b},
            {"std_distance", cmp.std_distance_b},
            {"max_distance", cmp.max_distance_b}}}}}};
    std::ofstream os(dir / "comparison.json", std::ios::binary);
    os << cmp_json.dump(2) << "\n";
    std::cout << "jaccard " << cmp.jaccard << "; reports in " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meta-learning workbench: synthetic grids, meta-datasets and "
                 "augmentation studies"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI config file");

    // ---- metafeatures ----
    std::vector<std::string> mf_data;
    std::string mf_run_dir, mf_target = "target", mf_out = "metafeatures.csv";
    std::vector<std::string> mf_drop, mf_categorical;
    auto* mf = app.add_subcommand("metafeatures",
                                  "batch complexity meta-features, one CSV row per dataset");
    mf->add_option("--data", mf_data, "input dataset CSV files");
    mf->add_option("--run-dir", mf_run_dir, "generate output directory to scan");
    mf->add_option("--target", mf_target, "target column name");
    mf->add_option("--drop", mf_drop, "columns to drop");
    mf->add_option("--categorical", mf_categorical, "categorical columns to one-hot");
    mf->add_option("--out", mf_out, "output CSV")->required();

    // ---- metalabels ----
    std::vector<std::string> ml_data;
    std::string ml_run_dir, ml_target = "target", ml_out = "meta.csv";
    std::string ml_provenance = "real";
    std::vector<std::string> ml_drop, ml_categorical;
    LabelingConfig ml_cfg;
    auto* ml = app.add_subcommand("metalabels",
                                  "full meta-dataset rows: features + performance labels");
    ml->add_option("--data", ml_data, "input dataset CSV files");
    ml->add_option("--run-dir", ml_run_dir, "generate output directory to scan");
    ml->add_option("--target", ml_target, "target column name");
    ml->add_option("--drop", ml_drop, "columns to drop");
    ml->add_option("--categorical", ml_categorical, "categorical columns to one-hot");
    ml->add_option("--provenance", ml_provenance, "real|synthetic")
        ->check(CLI::IsMember({"real", "synthetic"}));
    ml->add_option("--seed", ml_cfg.seed, "labeling seed");
    ml->add_option("--outer-folds", ml_cfg.outer_folds, "outer CV folds");
    ml->add_option("--outer-repeats", ml_cfg.outer_repeats, "outer CV repeats");
    ml->add_option("--trials", ml_cfg.trial_budget, "random-search trials");
    ml->add_option("--out", ml_out, "output meta CSV")->required();

    // ---- generate ----
    RunConfig gen_cfg;
    std::string gen_out, gen_llm_config;
    int gen_max_rows = 0;
    auto* gen = app.add_subcommand("generate", "fill a performance grid with witnesses");
    gen->add_option("--grid", gen_cfg.grid_b, "bins per axis")->default_val(7);
    gen->add_option("--witnesses", gen_cfg.witnesses, "accepted datasets per cell")
        ->default_val(10);
    gen->add_option("--budget", gen_cfg.budget, "attempt budget per cell")
        ->default_val(84);
    gen->add_option("--proposer", gen_cfg.proposer_backend, "det|llm")
        ->check(CLI::IsMember({"det", "llm"}))
        ->default_val("det");
    gen->add_option("--seed", gen_cfg.base_seed, "base seed")->default_val(0);
    gen->add_option("--llm-config", gen_llm_config, "LLM client config JSON");
    gen->add_option("--max-rows", gen_max_rows, "cap proposed n_rows (0 = no cap)")
        ->default_val(0);
    gen->add_option("--out", gen_out, "run directory")->required();

    // ---- augment-analyze ----
    std::string aa_pool, aa_out;
    int aa_n = 400, aa_iters = 1000;
    double aa_alpha = 10.0;
    std::uint64_t aa_seed = 0;
    bool aa_force = false;
    auto* aa = app.add_subcommand("augment-analyze",
                                  "Monte Carlo selection-frequency study over a pool");
    aa->add_option("--pool", aa_pool, "synthetic pool meta CSV")->required();
    aa->add_option("--n", aa_n, "subset size")->default_val(400);
    aa->add_option("--iters", aa_iters, "Monte Carlo iterations")->default_val(1000);
    aa->add_option("--alpha", aa_alpha, "margin temperature")->default_val(10.0);
    aa->add_option("--seed", aa_seed, "base seed")->default_val(0);
    aa->add_option("--out", aa_out, "output directory")->required();
    aa->add_flag("--force", aa_force, "overwrite existing outputs");

    // ---- shared experiment options ----
    auto add_experiment_options = [](CLI::App* cmd, ExperimentConfig* cfg,
                                     std::string* seeds_text) {
        cmd->add_option("--k", cfg->k, "folds")->default_val(10);
        cmd->add_option("--repeats", cfg->repeats, "repeats per seed")->default_val(10);
        cmd->add_option("--seeds", *seeds_text, "seed list, e.g. 0..9 or 0,3,7")
            ->default_val("0..9");
        cmd->add_option("--alpha", cfg->alpha, "margin temperature")->default_val(10.0);
    };

    // ---- evaluate ----
    std::string ev_meta, ev_pool, ev_out, ev_seeds = "0..9";
    std::string ev_condition = "none", ev_formulation = "regression";
    ExperimentConfig ev_cfg;
    bool ev_force = false;
    auto* ev = app.add_subcommand("evaluate", "one augmentation condition under repeated CV");
    ev->add_option("--meta", ev_meta, "real meta-dataset CSV")->required();
    ev->add_option("--pool", ev_pool, "synthetic pool meta CSV");
    ev->add_option("--condition", ev_condition, "none|uniform|margin")
        ->check(CLI::IsMember({"none", "uniform", "margin"}));
    ev->add_option("--n-syn", ev_cfg.n_syn, "synthetic rows per training fold");
    ev->add_option("--formulation", ev_formulation, "regression|multilabel")
        ->check(CLI::IsMember({"regression", "multilabel"}));
    add_experiment_options(ev, &ev_cfg, &ev_seeds);
    ev->add_option("--out", ev_out, "output directory")->required();
    ev->add_flag("--force", ev_force, "overwrite existing outputs");

    // ---- learning-curve ----
    std::string lc_meta, lc_pool, lc_out, lc_seeds = "0..9";
    std::string lc_formulation = "regression";
    ExperimentConfig lc_cfg;
    std::vector<int> lc_grid;
    bool lc_force = false;
    auto* lc = app.add_subcommand("learning-curve",
                                  "n_syn sweep with per-point strategy tests");
    lc->add_option("--meta", lc_meta, "real meta-dataset CSV")->required();
    lc->add_option("--pool", lc_pool, "synthetic pool meta CSV")->required();
    lc->add_option("--formulation", lc_formulation, "regression|multilabel")
        ->check(CLI::IsMember({"regression", "multilabel"}));
    lc->add_option("--grid", lc_grid, "explicit n_syn grid (default 20..pool step 20)");
    add_experiment_options(lc, &lc_cfg, &lc_seeds);
    lc->add_option("--out", lc_out, "output directory")->required();
    lc->add_flag("--force", lc_force, "overwrite existing outputs");

    // ---- granularity ----
    std::string gr_meta, gr_pool_a, gr_pool_b, gr_out, gr_seeds = "0..9";
    ExperimentConfig gr_cfg;
    bool gr_force = false;
    auto* gr = app.add_subcommand("granularity",
                                  "compare two pools used as full augmentation sets");
    gr->add_option("--meta", gr_meta, "real meta-dataset CSV")->required();
    gr->add_option("--pool-a", gr_pool_a, "first pool meta CSV")->required();
    gr->add_option("--pool-b", gr_pool_b, "second pool meta CSV")->required();
    add_experiment_options(gr, &gr_cfg, &gr_seeds);
    gr->add_option("--out", gr_out, "output directory")->required();
    gr->add_flag("--force", gr_force, "overwrite existing outputs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mf->parsed())
            return cmd_metafeatures(mf_data, mf_run_dir,
                                    make_preprocess(mf_target, mf_drop, mf_categorical),
                                    mf_out);
        if (ml->parsed())
            return cmd_metalabels(ml_data, ml_run_dir,
                                  make_preprocess(ml_target, ml_drop, ml_categorical),
                                  ml_provenance, ml_cfg, ml_out);
        if (gen->parsed())
            return cmd_generate(gen_cfg, gen_out, gen_llm_config, gen_max_rows);
        if (aa->parsed())
            return cmd_augment_analyze(aa_pool, aa_n, aa_iters, aa_alpha, aa_seed,
                                       aa_out, aa_force);
        if (ev->parsed()) {
            ev_cfg.seeds = parse_seeds(ev_seeds);
            ev_cfg.condition = condition_from_name(ev_condition);
            ev_cfg.formulation = formulation_from_name(ev_formulation);
            const auto meta = read_meta_csv(ev_meta);
            std::vector<MetaInstance> pool;
            if (!ev_pool.empty()) pool = read_meta_csv(ev_pool);
            const MetricReport report = evaluate_condition(meta, pool, ev_cfg);
            emit_condition_report(report, ev_cfg, ev_out, ev_force);
            std::cout << "reports in " << ev_out << "\n";
            return 0;
        }
        if (lc->parsed()) {
            lc_cfg.seeds = parse_seeds(lc_seeds);
            lc_cfg.formulation = formulation_from_name(lc_formulation);
            const auto meta = read_meta_csv(lc_meta);
            const auto pool = read_meta_csv(lc_pool);
            const LearningCurve curve = learning_curve(meta, pool, lc_cfg, lc_grid);
            emit_curve_report(curve, lc_cfg, lc_out, lc_force);
            std::cout << "reports in " << lc_out << "\n";
            return 0;
        }
        if (gr->parsed()) {
            gr_cfg.seeds = parse_seeds(gr_seeds);
            const auto meta = read_meta_csv(gr_meta);
            const auto pool_a = read_meta_csv(gr_pool_a);
            const auto pool_b = read_meta_csv(gr_pool_b);
            const auto rows = granularity_compare(meta, pool_a, pool_b, gr_cfg);
            emit_granularity_report(rows, gr_cfg, gr_out, gr_force);
            std::cout << "reports in " << gr_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
