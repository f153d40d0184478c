#include "mws/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mws/learners.hpp"
#include "mws/resampling.hpp"
#include "mws/rng.hpp"

namespace fs = std::filesystem;

namespace mws {

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::kNone: return "none";
        case Condition::kUniform: return "uniform";
        case Condition::kMargin: return "margin";
    }
    throw std::logic_error("bad condition");
}

Condition condition_from_name(const std::string& s) {
    if (s == "none") return Condition::kNone;
    if (s == "uniform") return Condition::kUniform;
    if (s == "margin") return Condition::kMargin;
    throw std::invalid_argument("unknown condition '" + s + "'");
}

std::string formulation_name(Formulation f) {
    return f == Formulation::kRegression ? "regression" : "multilabel";
}

Formulation formulation_from_name(const std::string& s) {
    if (s == "regression") return Formulation::kRegression;
    if (s == "multilabel") return Formulation::kMultilabel;
    throw std::invalid_argument("unknown formulation '" + s + "'");
}

void ExperimentConfig::validate(int real_rows, int pool_size) const {
    if (k < 2) throw std::invalid_argument("experiment: k must be >= 2");
    if (repeats < 1) throw std::invalid_argument("experiment: repeats must be >= 1");
    if (seeds.empty()) throw std::invalid_argument("experiment: need at least one seed");
    if (real_rows < k)
        throw std::invalid_argument("experiment: fewer real rows than folds");
    if (condition != Condition::kNone && n_syn > pool_size)
        throw std::invalid_argument("experiment: n_syn exceeds the synthetic pool");
    if (n_syn < 0) throw std::invalid_argument("experiment: n_syn must be >= 0");
    if (alpha <= 0) throw std::invalid_argument("experiment: alpha must be > 0");
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"k", k},
            {"repeats", repeats},
            {"seeds", seeds},
            {"condition", condition_name(condition)},
            {"n_syn", n_syn},
            {"alpha", alpha},
            {"formulation", formulation_name(formulation)}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.k = j.at("k").get<int>();
    c.repeats = j.at("repeats").get<int>();
    c.seeds = j.at("seeds").get<std::vector<int>>();
    c.condition = condition_from_name(j.at("condition").get<std::string>());
    c.n_syn = j.at("n_syn").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.formulation = formulation_from_name(j.at("formulation").get<std::string>());
    return c;
}

const SeedScores& MetricReport::metric(const std::string& name) const {
    for (const auto& m : metrics)
        if (m.metric == name) return m;
    throw std::invalid_argument("no metric named '" + name + "' in report");
}

double hamming_loss(const std::vector<std::array<int, kNumAlgorithms>>& y_true,
                    const std::vector<std::array<int, kNumAlgorithms>>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("hamming_loss: shape mismatch");
    if (y_true.empty()) throw std::invalid_argument("hamming_loss: empty input");
    long mismatches = 0;
    for (size_t i = 0; i < y_true.size(); ++i)
        for (int a = 0; a < kNumAlgorithms; ++a)
            if (y_true[i][static_cast<size_t>(a)] != y_pred[i][static_cast<size_t>(a)])
                ++mismatches;
    return static_cast<double>(mismatches) /
           (static_cast<double>(y_true.size()) * kNumAlgorithms);
}

double subset_accuracy(const std::vector<std::array<int, kNumAlgorithms>>& y_true,
                       const std::vector<std::array<int, kNumAlgorithms>>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("subset_accuracy: shape mismatch");
    if (y_true.empty()) throw std::invalid_argument("subset_accuracy: empty input");
    long exact = 0;
    for (size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++exact;
    return static_cast<double>(exact) / static_cast<double>(y_true.size());
}

namespace {

constexpr int kNumFeatures = 12;

Matrix feature_matrix(const std::vector<MetaInstance>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), kNumFeatures);
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto arr = rows[i].features.as_array();
        for (int f = 0; f < kNumFeatures; ++f)
            m(static_cast<Eigen::Index>(i), f) = arr[static_cast<size_t>(f)];
    }
    return m;
}

struct RepeatScores {
    std::array<double, kNumAlgorithms> r2{};
    double r2_mean = 0.0;
    double hamming = 0.0;
    double subset = 0.0;
};

// One (seed, repeat) unit: shared folds over real rows, one synthetic draw
// shared across folds, pooled out-of-fold metrics.
RepeatScores evaluate_repeat(const Matrix& real_x,
                             const std::vector<MetaInstance>& meta,
                             const Matrix& pool_x,
                             const std::vector<MetaInstance>& pool,
                             const ExperimentConfig& cfg, int seed, int repeat) {
    const int n_real = static_cast<int>(meta.size());
    const FoldAssignment folds =
        kfold_shuffled(n_real, cfg.k, static_cast<std::uint64_t>(seed + repeat));

    std::vector<int> draw;
    if (cfg.condition != Condition::kNone && cfg.n_syn > 0) {
        SamplerSpec sampler;
        sampler.strategy = cfg.condition == Condition::kUniform
                               ? SamplerStrategy::kUniform
                               : SamplerStrategy::kMargin;
        sampler.alpha = cfg.alpha;
        sampler.seed = mix_seed(static_cast<std::uint64_t>(seed),
                                static_cast<std::uint64_t>(repeat));
        draw = sample(pool, cfg.n_syn, sampler);
        // Canonical pool order: the training set depends only on which items
        // were drawn, so equal draws give bit-identical scores.
        std::sort(draw.begin(), draw.end());
    }

    Matrix oof_pred(n_real, kNumAlgorithms);
    std::vector<std::array<int, kNumAlgorithms>> oof_bits(
        static_cast<size_t>(n_real));

    for (int f = 0; f < folds.k; ++f) {
        const auto train_idx = folds.train_indices(f);
        const auto test_idx = folds.test_indices(f);
        const int n_train = static_cast<int>(train_idx.size()) +
                            static_cast<int>(draw.size());

        Matrix train_x(n_train, kNumFeatures);
        Matrix test_x(static_cast<Eigen::Index>(test_idx.size()), kNumFeatures);
        for (size_t i = 0; i < train_idx.size(); ++i)
            train_x.row(static_cast<Eigen::Index>(i)) = real_x.row(train_idx[i]);
        for (size_t i = 0; i < draw.size(); ++i)
            train_x.row(static_cast<Eigen::Index>(train_idx.size() + i)) =
                pool_x.row(draw[i]);
        for (size_t i = 0; i < test_idx.size(); ++i)
            test_x.row(static_cast<Eigen::Index>(i)) = real_x.row(test_idx[i]);

        auto [train_std, scaler] = standardize_fit(train_x);
        const Matrix test_std = standardize_apply(test_x, scaler);

        for (int a = 0; a < kNumAlgorithms; ++a) {
            Vector train_y(n_train);
            for (size_t i = 0; i < train_idx.size(); ++i)
                train_y(static_cast<Eigen::Index>(i)) =
                    meta[static_cast<size_t>(train_idx[i])]
                        .continuous[static_cast<size_t>(a)];
            for (size_t i = 0; i < draw.size(); ++i)
                train_y(static_cast<Eigen::Index>(train_idx.size() + i)) =
                    pool[static_cast<size_t>(draw[i])]
                        .continuous[static_cast<size_t>(a)];
            const TargetScaler ts = standardize_target_fit(train_y);
            const Vector train_y_std = standardize_target_apply(train_y, ts);
            const SvrModel svr = fit_svr(train_std, train_y_std);
            const Vector pred =
                standardize_target_invert(svr_predict(svr, test_std), ts);
            for (size_t i = 0; i < test_idx.size(); ++i)
                oof_pred(test_idx[i], a) = pred(static_cast<Eigen::Index>(i));

            std::vector<int> labels(static_cast<size_t>(n_train));
            for (size_t i = 0; i < train_idx.size(); ++i)
                labels[i] = meta[static_cast<size_t>(train_idx[i])]
                                .binary[static_cast<size_t>(a)];
            for (size_t i = 0; i < draw.size(); ++i)
                labels[train_idx.size() + i] =
                    pool[static_cast<size_t>(draw[i])].binary[static_cast<size_t>(a)];
            const std::vector<int> bits = gnb_fit_predict(train_std, labels, test_std);
            for (size_t i = 0; i < test_idx.size(); ++i)
                oof_bits[static_cast<size_t>(test_idx[i])][static_cast<size_t>(a)] =
                    bits[i];
        }
    }

    RepeatScores scores;
    std::vector<std::array<int, kNumAlgorithms>> true_bits(
        static_cast<size_t>(n_real));
    for (int a = 0; a < kNumAlgorithms; ++a) {
        Vector y_true(n_real);
        for (int i = 0; i < n_real; ++i) {
            y_true(i) = meta[static_cast<size_t>(i)].continuous[static_cast<size_t>(a)];
            true_bits[static_cast<size_t>(i)][static_cast<size_t>(a)] =
                meta[static_cast<size_t>(i)].binary[static_cast<size_t>(a)];
        }
        scores.r2[static_cast<size_t>(a)] = r2_score(y_true, oof_pred.col(a));
        scores.r2_mean += scores.r2[static_cast<size_t>(a)] / kNumAlgorithms;
    }
    scores.hamming = hamming_loss(true_bits, oof_bits);
    scores.subset = subset_accuracy(true_bits, oof_bits);
    return scores;
}

SeedScores finalize(std::string name, bool higher_is_better,
                    const std::vector<std::vector<double>>& per_seed_repeats) {
    SeedScores s;
    s.metric = std::move(name);
    s.higher_is_better = higher_is_better;
    for (const auto& reps : per_seed_repeats) {
        double mean = 0.0;
        for (double v : reps) mean += v;
        mean /= static_cast<double>(reps.size());
        double ss = 0.0;
        for (double v : reps) ss += (v - mean) * (v - mean);
        const double sd = reps.size() > 1
                              ? std::sqrt(ss / static_cast<double>(reps.size() - 1))
                              : 0.0;
        s.per_seed.push_back(mean);
        s.within_seed_std.push_back(sd);
    }
    for (double v : s.per_seed) s.mean += v;
    s.mean /= static_cast<double>(s.per_seed.size());
    double ss = 0.0;
    for (double v : s.per_seed) ss += (v - s.mean) * (v - s.mean);
    s.sd = s.per_seed.size() > 1
               ? std::sqrt(ss / static_cast<double>(s.per_seed.size() - 1))
               : 0.0;
    return s;
}

}  // namespace

namespace {

// All metrics from one sweep: r2_<algo>, r2_mean, hamming_loss and
// subset_accuracy. evaluate_condition filters this by formulation; the curve
// and granularity studies use the headline triple directly.
MetricReport evaluate_full(const std::vector<MetaInstance>& meta,
                           const std::vector<MetaInstance>& pool,
                           const ExperimentConfig& cfg) {
    cfg.validate(static_cast<int>(meta.size()), static_cast<int>(pool.size()));
    const Matrix real_x = feature_matrix(meta);
    const Matrix pool_x = pool.empty() ? Matrix(0, kNumFeatures) : feature_matrix(pool);

    const size_t n_seeds = cfg.seeds.size();
    std::vector<std::vector<double>> r2_mean(n_seeds), hamming(n_seeds),
        subset(n_seeds);
    std::array<std::vector<std::vector<double>>, kNumAlgorithms> r2;
    for (auto& v : r2) v.resize(n_seeds);

    for (size_t si = 0; si < n_seeds; ++si) {
        for (int r = 0; r < cfg.repeats; ++r) {
            const RepeatScores sc =
                evaluate_repeat(real_x, meta, pool_x, pool, cfg, cfg.seeds[si], r);
            r2_mean[si].push_back(sc.r2_mean);
            hamming[si].push_back(sc.hamming);
            subset[si].push_back(sc.subset);
            for (int a = 0; a < kNumAlgorithms; ++a)
                r2[static_cast<size_t>(a)][si].push_back(sc.r2[static_cast<size_t>(a)]);
        }
    }

    MetricReport report;
    for (int a = 0; a < kNumAlgorithms; ++a)
        report.metrics.push_back(
            finalize(std::string("r2_") + kAlgorithmNames[static_cast<size_t>(a)],
                     true, r2[static_cast<size_t>(a)]));
    report.metrics.push_back(finalize("r2_mean", true, r2_mean));
    report.metrics.push_back(finalize("hamming_loss", false, hamming));
    report.metrics.push_back(finalize("subset_accuracy", true, subset));
    return report;
}

}  // namespace

MetricReport evaluate_condition(const std::vector<MetaInstance>& meta,
                                const std::vector<MetaInstance>& pool,
                                const ExperimentConfig& cfg) {
    const MetricReport full = evaluate_full(meta, pool, cfg);
    MetricReport report;
    for (const auto& m : full.metrics) {
        const bool regression_metric = m.metric.rfind("r2_", 0) == 0;
        if ((cfg.formulation == Formulation::kRegression) == regression_metric)
            report.metrics.push_back(m);
    }
    return report;
}

namespace {

Vector to_vector(const std::vector<double>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

// The three metrics compared in the curve and granularity studies.
std::vector<std::string> headline_metrics() {
    return {"r2_mean", "hamming_loss", "subset_accuracy"};
}

}  // namespace

LearningCurve learning_curve(const std::vector<MetaInstance>& meta,
                             const std::vector<MetaInstance>& pool,
                             const ExperimentConfig& base, std::vector<int> n_grid) {
    const int pool_size = static_cast<int>(pool.size());
    if (n_grid.empty()) {
        for (int n = 20; n < pool_size; n += 20) n_grid.push_back(n);
        n_grid.push_back(pool_size);
    }
    if (n_grid.back() != pool_size)
        throw std::invalid_argument("learning_curve: final grid point must be the pool size");

    LearningCurve curve;
    ExperimentConfig cfg = base;
    cfg.condition = Condition::kNone;
    cfg.n_syn = 0;
    curve.none = evaluate_full(meta, pool, cfg);

    for (int n_syn : n_grid) {
        CurvePoint point;
        point.n_syn = n_syn;
        cfg.n_syn = n_syn;
        cfg.condition = Condition::kUniform;
        point.uniform = evaluate_full(meta, pool, cfg);
        cfg.condition = Condition::kMargin;
        point.margin = evaluate_full(meta, pool, cfg);
        point.h2_suppressed = n_syn == pool_size;
        if (!point.h2_suppressed) {
            for (const auto& m : headline_metrics())
                point.h2[m] = paired_t_test(to_vector(point.uniform.metric(m).per_seed),
                                            to_vector(point.margin.metric(m).per_seed));
        }
        curve.points.push_back(std::move(point));
    }

    // H1: endpoint (full-pool) augmentation against no augmentation. The two
    // samplers coincide there; the margin report stands for both.
    const CurvePoint& endpoint = curve.points.back();
    for (const auto& m : headline_metrics())
        curve.h1[m] = paired_t_test(to_vector(endpoint.margin.metric(m).per_seed),
                                    to_vector(curve.none.metric(m).per_seed));
    return curve;
}

std::vector<GranularityRow> granularity_compare(const std::vector<MetaInstance>& meta,
                                                const std::vector<MetaInstance>& pool_a,
                                                const std::vector<MetaInstance>& pool_b,
                                                const ExperimentConfig& cfg) {
    if (pool_a.empty() || pool_b.empty())
        throw std::invalid_argument("granularity_compare: empty pool");
    ExperimentConfig run = cfg;
    run.condition = Condition::kUniform;  // full-pool draw: sampler is immaterial
    run.n_syn = static_cast<int>(pool_a.size());
    const MetricReport a = evaluate_full(meta, pool_a, run);
    run.n_syn = static_cast<int>(pool_b.size());
    const MetricReport b = evaluate_full(meta, pool_b, run);

    std::vector<GranularityRow> rows;
    for (const auto& m : headline_metrics()) {
        GranularityRow row;
        row.metric = m;
        row.higher_is_better = a.metric(m).higher_is_better;
        row.mean_a = a.metric(m).mean;
        row.mean_b = b.metric(m).mean;
        row.test = paired_t_test(to_vector(a.metric(m).per_seed),
                                 to_vector(b.metric(m).per_seed));
        const double d = row.test.mean_diff;
        if (d == 0.0)
            row.favours = "tie";
        else if ((d > 0.0) == row.higher_is_better)
            row.favours = "pool_a";
        else
            row.favours = "pool_b";
        rows.push_back(std::move(row));
    }
    return rows;
}

double relative_delta(double v_base, double v_new, bool higher_is_better) {
    if (v_base == 0.0) return 0.0;
    const double delta = (v_new - v_base) / std::fabs(v_base);
    return higher_is_better ? delta : -delta;
}

AblationResult run_ablation(const std::vector<MetaInstance>& meta,
                            const std::vector<MetaInstance>& pool,
                            const ExperimentConfig& cfg) {
    AblationResult r;
    ExperimentConfig run = cfg;
    run.condition = Condition::kNone;
    r.none = evaluate_condition(meta, pool, run);
    run.condition = Condition::kUniform;
    run.n_syn = cfg.n_syn;
    r.uniform = evaluate_condition(meta, pool, run);
    run.condition = Condition::kMargin;
    r.margin = evaluate_condition(meta, pool, run);
    return r;
}

namespace {

std::ofstream open_report(const fs::path& dir, const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out.precision(10);
    return out;
}

fs::path prepare_dir(const std::string& out_dir, bool force) {
    fs::path dir(out_dir);
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw std::runtime_error("output directory " + out_dir +
                                 " exists; pass --force to overwrite");
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg) {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << experiment_manifest(cfg).dump(2) << "\n";
}

}  // namespace

nlohmann::json experiment_manifest(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["pinned"] = {{"meta_learner", "svr c=1 epsilon=0.1 gamma=scale"},
                   {"classifier", "gaussian naive bayes per label"},
                   {"x_landmarker", "knn k=5 uniform"},
                   {"y_landmarker", "ols"},
                   {"margin_alpha_default", 10.0},
                   {"synthetic_draws", "one draw per (seed, repeat), shared across folds"},
                   {"fold_rule", "kfold_shuffled(n_real, k, seed + repeat) over real rows"}};
    return j;
}

void emit_condition_report(const MetricReport& r, const ExperimentConfig& cfg,
                           const std::string& out_dir, bool force) {
    const fs::path dir = prepare_dir(out_dir, force);
    auto out = open_report(dir, "scores.csv");
    out << "metric,direction,mean,std,mean_within_seed_std";
    for (size_t s = 0; s < cfg.seeds.size(); ++s) out << ",seed_" << cfg.seeds[s];
    out << "\n";
    for (const auto& m : r.metrics) {
        double mws = 0.0;
        for (double v : m.within_seed_std) mws += v;
        mws /= static_cast<double>(m.within_seed_std.size());
        out << m.metric << "," << (m.higher_is_better ? "higher" : "lower") << ","
            << m.mean << "," << m.sd << "," << mws;
        for (double v : m.per_seed) out << "," << v;
        out << "\n";
    }
    write_manifest(dir, cfg);
}

void emit_ablation_report(const AblationResult& r, const ExperimentConfig& cfg,
                          const std::string& out_dir, bool force) {
    const fs::path dir = prepare_dir(out_dir, force);
    auto out = open_report(dir, "ablation.csv");
    out << "metric,direction,none,margin,uniform,delta_margin,delta_uniform\n";
    for (const auto& m : r.none.metrics) {
        const double none = m.mean;
        const double margin = r.margin.metric(m.metric).mean;
        const double uniform = r.uniform.metric(m.metric).mean;
        out << m.metric << "," << (m.higher_is_better ? "higher" : "lower") << ","
            << none << "," << margin << "," << uniform << ","
            << relative_delta(none, margin, m.higher_is_better) << ","
            << relative_delta(none, uniform, m.higher_is_better) << "\n";
    }
    write_manifest(dir, cfg);
}

void emit_curve_report(const LearningCurve& curve, const ExperimentConfig& cfg,
                       const std::string& out_dir, bool force) {
    const fs::path dir = prepare_dir(out_dir, force);
    {
        auto out = open_report(dir, "learning_curve.csv");
        out << "n_syn,metric,mean_none,mean_uniform,mean_margin,t,p,mean_diff\n";
        for (const auto& point : curve.points) {
            for (const auto& m : point.uniform.metrics) {
                out << point.n_syn << "," << m.metric << ","
                    << curve.none.metric(m.metric).mean << "," << m.mean << ","
                    << point.margin.metric(m.metric).mean << ",";
                const auto it = point.h2.find(m.metric);
                if (it == point.h2.end())
                    out << ",,";
                else
                    out << it->second.statistic << "," << it->second.p_value << ","
                        << it->second.mean_diff;
                out << "\n";
            }
        }
    }
    {
        auto out = open_report(dir, "h2_pvalues.csv");
        out << "n_syn,metric,t,p,mean_diff,ci_lo,ci_hi,degenerate\n";
        for (const auto& point : curve.points)
            for (const auto& [metric, test] : point.h2)
                out << point.n_syn << "," << metric << "," << test.statistic << ","
                    << test.p_value << "," << test.mean_diff << "," << test.ci_lo
                    << "," << test.ci_hi << "," << (test.degenerate ? 1 : 0) << "\n";
    }
    {
        auto out = open_report(dir, "h1_endpoint.csv");
        out << "metric,t,p,mean_diff,ci_lo,ci_hi,degenerate\n";
        for (const auto& [metric, test] : curve.h1)
            out << metric << "," << test.statistic << "," << test.p_value << ","
                << test.mean_diff << "," << test.ci_lo << "," << test.ci_hi << ","
                << (test.degenerate ? 1 : 0) << "\n";
    }
    write_manifest(dir, cfg);
}

void emit_granularity_report(const std::vector<GranularityRow>& rows,
                             const ExperimentConfig& cfg, const std::string& out_dir,
                             bool force) {
    const fs::path dir = prepare_dir(out_dir, force);
    auto out = open_report(dir, "granularity.csv");
    out << "metric,direction,mean_a,mean_b,mean_diff,ci_lo,ci_hi,t,p,favours\n";
    for (const auto& r : rows)
        out << r.metric << "," << (r.higher_is_better ? "higher" : "lower") << ","
            << r.mean_a << "," << r.mean_b << "," << r.test.mean_diff << ","
            << r.test.ci_lo << "," << r.test.ci_hi << "," << r.test.statistic << ","
            << r.test.p_value << "," << r.favours << "\n";
    write_manifest(dir, cfg);
}

}  // namespace mws
