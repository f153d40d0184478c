#include "mws/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "mws/learners.hpp"
#include "mws/resampling.hpp"
#include "mws/rng.hpp"

namespace mws {

ParamValue ParamValue::parse(const nlohmann::json& j) {
    if (j.is_number()) return fixed(j.get<double>());
    if (j.is_string()) return param(j.get<std::string>());
    throw std::invalid_argument("mechanism: expected a number or a parameter name");
}

nlohmann::json ParamValue::to_json() const {
    if (is_ref) return ref;
    return value;
}

double ParamValue::resolve(const Expr::Env& params) const {
    if (!is_ref) return value;
    const auto it = params.find(ref);
    if (it == params.end())
        throw std::invalid_argument("mechanism: unbound parameter '" + ref + "'");
    return it->second;
}

namespace {

LatentSpec parse_latent(const nlohmann::json& j) {
    LatentSpec l;
    l.name = j.at("name").get<std::string>();
    const auto dist = j.at("dist").get<std::string>();
    if (dist == "gaussian") {
        l.dist = LatentSpec::Dist::kGaussian;
        l.a = ParamValue::parse(j.at("mu"));
        l.b = ParamValue::parse(j.at("sigma"));
    } else if (dist == "uniform") {
        l.dist = LatentSpec::Dist::kUniform;
        l.a = ParamValue::parse(j.at("lo"));
        l.b = ParamValue::parse(j.at("hi"));
    } else {
        throw std::invalid_argument("mechanism: unknown latent dist '" + dist + "'");
    }
    return l;
}

nlohmann::json latent_json(const LatentSpec& l) {
    nlohmann::json j{{"name", l.name}};
    if (l.dist == LatentSpec::Dist::kGaussian) {
        j["dist"] = "gaussian";
        j["mu"] = l.a.to_json();
        j["sigma"] = l.b.to_json();
    } else {
        j["dist"] = "uniform";
        j["lo"] = l.a.to_json();
        j["hi"] = l.b.to_json();
    }
    return j;
}

NoiseSpec parse_noise(const nlohmann::json& j) {
    NoiseSpec n;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "homoscedastic") {
        n.kind = NoiseSpec::Kind::kHomoscedastic;
        n.sigma = ParamValue::parse(j.at("sigma"));
    } else if (kind == "heteroscedastic") {
        n.kind = NoiseSpec::Kind::kHeteroscedastic;
        n.sigma = ParamValue::parse(j.at("scale"));
        n.feature_index = j.at("feature").get<int>();
    } else if (kind == "label_corruption") {
        n.kind = NoiseSpec::Kind::kLabelCorruption;
        n.sigma = ParamValue::parse(j.at("fraction"));
    } else {
        throw std::invalid_argument("mechanism: unknown noise kind '" + kind + "'");
    }
    return n;
}

nlohmann::json noise_json(const NoiseSpec& n) {
    switch (n.kind) {
        case NoiseSpec::Kind::kHomoscedastic:
            return {{"kind", "homoscedastic"}, {"sigma", n.sigma.to_json()}};
        case NoiseSpec::Kind::kHeteroscedastic:
            return {{"kind", "heteroscedastic"},
                    {"scale", n.sigma.to_json()},
                    {"feature", n.feature_index}};
        case NoiseSpec::Kind::kLabelCorruption:
            return {{"kind", "label_corruption"}, {"fraction", n.sigma.to_json()}};
    }
    throw std::logic_error("mechanism: bad noise kind");
}

SearchPolicy parse_policy(const nlohmann::json& j) {
    SearchPolicy p;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "first_in_box") {
        p.kind = SearchPolicy::Kind::kFirstInBox;
    } else if (kind == "nearest_center") {
        p.kind = SearchPolicy::Kind::kNearestCenter;
        p.bonus = j.value("bonus", 0.5);
    } else if (kind == "penalized") {
        p.kind = SearchPolicy::Kind::kPenalized;
        p.penalty = j.value("penalty", 1.0);
        p.y_weight = j.value("y_weight", 1.0);
    } else {
        throw std::invalid_argument("mechanism: unknown search policy '" + kind + "'");
    }
    return p;
}

nlohmann::json policy_json(const SearchPolicy& p) {
    switch (p.kind) {
        case SearchPolicy::Kind::kFirstInBox:
            return {{"kind", "first_in_box"}};
        case SearchPolicy::Kind::kNearestCenter:
            return {{"kind", "nearest_center"}, {"bonus", p.bonus}};
        case SearchPolicy::Kind::kPenalized:
            return {{"kind", "penalized"},
                    {"penalty", p.penalty},
                    {"y_weight", p.y_weight}};
    }
    throw std::logic_error("mechanism: bad policy kind");
}

void require_declared(const ParamValue& v, const std::set<std::string>& names,
                      const char* where) {
    if (v.is_ref && !names.count(v.ref))
        throw std::invalid_argument(std::string("mechanism: ") + where +
                                    " references undeclared parameter '" + v.ref + "'");
}

}  // namespace

MechanismSpec MechanismSpec::parse(const nlohmann::json& j) {
    MechanismSpec s;
    s.version = j.value("version", 1);
    s.n_rows = j.at("n_rows").get<int>();
    for (const auto& l : j.at("latents")) s.latents.push_back(parse_latent(l));
    for (const auto& f : j.at("observed_features")) {
        ObservedFeature of;
        of.name = f.at("name").get<std::string>();
        of.expr = Expr::parse(f.at("expr"));
        of.obs_noise = f.contains("obs_noise") ? ParamValue::parse(f.at("obs_noise"))
                                               : ParamValue::fixed(0.0);
        s.observed_features.push_back(std::move(of));
    }
    s.target_expr = Expr::parse(j.at("target_expr"));
    s.noise = parse_noise(j.at("noise"));
    s.distractor_count = j.contains("distractor_count")
                             ? ParamValue::parse(j.at("distractor_count"))
                             : ParamValue::fixed(0.0);
    if (j.contains("search")) {
        const auto& search = j.at("search");
        // Array form keeps grid declaration order explicit in the JSON.
        for (const auto& p : search.at("params")) {
            std::vector<double> values;
            for (const auto& v : p.at("values")) values.push_back(v.get<double>());
            s.params.emplace_back(p.at("name").get<std::string>(), std::move(values));
        }
        s.policy = parse_policy(search.at("policy"));
    }
    return s;
}

nlohmann::json MechanismSpec::to_json() const {
    nlohmann::json j;
    j["version"] = version;
    j["n_rows"] = n_rows;
    j["latents"] = nlohmann::json::array();
    for (const auto& l : latents) j["latents"].push_back(latent_json(l));
    j["observed_features"] = nlohmann::json::array();
    for (const auto& f : observed_features) {
        j["observed_features"].push_back({{"name", f.name},
                                          {"expr", f.expr.to_json()},
                                          {"obs_noise", f.obs_noise.to_json()}});
    }
    j["target_expr"] = target_expr.to_json();
    j["noise"] = noise_json(noise);
    j["distractor_count"] = distractor_count.to_json();
    nlohmann::json params = nlohmann::json::array();
    for (const auto& [name, values] : this->params)
        params.push_back({{"name", name}, {"values", values}});
    j["search"] = {{"params", std::move(params)}, {"policy", policy_json(policy)}};
    return j;
}

long MechanismSpec::candidate_count() const {
    long total = 1;
    for (const auto& [name, values] : params) {
        (void)name;
        total *= static_cast<long>(values.size());
        if (total > 10000) return total;  // caller reports the overflow
    }
    return total;
}

Expr::Env MechanismSpec::candidate_env(long index) const {
    // Mixed-radix decode; the first declared parameter varies slowest.
    Expr::Env env;
    long stride = candidate_count();
    for (const auto& [name, values] : params) {
        stride /= static_cast<long>(values.size());
        env[name] = values[static_cast<size_t>(index / stride)];
        index %= stride;
    }
    return env;
}

void MechanismSpec::validate() const {
    if (n_rows < 10) throw std::invalid_argument("mechanism: n_rows must be >= 10");
    std::set<std::string> latent_names, param_names, feature_names;
    for (const auto& l : latents)
        if (!latent_names.insert(l.name).second)
            throw std::invalid_argument("mechanism: duplicate latent '" + l.name + "'");
    for (const auto& [name, values] : params) {
        if (values.empty())
            throw std::invalid_argument("mechanism: empty value list for '" + name + "'");
        if (!param_names.insert(name).second)
            throw std::invalid_argument("mechanism: duplicate parameter '" + name + "'");
    }
    if (candidate_count() > 10000)
        throw std::invalid_argument("mechanism: candidate grid exceeds 10000");

    auto check_expr = [&](const Expr& e, const char* where) {
        std::set<std::string> vars, refs;
        e.collect_vars(vars);
        e.collect_params(refs);
        for (const auto& v : vars)
            if (!latent_names.count(v))
                throw std::invalid_argument(std::string("mechanism: ") + where +
                                            " references undeclared latent '" + v + "'");
        for (const auto& r : refs)
            if (!param_names.count(r))
                throw std::invalid_argument(std::string("mechanism: ") + where +
                                            " references undeclared parameter '" + r +
                                            "'");
    };
    for (const auto& l : latents) {
        require_declared(l.a, param_names, "latent");
        require_declared(l.b, param_names, "latent");
    }
    for (const auto& f : observed_features) {
        if (!feature_names.insert(f.name).second)
            throw std::invalid_argument("mechanism: duplicate feature '" + f.name + "'");
        check_expr(f.expr, "observed feature");
        require_declared(f.obs_noise, param_names, "obs_noise");
    }
    check_expr(target_expr, "target");
    require_declared(noise.sigma, param_names, "noise");
    require_declared(distractor_count, param_names, "distractor_count");
    if (noise.kind == NoiseSpec::Kind::kHeteroscedastic &&
        (noise.feature_index < 0 ||
         noise.feature_index >= static_cast<int>(observed_features.size())))
        throw std::invalid_argument("mechanism: heteroscedastic feature index out of range");
}

Dataset build_dataset(const MechanismSpec& spec, const Expr::Env& params,
                      std::uint64_t seed) {
    SeededRng rng(seed);
    const int n = spec.n_rows;
    const int d_obs = static_cast<int>(spec.observed_features.size());
    const int d_noise = std::max(0, static_cast<int>(
                                        std::llround(spec.distractor_count.resolve(params))));

    Dataset out;
    out.features.resize(n, d_obs + d_noise);
    out.target.resize(n);

    for (int i = 0; i < n; ++i) {
        Expr::Env env = params;
        for (const auto& l : spec.latents) {
            const double a = l.a.resolve(params), b = l.b.resolve(params);
            env[l.name] = l.dist == LatentSpec::Dist::kGaussian ? rng.gaussian(a, b)
                                                                : rng.uniform(a, b);
        }
        for (int f = 0; f < d_obs; ++f) {
            const auto& of = spec.observed_features[static_cast<size_t>(f)];
            double v = of.expr.eval(env);
            const double s = of.obs_noise.resolve(params);
            if (s != 0.0) v += rng.gaussian(0.0, s);
            out.features(i, f) = v;
        }
        double y = spec.target_expr.eval(env);
        switch (spec.noise.kind) {
            case NoiseSpec::Kind::kHomoscedastic:
                y += rng.gaussian(0.0, spec.noise.sigma.resolve(params));
                break;
            case NoiseSpec::Kind::kHeteroscedastic:
                y += rng.gaussian(0.0, spec.noise.sigma.resolve(params) *
                                           std::fabs(out.features(i, spec.noise.feature_index)));
                break;
            case NoiseSpec::Kind::kLabelCorruption:
                break;  // applied as a pass after all rows exist
        }
        out.target(i) = y;
    }

    if (spec.noise.kind == NoiseSpec::Kind::kLabelCorruption && n > 1) {
        // A fraction of rows receive another row's (pre-corruption) label.
        const double fraction = spec.noise.sigma.resolve(params);
        const Vector original = out.target;
        for (int i = 0; i < n; ++i) {
            if (rng.uniform() < fraction) {
                std::uint64_t j = rng.below(static_cast<std::uint64_t>(n - 1));
                if (static_cast<int>(j) >= i) ++j;  // donor != row
                out.target(i) = original(static_cast<Eigen::Index>(j));
            }
        }
    }

    for (int i = 0; i < n; ++i)
        for (int f = 0; f < d_noise; ++f)
            out.features(i, d_obs + f) = rng.gaussian();

    out.column_names.reserve(static_cast<size_t>(d_obs + d_noise));
    for (const auto& f : spec.observed_features) out.column_names.push_back(f.name);
    for (int f = 0; f < d_noise; ++f)
        out.column_names.push_back("noise_" + std::to_string(f));
    out.validate();
    return out;
}

std::pair<double, double> evaluate_xy(const Dataset& d) {
    const int n = static_cast<int>(d.rows());
    if (n < 10) throw std::invalid_argument("evaluate_xy: need at least 10 rows");
    const FoldAssignment folds = eval_harness_splitter(d.target);

    double x_sum = 0.0, y_sum = 0.0;
    for (int f = 0; f < folds.k; ++f) {
        const auto train_idx = folds.train_indices(f);
        const auto test_idx = folds.test_indices(f);
        Matrix train_x(train_idx.size(), d.cols()), test_x(test_idx.size(), d.cols());
        Vector train_y(train_idx.size()), test_y(test_idx.size());
        for (size_t i = 0; i < train_idx.size(); ++i) {
            train_x.row(static_cast<Eigen::Index>(i)) = d.features.row(train_idx[i]);
            train_y(static_cast<Eigen::Index>(i)) = d.target(train_idx[i]);
        }
        for (size_t i = 0; i < test_idx.size(); ++i) {
            test_x.row(static_cast<Eigen::Index>(i)) = d.features.row(test_idx[i]);
            test_y(static_cast<Eigen::Index>(i)) = d.target(test_idx[i]);
        }

        const KnnModel knn = fit_knn(train_x, train_y, 5, KnnWeighting::kUniform);
        const double x = r2_score(test_y, knn_predict(knn, test_x));
        const LinearModel ols = fit_ols(train_x, train_y);
        const double y = r2_score(test_y, ols.predict(test_x));
        x_sum += std::clamp(x, -1.0, 1.0);
        y_sum += std::clamp(y, -1.0, 1.0);
    }
    return {x_sum / folds.k, y_sum / folds.k};
}

ExecutionResult execute_mechanism(const MechanismSpec& spec, std::uint64_t seed,
                                  const TargetCell& cell) {
    spec.validate();
    const long total = spec.candidate_count();

    ExecutionResult best;
    double best_cost = std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (long c = 0; c < total; ++c) {
        const Expr::Env env = spec.candidate_env(c);
        Dataset data = build_dataset(spec, env, mix_seed(seed, static_cast<std::uint64_t>(c)));
        const auto [x, y] = evaluate_xy(data);
        const bool in_box = cell.contains(x, y);

        double cost = 0.0;
        const double dx = x - cell.x_center, dy = y - cell.y_center;
        switch (spec.policy.kind) {
            case SearchPolicy::Kind::kFirstInBox:
                cost = dx * dx + dy * dy;  // fallback ranking when nothing lands in-box
                break;
            case SearchPolicy::Kind::kNearestCenter:
                cost = dx * dx + dy * dy;
                if (in_box) cost *= spec.policy.bonus;
                break;
            case SearchPolicy::Kind::kPenalized:
                cost = dx * dx + spec.policy.y_weight * dy * dy +
                       (in_box ? 0.0 : spec.policy.penalty);
                break;
        }

        const bool short_circuit =
            spec.policy.kind == SearchPolicy::Kind::kFirstInBox && in_box;
        if (short_circuit || !have_best || cost < best_cost) {
            have_best = true;
            best_cost = cost;
            best.data = std::move(data);
            best.x_score = x;
            best.y_score = y;
            best.chosen_params = env;
            best.candidate_index = c;
        }
        best.candidates_scored = c + 1;
        if (short_circuit) break;  // first in-box candidate wins outright
    }
    return best;
}

}  // namespace mws
