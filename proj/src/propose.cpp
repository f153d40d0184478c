#include "mws/propose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mws {

nlohmann::json AttemptRecord::to_json() const {
    nlohmann::json j;
    j["cell_id"] = cell_id;
    j["attempt"] = attempt;
    j["mechanism_brief"] = mechanism_brief;
    j["spec"] = proposal_failed ? nlohmann::json() : spec.to_json();
    j["achieved"] = {{"x_score", x_score}, {"y_score", y_score}};
    j["accepted"] = accepted;
    j["proposal_failed"] = proposal_failed;
    j["slot"] = slot;
    j["seed"] = seed;
    j["timings_ms"] = {{"propose", propose_ms}, {"execute", execute_ms}};
    if (tokens_in >= 0)
        j["tokens"] = {{"in", tokens_in}, {"out", tokens_out}};
    else
        j["tokens"] = nullptr;
    return j;
}

AttemptRecord AttemptRecord::from_json(const nlohmann::json& j) {
    AttemptRecord r;
    r.cell_id = j.at("cell_id").get<std::string>();
    r.attempt = j.at("attempt").get<int>();
    r.mechanism_brief = j.at("mechanism_brief").get<std::string>();
    r.proposal_failed = j.value("proposal_failed", false);
    if (!r.proposal_failed) r.spec = MechanismSpec::parse(j.at("spec"));
    r.x_score = j.at("achieved").at("x_score").get<double>();
    r.y_score = j.at("achieved").at("y_score").get<double>();
    r.accepted = j.at("accepted").get<bool>();
    r.slot = j.value("slot", -1);
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("timings_ms")) {
        r.propose_ms = j["timings_ms"].value("propose", 0.0);
        r.execute_ms = j["timings_ms"].value("execute", 0.0);
    }
    if (j.contains("tokens") && !j["tokens"].is_null()) {
        r.tokens_in = j["tokens"].value("in", -1L);
        r.tokens_out = j["tokens"].value("out", -1L);
    }
    return r;
}

namespace {

Expr E(const nlohmann::json& j) { return Expr::parse(j); }

std::vector<double> around(double center, std::initializer_list<double> factors) {
    std::vector<double> v;
    for (double f : factors) v.push_back(center * f);
    return v;
}

// Cumulative repair dials derived from the full non-accepted history: every
// miss nudges the curvature amplitude against the x-delta and the distractor
// count against an x overshoot (the two documented repair dials), plus the
// linear coefficient against the y-delta.
struct RepairDials {
    double amp = 1.0;  // multiplies the curvature-amplitude grid
    double lin = 1.0;  // multiplies the linear-coefficient grid
    int distractor_shift = 0;
};

RepairDials repair_dials(const TargetCell& cell,
                         const std::vector<AttemptRecord>& history) {
    RepairDials d;
    for (const auto& r : history) {
        if (r.accepted || r.proposal_failed) continue;
        const double dx = r.x_score - cell.x_center;
        const double dy = r.y_score - cell.y_center;
        // Smallest effective change: scale against the delta, capped per step.
        d.amp *= std::exp(std::clamp(-1.2 * dx, -0.5, 0.5));
        d.lin *= std::exp(std::clamp(-1.2 * dy, -0.5, 0.5));
        if (dx > 0.05)
            ++d.distractor_shift;  // overshot x: add distractors to lower it
        else if (dx < -0.05)
            --d.distractor_shift;
    }
    d.amp = std::clamp(d.amp, 0.1, 10.0);
    d.lin = std::clamp(d.lin, 0.1, 10.0);
    return d;
}

std::vector<double> distractor_grid(std::vector<double> base, int shift, double lo,
                                    double hi) {
    for (auto& v : base) v = std::clamp(v * std::pow(1.6, shift), lo, hi);
    for (auto& v : base) v = std::round(v);
    return base;
}

// Shared additive-mixture recipe: y = lin*z0 + amp*sin(2.2*z1) + sigma*eps,
// features carry the latents directly, plus iid gaussian distractors. The
// caller fills in the distractor grid.
MechanismSpec additive_spec(double lin_c, double amp_c, double sigma_c, int n_rows) {
    MechanismSpec s;
    s.n_rows = n_rows;
    s.latents = {{"z0", LatentSpec::Dist::kGaussian, ParamValue::fixed(0.0),
                  ParamValue::fixed(1.0)},
                 {"z1", LatentSpec::Dist::kUniform, ParamValue::fixed(-3.0),
                  ParamValue::fixed(3.0)}};
    s.observed_features = {{"x0", E({"var", "z0"}), ParamValue::fixed(0.0)},
                           {"x1", E({"var", "z1"}), ParamValue::fixed(0.0)}};
    s.target_expr = E({"add",
                       {"mul", {"param", "lin"}, {"var", "z0"}},
                       {"mul",
                        {"param", "amp"},
                        {"sin", {"mul", {"const", 2.2}, {"var", "z1"}}}}});
    s.noise.kind = NoiseSpec::Kind::kHomoscedastic;
    s.noise.sigma = ParamValue::param("sigma");
    s.distractor_count = ParamValue::param("d_noise");
    s.params = {{"lin", around(lin_c, {0.8, 1.0, 1.25})},
                {"amp", around(amp_c, {0.7, 1.0, 1.45})},
                {"sigma", around(sigma_c, {0.8, 1.0, 1.3})},
                {"d_noise", {0}}};
    return s;
}

std::string format_brief(const char* fmt, const TargetCell& cell) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), fmt, cell.x_center, cell.y_center);
    return buf;
}

}  // namespace

Proposal deterministic_propose(const TargetCell& cell, int attempt_index,
                               const std::vector<AttemptRecord>& history) {
    (void)attempt_index;
    const double cx = cell.x_center, cy = cell.y_center;
    const RepairDials dials = repair_dials(cell, history);

    Proposal p;

    if (cx <= 0.3 && cy <= 0.3) {
        // Near-noise corner: both landmarkers should barely beat the mean.
        const double lin = std::sqrt(std::max(cy, 0.01)) * dials.lin;
        const double amp = std::sqrt(2.0 * std::max(cx - cy, 0.015)) * dials.amp;
        MechanismSpec s = additive_spec(lin, amp, std::sqrt(0.9), 200);
        s.params[3].second = distractor_grid({2, 5}, dials.distractor_shift, 0, 12);
        s.policy = {SearchPolicy::Kind::kNearestCenter, 0.2, 1.0, 1.0};
        p.spec = std::move(s);
        p.family = "M5";
        p.mechanism_brief = format_brief(
            "M5 near-noise target: tiny linear and sinusoidal components buried in "
            "dominant gaussian noise so both landmarkers stay near (%.3f, %.3f).",
            cell);
        return p;
    }

    if (cy - cx >= 0.2) {
        // LR-favouring region: one weak linear signal drowned in distractors.
        const double beta_c = 1.9 * dials.lin;
        MechanismSpec s;
        s.n_rows = 160;
        s.latents = {{"z0", LatentSpec::Dist::kGaussian, ParamValue::fixed(0.0),
                      ParamValue::fixed(1.0)}};
        s.observed_features = {{"x0", E({"var", "z0"}), ParamValue::fixed(0.0)}};
        s.target_expr = E({"mul", {"param", "beta"}, {"var", "z0"}});
        s.noise.kind = NoiseSpec::Kind::kHomoscedastic;
        s.noise.sigma = ParamValue::param("sigma");
        s.distractor_count = ParamValue::param("d_noise");
        // sigma chosen so beta^2/(beta^2+sigma^2) brackets the y target.
        const double ratio = std::clamp(cy * 1.15, 0.1, 0.93);
        const double sigma_c = beta_c * std::sqrt((1.0 - ratio) / ratio);
        // High x targets need far fewer distractors than the curse-of-
        // dimensionality corner.
        std::vector<double> d_base = cx > 0.35 ? std::vector<double>{1, 3, 6, 12}
                                               : std::vector<double>{20, 30, 45, 70};
        const double d_lo = cx > 0.35 ? 0 : 20;
        s.params = {{"beta", around(beta_c, {0.8, 1.0, 1.3})},
                    {"sigma", around(sigma_c, {0.75, 0.95, 1.2, 1.55})},
                    {"d_noise",
                     distractor_grid(std::move(d_base), dials.distractor_shift, d_lo, 90)}};
        s.policy = {SearchPolicy::Kind::kFirstInBox, 0.5, 1.0, 1.0};
        p.spec = std::move(s);
        p.family = "M3";
        p.mechanism_brief = format_brief(
            "M3 weak linear signal plus nuisance block: one moderately predictive "
            "linear feature among many gaussian distractors; distance concentration "
            "pulls KNN toward %.3f while the linear fit holds near %.3f.",
            cell);
        return p;
    }

    if (cx - cy >= 0.2) {
        if (cx >= 0.75) {
            // Strong KNN edge: centred V-shape with a small linear tilt.
            const double a_abs = std::sqrt(12.0 * std::max(cx - cy, 0.1)) * dials.amp;
            const double a_lin = std::sqrt(3.0 * std::max(cy, 0.01)) * dials.lin;
            MechanismSpec s;
            s.n_rows = 280;
            s.latents = {{"z", LatentSpec::Dist::kUniform, ParamValue::fixed(-1.0),
                          ParamValue::fixed(1.0)}};
            s.observed_features = {{"x0", E({"var", "z"}), ParamValue::param("x_noise")}};
            s.target_expr =
                E({"add",
                   {"mul", {"param", "a_abs"}, {"sub", {"abs", {"var", "z"}}, {"const", 0.5}}},
                   {"mul", {"param", "a_lin"}, {"var", "z"}}});
            s.noise.kind = NoiseSpec::Kind::kHomoscedastic;
            s.noise.sigma = ParamValue::param("sigma");
            s.distractor_count = ParamValue::param("d_noise");
            s.params = {{"a_abs", around(a_abs, {0.8, 1.0, 1.25})},
                        {"a_lin", around(a_lin, {0.8, 1.0, 1.25})},
                        {"sigma", around(0.08 * a_abs, {0.6, 1.0, 1.6})},
                        {"x_noise", {0.0, 0.03}},
                        {"d_noise",
                         distractor_grid({1, 2}, dials.distractor_shift, 0, 3)}};
            s.policy = {SearchPolicy::Kind::kPenalized, 0.5, 10.0, 1.3};
            p.spec = std::move(s);
            p.family = "M6";
            p.mechanism_brief = format_brief(
                "M6 piecewise V-shape: dominant absolute-value response in one "
                "feature with a small linear tilt and a couple of irrelevant "
                "features; KNN tracks the kink toward %.3f while the linear fit "
                "stays near %.3f.",
                cell);
            return p;
        }
        // Moderate curvature: sinusoid-dominant additive recipe.
        const double lin = std::sqrt(std::max(cy, 0.01)) * dials.lin;
        const double amp = std::sqrt(2.0 * std::max(cx - cy, 0.05) * 1.5) * dials.amp;
        const double sigma = std::sqrt(std::max(1.0 - cx * 1.15, 0.05));
        MechanismSpec s = additive_spec(lin, amp, sigma, 220);
        s.params[3].second = distractor_grid({1, 2}, dials.distractor_shift, 0, 3);
        s.policy = {SearchPolicy::Kind::kNearestCenter, 0.2, 1.0, 1.0};
        p.spec = std::move(s);
        p.family = "M2";
        p.mechanism_brief = format_brief(
            "M2 smooth nonlinear: y is mainly a sinusoid of one feature with a "
            "weak linear backbone and almost no distractors, steering KNN to "
            "%.3f and the linear fit to %.3f.",
            cell);
        return p;
    }

    // Diagonal: additive mixture giving both models partial signal.
    const double lin = std::sqrt(std::max(cy, 0.01) * 1.1) * dials.lin;
    const double amp = std::sqrt(2.0 * std::max(cx - cy, 0.02) * 1.5) * dials.amp;
    const double sigma = std::sqrt(std::max(1.0 - cx * 1.1, 0.05));
    MechanismSpec s = additive_spec(lin, amp, sigma, 220);
    s.params[3].second = distractor_grid({3, 6}, dials.distractor_shift, 0, 12);
    s.policy = {SearchPolicy::Kind::kNearestCenter, 0.2, 1.0, 1.0};
    p.spec = std::move(s);
    p.family = "M1";
    p.mechanism_brief = format_brief(
        "M1 additive mixture: a global linear trend plus a smooth local sinusoid "
        "and a few nuisance dimensions, balancing KNN near %.3f against the "
        "linear fit near %.3f.",
        cell);
    return p;
}

Proposal DeterministicProposer::propose(const TargetCell& cell, int attempt_index,
                                        const std::vector<AttemptRecord>& history) {
    Proposal p = deterministic_propose(cell, attempt_index, history);
    if (max_rows_ > 0)
        p.spec.n_rows = std::min(p.spec.n_rows, std::max(max_rows_, 10));
    return p;
}

}  // namespace mws
