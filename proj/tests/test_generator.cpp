#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mws/grid.hpp"
#include "mws/mechanism.hpp"
#include "mws/rng.hpp"
#include "test_util.hpp"

using namespace mws;
using nlohmann::json;

namespace {

MechanismSpec weak_linear_spec(double beta, double sigma, int distractors,
                               int n_rows) {
    MechanismSpec s;
    s.n_rows = n_rows;
    s.latents = {{"z", LatentSpec::Dist::kGaussian, ParamValue::fixed(0.0),
                  ParamValue::fixed(1.0)}};
    s.observed_features = {
        {"x0", Expr::parse(json{"var", "z"}), ParamValue::fixed(0.0)}};
    s.target_expr =
        Expr::parse(json{"mul", {"const", beta}, {"var", "z"}});
    s.noise.kind = NoiseSpec::Kind::kHomoscedastic;
    s.noise.sigma = ParamValue::fixed(sigma);
    s.distractor_count = ParamValue::fixed(distractors);
    return s;
}

}  // namespace

TEST_CASE("grid_cells intervals and centers") {
    const auto cells = grid_cells(7);
    REQUIRE(cells.size() == 49);
    const TargetCell& edge = cells[0 * 7 + 6];  // ii=0, jj=6
    CHECK(edge.x_lo == doctest::Approx(6.0 / 7).epsilon(1e-12));
    CHECK(edge.x_hi == doctest::Approx(1.0));
    const TargetCell& mid = cells[2 * 7 + 3];  // ii=2, jj=3
    CHECK(mid.x_center == doctest::Approx(0.5));
    CHECK(mid.y_center == doctest::Approx(2.5 / 7));

    const auto four = grid_cells(2);
    REQUIRE(four.size() == 4);
    CHECK(four[0].x_center == doctest::Approx(0.25));
    CHECK(four[0].y_center == doctest::Approx(0.25));
    CHECK(four[3].x_center == doctest::Approx(0.75));
    CHECK(four[3].y_center == doctest::Approx(0.75));

    CHECK_THROWS(grid_cells(1));
}

TEST_CASE("cell id and six-decimal description") {
    const auto cells = grid_cells(7);
    const TargetCell& c = cells[2 * 7 + 3];
    CHECK(c.id() == "cell_02_03");
    const std::string desc = c.description();
    CHECK(desc.find("0.428571") != std::string::npos);
    CHECK(desc.find("0.571429") != std::string::npos);
    CHECK(desc.find("0.285714") != std::string::npos);
    CHECK(desc.find("0.500000") != std::string::npos);
    CHECK(desc.find("0.357143") != std::string::npos);
}

TEST_CASE("cell_of boundary rules") {
    CHECK(cell_of(7, 0.0, 0.0).id() == "cell_00_00");
    // Interior boundary goes to the lower-index cell.
    const TargetCell b = cell_of(7, 1.0 / 7, 0.5);
    CHECK(b.jj == 0);
    // 1.0 maps into the last bin, not out of range.
    const TargetCell top = cell_of(7, 1.0, 1.0);
    CHECK(top.ii == 6);
    CHECK(top.jj == 6);
    // Every score pair is inside the cell it maps to (closed box).
    SeededRng rng(2);
    for (int t = 0; t < 200; ++t) {
        const double x = rng.uniform(), y = rng.uniform();
        CHECK(cell_of(5, x, y).contains(x, y));
    }
}

TEST_CASE("in-box example from a mid-grid cell") {
    const TargetCell c = grid_cells(7)[2 * 7 + 3];
    CHECK(c.contains(0.432, 0.401));
    CHECK(!c.contains(0.6, 0.401));
}

TEST_CASE("expression ops evaluate correctly") {
    Expr::Env env{{"x", 0.5}, {"p", 2.0}};
    auto ev = [&](const json& j) { return Expr::parse(j).eval(env); };
    CHECK(ev(json{"const", 3.5}) == doctest::Approx(3.5));
    CHECK(ev(json{"var", "x"}) == doctest::Approx(0.5));
    CHECK(ev(json{"param", "p"}) == doctest::Approx(2.0));
    CHECK(ev(json{"add", {"var", "x"}, {"param", "p"}}) == doctest::Approx(2.5));
    CHECK(ev(json{"sub", {"const", 1.0}, {"var", "x"}}) == doctest::Approx(0.5));
    CHECK(ev(json{"mul", {"var", "x"}, {"param", "p"}}) == doctest::Approx(1.0));
    CHECK(ev(json{"sin", {"var", "x"}}) == doctest::Approx(std::sin(0.5)));
    CHECK(ev(json{"cos", {"var", "x"}}) == doctest::Approx(std::cos(0.5)));
    CHECK(ev(json{"abs", {"const", -2.0}}) == doctest::Approx(2.0));
    CHECK(ev(json{"square", {"param", "p"}}) == doctest::Approx(4.0));
    CHECK(ev(json{"radial", {"param", "p"}}) == doctest::Approx(std::exp(-4.0)));
    CHECK(ev(json{"hinge", {"var", "x"}, 0.2}) == doctest::Approx(0.3));
    CHECK(ev(json{"hinge", {"var", "x"}, 0.9}) == doctest::Approx(0.0));
    CHECK(ev(json{"select", {"var", "x"}, {"const", 1.0}, {"const", -1.0}}) ==
          doctest::Approx(1.0));
    CHECK(ev(json{"select", {"const", -0.1}, {"const", 1.0}, {"const", -1.0}}) ==
          doctest::Approx(-1.0));
}

TEST_CASE("expression parsing round-trips and rejects malformed input") {
    const json j = {"add",
                    {"mul", {"param", "amp"}, {"sin", {"var", "x0"}}},
                    {"hinge", {"var", "x1"}, 0.25}};
    const Expr e = Expr::parse(j);
    CHECK(e.to_json() == j);
    std::set<std::string> vars, params;
    e.collect_vars(vars);
    e.collect_params(params);
    CHECK(vars == std::set<std::string>{"x0", "x1"});
    CHECK(params == std::set<std::string>{"amp"});

    CHECK_THROWS(Expr::parse(json{"nosuchop", {"const", 1.0}}));
    CHECK_THROWS(Expr::parse(json{"add", {"const", 1.0}}));  // arity
    CHECK_THROWS(Expr::parse(json::object()));
    CHECK_THROWS(Expr::parse(json{"var", 12}));
}

TEST_CASE("expression eval requires bound names") {
    const Expr e = Expr::parse(json{"var", "missing"});
    CHECK_THROWS(e.eval(Expr::Env{}));
}

TEST_CASE("ParamValue parses numbers and references") {
    const ParamValue fixed = ParamValue::parse(json(1.5));
    CHECK(!fixed.is_ref);
    CHECK(fixed.resolve({}) == doctest::Approx(1.5));
    const ParamValue ref = ParamValue::parse(json("sigma"));
    CHECK(ref.is_ref);
    CHECK(ref.resolve({{"sigma", 0.3}}) == doctest::Approx(0.3));
    CHECK_THROWS(ref.resolve({}));
    CHECK(ParamValue::parse(fixed.to_json()).value == fixed.value);
    CHECK(ParamValue::parse(ref.to_json()).ref == "sigma");
}

TEST_CASE("MechanismSpec JSON round-trip is exact") {
    MechanismSpec s = weak_linear_spec(2.0, 1.0, 5, 50);
    s.params = {{"a", {1, 2}}, {"b", {10, 20, 30}}};
    s.policy = {SearchPolicy::Kind::kPenalized, 0.5, 10.0, 1.3};
    const json j = s.to_json();
    const MechanismSpec back = MechanismSpec::parse(j);
    CHECK(back.to_json() == j);
    CHECK(back.n_rows == 50);
    CHECK(back.params.size() == 2);
    CHECK(back.policy.kind == SearchPolicy::Kind::kPenalized);
}

TEST_CASE("candidate enumeration: first parameter varies slowest") {
    MechanismSpec s = weak_linear_spec(1.0, 1.0, 0, 50);
    s.params = {{"a", {1, 2}}, {"b", {10, 20, 30}}};
    CHECK(s.candidate_count() == 6);
    CHECK(s.candidate_env(0) == Expr::Env{{"a", 1}, {"b", 10}});
    CHECK(s.candidate_env(1) == Expr::Env{{"a", 1}, {"b", 20}});
    CHECK(s.candidate_env(3) == Expr::Env{{"a", 2}, {"b", 10}});
    CHECK(s.candidate_env(5) == Expr::Env{{"a", 2}, {"b", 30}});
    // Empty search block: exactly one candidate with an empty environment.
    MechanismSpec none = weak_linear_spec(1.0, 1.0, 0, 50);
    CHECK(none.candidate_count() == 1);
    CHECK(none.candidate_env(0).empty());
}

TEST_CASE("MechanismSpec validation failures") {
    MechanismSpec s = weak_linear_spec(1.0, 1.0, 0, 50);
    CHECK_NOTHROW(s.validate());

    MechanismSpec tiny = s;
    tiny.n_rows = 9;
    CHECK_THROWS(tiny.validate());

    MechanismSpec undeclared = s;
    undeclared.target_expr = Expr::parse(json{"var", "ghost"});
    CHECK_THROWS(undeclared.validate());

    MechanismSpec empty_values = s;
    empty_values.params = {{"a", {}}};
    CHECK_THROWS(empty_values.validate());

    MechanismSpec huge = s;
    std::vector<double> many(22);
    std::iota(many.begin(), many.end(), 0.0);
    huge.params = {{"a", many}, {"b", many}, {"c", many}};  // 22^3 > 10000
    CHECK_THROWS(huge.validate());
}

TEST_CASE("build_dataset shape, determinism, and distractor block") {
    const MechanismSpec s = weak_linear_spec(2.0, 0.5, 3, 60);
    const Dataset a = build_dataset(s, {}, 42);
    const Dataset b = build_dataset(s, {}, 42);
    CHECK(a.rows() == 60);
    CHECK(a.cols() == 1 + 3);
    CHECK(a.column_names[0] == "x0");
    CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.target - b.target).cwiseAbs().maxCoeff() == 0.0);
    const Dataset c = build_dataset(s, {}, 43);
    CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("label corruption replaces labels with other rows' clean labels") {
    MechanismSpec s = weak_linear_spec(2.0, 0.0, 0, 40);
    s.noise.kind = NoiseSpec::Kind::kLabelCorruption;
    // Fraction 0 keeps the pre-corruption labels: the clean baseline.
    s.noise.sigma = ParamValue::fixed(0.0);
    const Dataset clean = build_dataset(s, {}, 7);
    s.noise.sigma = ParamValue::fixed(1.0);  // corrupt every row
    const Dataset corrupted = build_dataset(s, {}, 7);
    int moved = 0;
    for (Eigen::Index i = 0; i < 40; ++i) {
        bool found = false;
        for (Eigen::Index j = 0; j < 40 && !found; ++j)
            found = (j != i && corrupted.target(i) == clean.target(j));
        CHECK(found);
        if (corrupted.target(i) != clean.target(i)) ++moved;
    }
    CHECK(moved > 0);
}

TEST_CASE("evaluate_xy determinism, permutation invariance, and sanity") {
    // Linear single-feature data: the OLS landmarker is near-perfect.
    SeededRng rng(11);
    Dataset lin;
    lin.features.resize(100, 1);
    lin.target.resize(100);
    for (int i = 0; i < 100; ++i) {
        lin.features(i, 0) = rng.uniform(-1.0, 1.0);
        lin.target(i) = lin.features(i, 0);
    }
    lin.column_names = {"x"};
    auto [x1, y1] = evaluate_xy(lin);
    CHECK(y1 > 0.99);
    CHECK(x1 > 0.95);

    // Permuting rows leaves the scores unchanged.
    Dataset perm = lin;
    for (int i = 0; i < 50; ++i) {
        perm.features.row(i).swap(perm.features.row(99 - i));
        std::swap(perm.target(i), perm.target(99 - i));
    }
    auto [x2, y2] = evaluate_xy(perm);
    CHECK(x2 == doctest::Approx(x1).epsilon(1e-12));
    CHECK(y2 == doctest::Approx(y1).epsilon(1e-12));

    // Centered V-shape: KNN sees it, the linear fit does not.
    SeededRng vr(12);
    Dataset vee;
    vee.features.resize(200, 1);
    vee.target.resize(200);
    for (int i = 0; i < 200; ++i) {
        const double z = vr.uniform(-1.0, 1.0);
        vee.features(i, 0) = z;
        vee.target(i) = std::fabs(z) - 0.5 + 0.02 * z;
    }
    vee.column_names = {"x"};
    auto [xv, yv] = evaluate_xy(vee);
    CHECK(xv - yv > 0.4);

    Dataset small = testutil::random_dataset(9, 1, 1);
    CHECK_THROWS(evaluate_xy(small));
}

TEST_CASE("execute_mechanism is deterministic and hits the M3 population band") {
    const TargetCell any = grid_cells(2)[0];
    const MechanismSpec s = weak_linear_spec(3.2, 2.0, 40, 200);
    const ExecutionResult a = execute_mechanism(s, 5, any);
    const ExecutionResult b = execute_mechanism(s, 5, any);
    CHECK((a.data.features - b.data.features).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.x_score == b.x_score);
    CHECK(a.y_score == b.y_score);

    // beta^2/(beta^2 + sigma^2) = 10.24/14.24 ~= 0.719.
    double lr_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ExecutionResult r = execute_mechanism(s, seed, any);
        CHECK(r.y_score == doctest::Approx(0.719).epsilon(0.21));
        CHECK(r.x_score < 0.3);
        lr_sum += r.y_score;
    }
    CHECK(lr_sum / 5.0 == doctest::Approx(0.719).epsilon(0.15));
}

TEST_CASE("search policies rank candidates as documented") {
    // Parameter sweeps the noise level: higher sigma lowers both scores.
    MechanismSpec s = weak_linear_spec(2.0, 0.0, 0, 120);
    s.noise.sigma = ParamValue::param("sigma");
    s.params = {{"sigma", {0.1, 0.8, 2.5, 8.0}}};

    // nearest_center: pick the candidate closest to the cell center.
    const TargetCell mid = cell_of(3, 0.5, 0.55);
    s.policy = {SearchPolicy::Kind::kNearestCenter, 0.2, 1.0, 1.0};
    const ExecutionResult nc = execute_mechanism(s, 3, mid);
    CHECK(nc.candidates_scored == 4);
    double best = 1e9;
    long best_idx = -1;
    for (long i = 0; i < 4; ++i) {
        const Dataset d = build_dataset(s, s.candidate_env(i), mix_seed(3, i));
        auto [x, y] = evaluate_xy(d);
        double cost = (x - mid.x_center) * (x - mid.x_center) +
                      (y - mid.y_center) * (y - mid.y_center);
        if (mid.contains(x, y)) cost *= 0.2;
        if (cost < best) {
            best = cost;
            best_idx = i;
        }
    }
    CHECK(nc.candidate_index == best_idx);

    // first_in_box short-circuits on the first in-box candidate.
    const TargetCell easy = cell_of(3, 0.9, 0.95);  // high cell: sigma=0.1 hits
    s.policy = {SearchPolicy::Kind::kFirstInBox, 0.5, 1.0, 1.0};
    const ExecutionResult fib = execute_mechanism(s, 3, easy);
    if (easy.contains(fib.x_score, fib.y_score))
        CHECK(fib.candidates_scored <= 4);

    // penalized: out-of-box candidates carry the additive penalty.
    s.policy = {SearchPolicy::Kind::kPenalized, 0.5, 10.0, 1.3};
    const ExecutionResult pen = execute_mechanism(s, 3, mid);
    CHECK(pen.candidates_scored == 4);
    CHECK(pen.candidate_index >= 0);
}
