#include <doctest.h>

#include <filesystem>

#include "mws/llm_client.hpp"
#include "mws/propose.hpp"
#include "mws/runner.hpp"
#include "test_util.hpp"

using namespace mws;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Emits a spec whose target is plain noise, so scores sit near the origin and
// never land in a high cell.
class HopelessProposer : public Proposer {
public:
    Proposal propose(const TargetCell&, int, const std::vector<AttemptRecord>&) override {
        Proposal p;
        MechanismSpec s;
        s.n_rows = 40;
        s.latents = {{"z", LatentSpec::Dist::kGaussian, ParamValue::fixed(0.0),
                      ParamValue::fixed(1.0)}};
        s.observed_features = {
            {"x0", Expr::parse(json{"var", "z"}), ParamValue::fixed(0.0)}};
        s.target_expr = Expr::parse(json{"const", 0.0});
        s.noise.sigma = ParamValue::fixed(1.0);
        p.spec = std::move(s);
        p.mechanism_brief = "pure noise";
        return p;
    }
    std::string backend_id() const override { return "hopeless"; }
};

class AbortingProposer : public Proposer {
public:
    Proposal propose(const TargetCell& cell, int attempt_index,
                     const std::vector<AttemptRecord>& history) override {
        if (attempt_index >= 2) throw std::runtime_error("backend down");
        return hopeless_.propose(cell, attempt_index, history);
    }
    std::string backend_id() const override { return "aborting"; }

private:
    HopelessProposer hopeless_;
};

class SchemaFailingProposer : public Proposer {
public:
    Proposal propose(const TargetCell&, int, const std::vector<AttemptRecord>&) override {
        throw ProposalSchemaError("invalid reply");
    }
    std::string backend_id() const override { return "schemafail"; }
};

}  // namespace

TEST_CASE("deterministic proposer picks the documented families") {
    const auto cells = grid_cells(7);

    // High-y / low-x region: weak linear signal plus a distractor block.
    const Proposal m3 = deterministic_propose(cells[4 * 7 + 0], 0, {});
    CHECK(m3.family == "M3");
    bool found_d = false;
    for (const auto& [name, values] : m3.spec.params)
        if (name == "d_noise") {
            found_d = true;
            for (double v : values) {
                CHECK(v >= 20);
                CHECK(v <= 90);
            }
        }
    CHECK(found_d);

    // High-x / low-y edge: V-shape with at most a couple of distractors.
    const Proposal m6 = deterministic_propose(cells[1 * 7 + 6], 0, {});
    CHECK(m6.family == "M6");
    for (const auto& [name, values] : m6.spec.params)
        if (name == "d_noise")
            for (double v : values) CHECK(v <= 3);

    // Near-origin and diagonal.
    CHECK(deterministic_propose(cells[0 * 7 + 0], 0, {}).family == "M5");
    CHECK(deterministic_propose(cells[3 * 7 + 3], 0, {}).family == "M1");
    CHECK(deterministic_propose(cells[1 * 7 + 4], 0, {}).family == "M2");

    // Every proposed spec validates and is deterministic.
    for (const auto& c : cells) {
        const Proposal a = deterministic_propose(c, 0, {});
        CHECK_NOTHROW(a.spec.validate());
        const Proposal b = deterministic_propose(c, 0, {});
        CHECK(a.spec.to_json() == b.spec.to_json());
    }
}

TEST_CASE("repair moves the dials against the achieved deltas") {
    const TargetCell cell = grid_cells(7)[3 * 7 + 3];
    const Proposal first = deterministic_propose(cell, 0, {});

    AttemptRecord miss;
    miss.cell_id = cell.id();
    miss.spec = first.spec;
    miss.x_score = cell.x_center + 0.25;  // overshot x
    miss.y_score = cell.y_center;
    miss.accepted = false;
    const Proposal repaired = deterministic_propose(cell, 1, {miss});

    auto grid_of = [](const MechanismSpec& s, const std::string& name) {
        for (const auto& [n, v] : s.params)
            if (n == name) return v;
        return std::vector<double>{};
    };
    // Overshot x: the curvature amplitude comes down and distractors go up.
    CHECK(grid_of(repaired.spec, "amp")[1] < grid_of(first.spec, "amp")[1]);
    CHECK(grid_of(repaired.spec, "d_noise")[0] >= grid_of(first.spec, "d_noise")[0]);

    // The cap parameter keeps desk-scale specs small.
    DeterministicProposer capped(100);
    CHECK(capped.propose(cell, 0, {}).spec.n_rows <= 100);
}

TEST_CASE("run_cell reaches the witness quota on an easy cell") {
    const TargetCell cell = grid_cells(3)[1 * 3 + 1];
    RunConfig cfg;
    cfg.grid_b = 3;
    cfg.witnesses = 2;
    cfg.budget = 15;
    cfg.base_seed = 1;
    DeterministicProposer proposer;
    const CellResult r = run_cell(cell, cfg, proposer, "");
    CHECK(r.status == "complete");
    CHECK(r.accepted == 2);
    int slot = 0;
    for (const auto& rec : r.records)
        if (rec.accepted) {
            CHECK(cell.contains(rec.x_score, rec.y_score));
            CHECK(rec.slot == slot);
            // Execution seed is pinned per slot.
            CHECK(rec.seed == mix_seed(cfg.base_seed, cell.ii, cell.jj, slot));
            ++slot;
        }
}

TEST_CASE("run_cell exhausts the budget when the proposer cannot land") {
    const TargetCell cell = grid_cells(3)[2 * 3 + 2];  // top-right: unreachable
    RunConfig cfg;
    cfg.grid_b = 3;
    cfg.witnesses = 1;
    cfg.budget = 4;
    HopelessProposer proposer;
    const CellResult r = run_cell(cell, cfg, proposer, "");
    CHECK(r.status == "exhausted");
    CHECK(r.accepted == 0);
    CHECK(r.records.size() == 4);
    // All retries of the unfilled slot reuse one execution seed.
    for (const auto& rec : r.records)
        CHECK(rec.seed == mix_seed(cfg.base_seed, cell.ii, cell.jj, 0));
}

TEST_CASE("run_cell statuses for failing proposers") {
    const TargetCell cell = grid_cells(3)[2 * 3 + 2];
    RunConfig cfg;
    cfg.grid_b = 3;
    cfg.witnesses = 1;
    cfg.budget = 6;

    AbortingProposer aborting;
    const CellResult a = run_cell(cell, cfg, aborting, "");
    CHECK(a.status == "aborted");
    CHECK(a.records.size() == 3);  // two misses plus the abort marker
    CHECK(a.records.back().proposal_failed);

    // Schema violations consume budget instead of aborting.
    SchemaFailingProposer schema;
    const CellResult s = run_cell(cell, cfg, schema, "");
    CHECK(s.status == "exhausted");
    CHECK(s.records.size() == 6);
    for (const auto& rec : s.records) {
        CHECK(rec.proposal_failed);
        CHECK(!rec.accepted);
    }
}

TEST_CASE("persistence layout, refusal to overwrite, and meta round-trip") {
    auto dir = testutil::temp_dir("run");
    const TargetCell cell = grid_cells(3)[1 * 3 + 1];
    RunConfig cfg;
    cfg.grid_b = 3;
    cfg.witnesses = 1;
    cfg.budget = 10;
    DeterministicProposer proposer;
    const CellResult r = run_cell(cell, cfg, proposer, dir.string());
    REQUIRE(r.accepted == 1);

    const fs::path slot_dir = dir / "cell_01_01" / "ds_000";
    CHECK(fs::exists(slot_dir / "data.csv"));
    CHECK(fs::exists(slot_dir / "meta.json"));
    CHECK(fs::exists(slot_dir / "mechanism.json"));

    const json meta = json::parse(testutil::read_file(slot_dir / "meta.json"));
    CHECK(meta.at("cell").at("ii") == 1);
    CHECK(meta.at("cell").at("jj") == 1);
    CHECK(meta.at("slot") == 0);
    CHECK(meta.at("achieved").contains("x_score"));

    const json mech = json::parse(testutil::read_file(slot_dir / "mechanism.json"));
    const MechanismSpec spec = MechanismSpec::parse(mech);
    const AttemptRecord rec = meta_from_json(meta, spec);
    const AttemptRecord* accepted = nullptr;
    for (const auto& x : r.records)
        if (x.accepted) accepted = &x;
    REQUIRE(accepted != nullptr);
    CHECK(rec.x_score == accepted->x_score);
    CHECK(rec.y_score == accepted->y_score);
    CHECK(rec.seed == accepted->seed);
    CHECK(rec.attempt == accepted->attempt);

    // Existing slot: refuse rather than silently overwrite.
    Dataset data = testutil::random_dataset(12, 2, 1);
    CHECK_THROWS(persist_accepted(dir.string(), cell, 0, data, *accepted));
    fs::remove_all(dir);
}

TEST_CASE("run_grid manifests are byte-identical across reruns") {
    RunConfig cfg;
    cfg.grid_b = 3;
    cfg.witnesses = 1;
    cfg.budget = 6;
    cfg.base_seed = 7;
    DeterministicProposer p1, p2;
    const RunSummary a = run_grid(cfg, p1, "");
    const RunSummary b = run_grid(cfg, p2, "");
    CHECK(run_manifest(a).dump(2) == run_manifest(b).dump(2));
    CHECK(a.total_accepted >= 7);  // easy 3x3 run fills most cells

    const json m = run_manifest(a);
    CHECK(m.at("cells").size() == 9);
    CHECK(m.at("evaluation").at("x_landmarker") == "knn k=5 uniform");
    CHECK(m.at("config").at("witnesses") == 1);
    CHECK(!m.dump().empty());
}

TEST_CASE("RunConfig validation") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.witnesses = 0;
    CHECK_THROWS(cfg.validate());
    cfg.witnesses = 10;
    cfg.budget = 5;
    CHECK_THROWS(cfg.validate());
    cfg = RunConfig{};
    cfg.grid_b = 1;
    CHECK_THROWS(cfg.validate());
}
