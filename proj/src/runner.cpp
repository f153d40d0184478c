#include "mws/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "mws/llm_client.hpp"
#include "mws/rng.hpp"

namespace fs = std::filesystem;

namespace mws {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

void RunConfig::validate() const {
    if (grid_b < 2) throw std::invalid_argument("run config: grid must be >= 2");
    if (witnesses < 1 || witnesses > budget)
        throw std::invalid_argument("run config: need 1 <= witnesses <= budget");
}

nlohmann::json meta_json(const TargetCell& cell, const AttemptRecord& record) {
    nlohmann::json j;
    j["cell"] = {{"ii", cell.ii},
                 {"jj", cell.jj},
                 {"bounds",
                  {{"x_lo", cell.x_lo},
                   {"x_hi", cell.x_hi},
                   {"y_lo", cell.y_lo},
                   {"y_hi", cell.y_hi}}}};
    j["slot"] = record.slot;
    j["attempt"] = record.attempt;
    j["achieved"] = {{"x_score", record.x_score}, {"y_score", record.y_score}};
    j["brief"] = record.mechanism_brief;
    j["seed"] = record.seed;
    j["timings_ms"] = {{"propose", record.propose_ms}, {"execute", record.execute_ms}};
    if (record.tokens_in >= 0)
        j["tokens"] = {{"in", record.tokens_in}, {"out", record.tokens_out}};
    else
        j["tokens"] = nullptr;
    return j;
}

AttemptRecord meta_from_json(const nlohmann::json& j, const MechanismSpec& spec) {
    AttemptRecord r;
    const auto& cell = j.at("cell");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cell_%02d_%02d", cell.at("ii").get<int>(),
                  cell.at("jj").get<int>());
    r.cell_id = buf;
    r.slot = j.at("slot").get<int>();
    r.attempt = j.at("attempt").get<int>();
    r.x_score = j.at("achieved").at("x_score").get<double>();
    r.y_score = j.at("achieved").at("y_score").get<double>();
    r.mechanism_brief = j.at("brief").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.propose_ms = j.at("timings_ms").value("propose", 0.0);
    r.execute_ms = j.at("timings_ms").value("execute", 0.0);
    if (!j.at("tokens").is_null()) {
        r.tokens_in = j["tokens"].at("in").get<long>();
        r.tokens_out = j["tokens"].at("out").get<long>();
    }
    r.accepted = true;  // only accepted attempts are persisted
    r.spec = spec;
    return r;
}

PersistPaths persist_accepted(const std::string& run_dir, const TargetCell& cell,
                              int slot, const Dataset& data,
                              const AttemptRecord& record) {
    if (!record.accepted)
        throw std::invalid_argument("persist_accepted: record is not accepted");
    char slot_buf[16];
    std::snprintf(slot_buf, sizeof(slot_buf), "ds_%03d", slot);
    const fs::path dir = fs::path(run_dir) / cell.id() / slot_buf;
    if (fs::exists(dir))
        throw std::runtime_error("persist_accepted: refusing to overwrite " +
                                 dir.string());
    fs::create_directories(dir);

    PersistPaths paths;
    paths.dir = dir.string();
    paths.data_csv = (dir / "data.csv").string();
    paths.meta_json = (dir / "meta.json").string();
    paths.mechanism_json = (dir / "mechanism.json").string();
    try {
        save_csv(data, paths.data_csv);
        write_text(paths.meta_json, meta_json(cell, record).dump(2) + "\n");
        write_text(paths.mechanism_json, record.spec.to_json().dump(2) + "\n");
    } catch (...) {
        fs::remove_all(dir);  // no partial slots
        throw;
    }
    return paths;
}

CellResult run_cell(const TargetCell& cell, const RunConfig& config,
                    Proposer& proposer, const std::string& run_dir) {
    config.validate();
    CellResult result;
    result.cell = cell;
    result.status = "exhausted";

    for (int attempt = 0; attempt < config.budget; ++attempt) {
        AttemptRecord record;
        record.cell_id = cell.id();
        record.attempt = attempt;
        record.seed = mix_seed(config.base_seed, static_cast<std::uint64_t>(cell.ii),
                               static_cast<std::uint64_t>(cell.jj),
                               static_cast<std::uint64_t>(result.accepted));

        Proposal proposal;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            proposal = proposer.propose(cell, attempt, result.records);
        } catch (const ProposalSchemaError& e) {
            record.propose_ms = ms_since(t0);
            record.proposal_failed = true;
            record.mechanism_brief = std::string("proposal failed: ") + e.what();
            result.records.push_back(std::move(record));
            continue;  // consumes one attempt of the budget
        } catch (const std::exception& e) {
            record.propose_ms = ms_since(t0);
            record.proposal_failed = true;
            record.mechanism_brief = std::string("proposer aborted: ") + e.what();
            result.records.push_back(std::move(record));
            result.status = "aborted";
            return result;
        }
        record.propose_ms = ms_since(t0);
        record.mechanism_brief = proposal.mechanism_brief;
        record.spec = proposal.spec;
        record.tokens_in = proposal.tokens_in;
        record.tokens_out = proposal.tokens_out;

        const auto t1 = std::chrono::steady_clock::now();
        ExecutionResult exec = execute_mechanism(proposal.spec, record.seed, cell);
        record.execute_ms = ms_since(t1);
        record.x_score = exec.x_score;
        record.y_score = exec.y_score;
        record.accepted = cell.contains(exec.x_score, exec.y_score);
        if (record.accepted) {
            record.slot = result.accepted;
            if (!run_dir.empty())
                persist_accepted(run_dir, cell, record.slot, exec.data, record);
            ++result.accepted;
        }
        result.records.push_back(std::move(record));
        if (result.accepted >= config.witnesses) {
            result.status = "complete";
            break;
        }
    }
    return result;
}

RunSummary run_grid(const RunConfig& config, Proposer& proposer,
                    const std::string& run_dir) {
    config.validate();
    RunSummary summary;
    summary.config = config;
    for (const auto& cell : grid_cells(config.grid_b)) {
        CellResult r = run_cell(cell, config, proposer, run_dir);
        summary.total_attempts += static_cast<int>(r.records.size());
        summary.total_accepted += r.accepted;
        summary.cells.push_back(std::move(r));
    }
    return summary;
}

nlohmann::json run_manifest(const RunSummary& summary) {
    nlohmann::json j;
    j["config"] = {{"grid_b", summary.config.grid_b},
                   {"witnesses", summary.config.witnesses},
                   {"budget", summary.config.budget},
                   {"base_seed", summary.config.base_seed},
                   {"proposer", summary.config.proposer_backend}};
    // Pinned evaluation configuration, surfaced in every report header.
    j["evaluation"] = {{"x_landmarker", "knn k=5 uniform"},
                       {"y_landmarker", "ols"},
                       {"splitter", "tscv k=5 seed=0"}};
    j["total_attempts"] = summary.total_attempts;
    j["total_accepted"] = summary.total_accepted;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : summary.cells) {
        nlohmann::json cell{{"id", c.cell.id()},
                            {"status", c.status},
                            {"attempts", c.records.size()},
                            {"accepted", c.accepted}};
        cell["witnesses"] = nlohmann::json::array();
        for (const auto& r : c.records) {
            if (!r.accepted) continue;
            cell["witnesses"].push_back({{"slot", r.slot},
                                         {"attempt", r.attempt},
                                         {"x_score", r.x_score},
                                         {"y_score", r.y_score},
                                         {"seed", r.seed}});
        }
        j["cells"].push_back(std::move(cell));
    }
    return j;
}

void write_run_manifest(const RunSummary& summary, const std::string& run_dir) {
    fs::create_directories(run_dir);
    write_text((fs::path(run_dir) / "manifest.json").string(),
               run_manifest(summary).dump(2) + "\n");
}

}  // namespace mws
