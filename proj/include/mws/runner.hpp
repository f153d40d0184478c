#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mws/grid.hpp"
#include "mws/mechanism.hpp"
#include "mws/propose.hpp"

namespace mws {

struct RunConfig {
    int grid_b = 7;
    int witnesses = 10;   // accepted datasets wanted per cell
    int budget = 84;      // attempt budget per cell
    std::uint64_t base_seed = 0;
    std::string proposer_backend = "det";

    void validate() const;  // 1 <= witnesses <= budget, grid_b >= 2
};

struct CellResult {
    TargetCell cell;
    std::vector<AttemptRecord> records;
    int accepted = 0;
    std::string status;  // "complete" | "exhausted" | "aborted"
};

// Propose -> execute -> box-test loop. Accepted attempts are persisted under
// run_dir (skipped when run_dir is empty). The execution seed is
// mix(base_seed, ii, jj, slot): constant across retries of a slot, fresh for
// each accepted slot.
CellResult run_cell(const TargetCell& cell, const RunConfig& config,
                    Proposer& proposer, const std::string& run_dir);

struct PersistPaths {
    std::string dir;
    std::string data_csv;
    std::string meta_json;
    std::string mechanism_json;
};

// Writes run_dir/cell_{ii:02}_{jj:02}/ds_{slot:03}/{data.csv, meta.json,
// mechanism.json}. Refuses to overwrite an existing slot; cleans up on
// partial failure.
PersistPaths persist_accepted(const std::string& run_dir, const TargetCell& cell,
                              int slot, const Dataset& data,
                              const AttemptRecord& record);

struct RunSummary {
    RunConfig config;
    std::vector<CellResult> cells;
    int total_attempts = 0;
    int total_accepted = 0;
};

RunSummary run_grid(const RunConfig& config, Proposer& proposer,
                    const std::string& run_dir);

// Timing-free, hence byte-identical across reruns with the same config.
nlohmann::json run_manifest(const RunSummary& summary);
void write_run_manifest(const RunSummary& summary, const std::string& run_dir);

// meta.json round-trip for a persisted slot.
nlohmann::json meta_json(const TargetCell& cell, const AttemptRecord& record);
AttemptRecord meta_from_json(const nlohmann::json& j, const MechanismSpec& spec);

}  // namespace mws
