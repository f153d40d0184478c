#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mws/grid.hpp"
#include "mws/mechanism.hpp"

namespace mws {

// One propose-execute-evaluate cycle, accepted or not.
struct AttemptRecord {
    std::string cell_id;
    int attempt = 0;  // 0-based within the cell
    std::string mechanism_brief;
    MechanismSpec spec;
    double x_score = 0.0;
    double y_score = 0.0;
    bool accepted = false;
    bool proposal_failed = false;  // proposer produced no usable spec
    int slot = -1;                 // accepted-witness index, -1 otherwise
    std::uint64_t seed = 0;        // execution seed used for this attempt
    double propose_ms = 0.0;
    double execute_ms = 0.0;
    long tokens_in = -1;  // -1 when the proposer reports no token usage
    long tokens_out = -1;

    nlohmann::json to_json() const;
    static AttemptRecord from_json(const nlohmann::json& j);
};

struct Proposal {
    MechanismSpec spec;
    std::string mechanism_brief;
    std::string family;  // taxonomy tag (M1..M10); empty if the backend has none
    long tokens_in = -1;
    long tokens_out = -1;
};

class Proposer {
public:
    virtual ~Proposer() = default;
    virtual Proposal propose(const TargetCell& cell, int attempt_index,
                             const std::vector<AttemptRecord>& history) = 0;
    virtual std::string backend_id() const = 0;
};

// Taxonomy-driven proposer: picks a mechanism family from the cell's location
// and repairs by moving the curvature-amplitude and distractor-count dials
// against the last achieved-vs-target deltas.
class DeterministicProposer : public Proposer {
public:
    // max_rows > 0 caps every proposed spec's n_rows (desk-scale runs).
    explicit DeterministicProposer(int max_rows = 0) : max_rows_(max_rows) {}
    Proposal propose(const TargetCell& cell, int attempt_index,
                     const std::vector<AttemptRecord>& history) override;
    std::string backend_id() const override { return "det"; }

private:
    int max_rows_ = 0;
};

Proposal deterministic_propose(const TargetCell& cell, int attempt_index,
                               const std::vector<AttemptRecord>& history);

}  // namespace mws
