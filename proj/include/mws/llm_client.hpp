#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mws/propose.hpp"

namespace mws {

struct LlmConfig {
    std::string endpoint;  // full URL, e.g. http://host:8080/v1/chat/completions
    std::string model;
    std::string api_key_env = "LLM_API_KEY";
    int timeout_seconds = 120;
    int max_retries = 3;
    double backoff_seconds = 1.0;

    static LlmConfig from_json(const nlohmann::json& j);
    static LlmConfig from_file(const std::string& path);
};

// Network failure that survived the retry budget.
struct LlmTransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Response that is not the JSON object the prompt demands (after the re-ask).
struct ProposalSchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LlmReply {
    std::string content;
    long tokens_in = -1;
    long tokens_out = -1;
};

class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    // messages: [{role, content}...]; implementations add {model} and auth.
    virtual LlmReply chat(const LlmConfig& config, const nlohmann::json& messages) = 0;
};

// POSTs {model, messages} with bearer-token auth from the configured
// environment variable; retries transient failures with linear backoff.
class HttpLlmTransport : public LlmTransport {
public:
    LlmReply chat(const LlmConfig& config, const nlohmann::json& messages) override;
};

// Prompt templates. {target_description} is the cell's rendered box text;
// the repair turn prepends the achieved scores.
std::string llm_system_prompt();
std::string llm_initial_prompt(const TargetCell& cell);
std::string llm_repair_prompt(const TargetCell& cell, double achieved_x,
                              double achieved_y);

// Parses the mandated reply object {mechanism_brief, mechanism_spec,
// expected_x_behavior, expected_y_behavior}. Throws ProposalSchemaError.
Proposal parse_llm_reply(const std::string& content);

class LlmProposer : public Proposer {
public:
    LlmProposer(LlmConfig config, std::shared_ptr<LlmTransport> transport);

    // Keeps one conversational thread per cell; a schema-invalid reply gets
    // exactly one re-ask before the attempt fails.
    Proposal propose(const TargetCell& cell, int attempt_index,
                     const std::vector<AttemptRecord>& history) override;
    std::string backend_id() const override { return "llm"; }

private:
    LlmConfig config_;
    std::shared_ptr<LlmTransport> transport_;
    std::string thread_cell_id_;
    nlohmann::json messages_ = nlohmann::json::array();
};

}  // namespace mws
