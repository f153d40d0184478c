#include "mws/llm_client.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

namespace mws {

LlmConfig LlmConfig::from_json(const nlohmann::json& j) {
    LlmConfig c;
    c.endpoint = j.at("endpoint").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.api_key_env = j.value("api_key_env", std::string("LLM_API_KEY"));
    c.timeout_seconds = j.value("timeout_seconds", 120);
    c.max_retries = j.value("max_retries", 3);
    c.backoff_seconds = j.value("backoff_seconds", 1.0);
    return c;
}

LlmConfig LlmConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("llm config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

LlmReply HttpLlmTransport::chat(const LlmConfig& config, const nlohmann::json& messages) {
    const auto scheme_end = config.endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw LlmTransportError("llm: endpoint must be a full URL");
    const auto path_start = config.endpoint.find('/', scheme_end + 3);
    const std::string base = path_start == std::string::npos
                                 ? config.endpoint
                                 : config.endpoint.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : config.endpoint.substr(path_start);

    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key)
        throw LlmTransportError("llm: API key environment variable '" +
                                config.api_key_env + "' is not set");

    nlohmann::json body{{"model", config.model}, {"messages", messages}};
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::duration<double>(
                config.backoff_seconds * attempt));
        httplib::Client client(base);
        client.set_connection_timeout(config.timeout_seconds);
        client.set_read_timeout(config.timeout_seconds);
        client.set_bearer_token_auth(key);
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            last_error = "transport failure (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "status " + std::to_string(res->status);
            continue;  // retriable
        }
        if (res->status != 200)
            throw LlmTransportError("llm: non-retriable status " +
                                    std::to_string(res->status));

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw LlmTransportError(std::string("llm: unparsable response body: ") +
                                    e.what());
        }
        LlmReply reply;
        if (j.contains("choices") && !j["choices"].empty())
            reply.content =
                j["choices"][0].at("message").at("content").get<std::string>();
        else if (j.contains("content") && j["content"].is_string())
            reply.content = j["content"].get<std::string>();
        else
            throw LlmTransportError("llm: response carries no message content");
        if (j.contains("usage")) {
            reply.tokens_in = j["usage"].value("prompt_tokens", -1L);
            reply.tokens_out = j["usage"].value("completion_tokens", -1L);
        }
        return reply;
    }
    throw LlmTransportError("llm: retries exhausted; last error: " + last_error);
}

std::string llm_system_prompt() {
    return
        "You design synthetic regression datasets. Return exactly one valid JSON "
        "object and nothing else: no prose outside the object, no code fences.\n"
        "The object must have exactly these keys:\n"
        "  \"mechanism_brief\": one or two sentences describing the data-generating "
        "mechanism.\n"
        "  \"mechanism_spec\": a mechanism specification in the dialect below.\n"
        "  \"expected_x_behavior\": one sentence on how the mechanism steers the "
        "x-score.\n"
        "  \"expected_y_behavior\": one sentence on how the mechanism steers the "
        "y-score.\n"
        "\n"
        "A mechanism specification is a JSON object:\n"
        "  {\"version\": 1, \"n_rows\": <int >= 10>,\n"
        "   \"latents\": [{\"name\", \"dist\": \"gaussian\"|\"uniform\", "
        "\"mu\"/\"sigma\" or \"lo\"/\"hi\"}...],\n"
        "   \"observed_features\": [{\"name\", \"expr\", \"obs_noise\"}...],\n"
        "   \"target_expr\": <expr>,\n"
        "   \"noise\": {\"kind\": \"homoscedastic\", \"sigma\"} | {\"kind\": "
        "\"heteroscedastic\", \"feature\": <index>, \"scale\"} | {\"kind\": "
        "\"label_corruption\", \"fraction\"},\n"
        "   \"distractor_count\": <int>,\n"
        "   \"search\": {\"params\": [{\"name\", \"values\": [..]}...], \"policy\": "
        "{\"kind\": \"first_in_box\"} | {\"kind\": \"nearest_center\", \"bonus\"} | "
        "{\"kind\": \"penalized\", \"penalty\", \"y_weight\"}}}\n"
        "Expressions are nested prefix-form arrays over the ops const, var, param, "
        "add, sub, mul, sin, cos, abs, square, radial (exp(-x^2)), hinge "
        "([\"hinge\", expr, threshold]) and select ([\"select\", cond, a, b]); "
        "example: [\"add\", [\"mul\", [\"param\", \"amp\"], [\"sin\", [\"var\", "
        "\"z0\"]]], [\"const\", 0.5]].\n"
        "Numeric fields of latents, obs_noise, noise and distractor_count may "
        "instead name a search parameter. Search grids must be small, finite and "
        "deterministic: at most 10000 candidates in total.\n"
        "Execution is deterministic given a seed and never reads or writes files. "
        "Each candidate dataset is scored with x_score = mean cross-validated R^2 "
        "of a KNN regressor and y_score = mean cross-validated R^2 of Linear "
        "Regression, both clamped to [-1, 1].";
}

std::string llm_initial_prompt(const TargetCell& cell) {
    return "Target specification:\n" + cell.description() +
           "\nPropose a mechanism whose dataset lands inside the target box. "
           "Keep the search grid small and deterministic.";
}

std::string llm_repair_prompt(const TargetCell& cell, double achieved_x,
                              double achieved_y) {
    char achieved[96];
    std::snprintf(achieved, sizeof(achieved), "x_score=%.6f, y_score=%.6f",
                  achieved_x, achieved_y);
    return std::string("Previous attempt missed the target region.\nAchieved: ") +
           achieved + "\nTarget specification:\n" + cell.description() +
           "\nAdjust the mechanism with the smallest effective change when "
           "possible and return the full JSON object again.";
}

Proposal parse_llm_reply(const std::string& content) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw ProposalSchemaError(std::string("llm reply is not valid JSON: ") +
                                  e.what());
    }
    if (!j.is_object() || !j.contains("mechanism_brief") ||
        !j.contains("mechanism_spec") || !j.contains("expected_x_behavior") ||
        !j.contains("expected_y_behavior"))
        throw ProposalSchemaError("llm reply is missing a mandated key");
    Proposal p;
    try {
        p.mechanism_brief = j["mechanism_brief"].get<std::string>();
        p.spec = MechanismSpec::parse(j["mechanism_spec"]);
        p.spec.validate();
    } catch (const std::exception& e) {
        throw ProposalSchemaError(std::string("llm mechanism_spec is invalid: ") +
                                  e.what());
    }
    return p;
}

LlmProposer::LlmProposer(LlmConfig config, std::shared_ptr<LlmTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

Proposal LlmProposer::propose(const TargetCell& cell, int attempt_index,
                              const std::vector<AttemptRecord>& history) {
    if (thread_cell_id_ != cell.id()) {
        thread_cell_id_ = cell.id();
        messages_ = nlohmann::json::array();
        messages_.push_back({{"role", "system"}, {"content", llm_system_prompt()}});
    }
    std::string turn;
    if (attempt_index == 0 || history.empty()) {
        turn = llm_initial_prompt(cell);
    } else {
        const auto& last = history.back();
        turn = last.proposal_failed
                   ? llm_initial_prompt(cell)
                   : llm_repair_prompt(cell, last.x_score, last.y_score);
    }
    messages_.push_back({{"role", "user"}, {"content", turn}});

    long tokens_in = 0, tokens_out = 0;
    bool any_usage = false;
    std::string schema_error;
    for (int ask = 0; ask < 2; ++ask) {
        const LlmReply reply = transport_->chat(config_, messages_);
        if (reply.tokens_in >= 0) {
            any_usage = true;
            tokens_in += reply.tokens_in;
            tokens_out += std::max(reply.tokens_out, 0L);
        }
        messages_.push_back({{"role", "assistant"}, {"content", reply.content}});
        try {
            Proposal p = parse_llm_reply(reply.content);
            p.tokens_in = any_usage ? tokens_in : -1;
            p.tokens_out = any_usage ? tokens_out : -1;
            return p;
        } catch (const ProposalSchemaError& e) {
            schema_error = e.what();
            if (ask == 0)
                messages_.push_back(
                    {{"role", "user"},
                     {"content",
                      std::string("That reply was invalid (") + e.what() +
                          "). Return exactly one valid JSON object with the keys "
                          "mechanism_brief, mechanism_spec, expected_x_behavior "
                          "and expected_y_behavior, and nothing else."}});
        }
    }
    throw ProposalSchemaError(schema_error);
}

}  // namespace mws
