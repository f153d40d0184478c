#include <doctest.h>

#include <memory>

#include "mws/llm_client.hpp"
#include "test_util.hpp"

using namespace mws;
using nlohmann::json;

namespace {

json canned_spec_json() {
    MechanismSpec s;
    s.n_rows = 50;
    s.latents = {{"z", LatentSpec::Dist::kGaussian, ParamValue::fixed(0.0),
                  ParamValue::fixed(1.0)}};
    s.observed_features = {
        {"x0", Expr::parse(json{"var", "z"}), ParamValue::fixed(0.0)}};
    s.target_expr = Expr::parse(json{"mul", {"const", 2.0}, {"var", "z"}});
    s.noise.sigma = ParamValue::fixed(0.5);
    return s.to_json();
}

std::string canned_reply() {
    json reply;
    reply["mechanism_brief"] = "linear latent with moderate noise";
    reply["mechanism_spec"] = canned_spec_json();
    reply["expected_x_behavior"] = "knn tracks the linear trend";
    reply["expected_y_behavior"] = "linear fit near the signal ratio";
    return reply.dump();
}

// Scripted transport: returns queued replies in order and records the
// conversations it was shown.
class StubTransport : public LlmTransport {
public:
    explicit StubTransport(std::vector<std::string> replies)
        : replies_(std::move(replies)) {}

    LlmReply chat(const LlmConfig&, const json& messages) override {
        seen.push_back(messages);
        if (calls >= replies_.size()) throw LlmTransportError("stub exhausted");
        LlmReply r;
        r.content = replies_[calls++];
        r.tokens_in = 100;
        r.tokens_out = 50;
        return r;
    }

    std::vector<json> seen;
    size_t calls = 0;

private:
    std::vector<std::string> replies_;
};

LlmConfig test_config() {
    LlmConfig c;
    c.endpoint = "http://localhost:1/v1/chat/completions";
    c.model = "test-model";
    return c;
}

}  // namespace

TEST_CASE("parse_llm_reply round-trips the mechanism spec") {
    const Proposal p = parse_llm_reply(canned_reply());
    CHECK(p.mechanism_brief == "linear latent with moderate noise");
    CHECK(p.spec.to_json() == canned_spec_json());
}

TEST_CASE("parse_llm_reply rejects malformed replies") {
    CHECK_THROWS_AS(parse_llm_reply("not json at all"), ProposalSchemaError);
    CHECK_THROWS_AS(parse_llm_reply("[1,2,3]"), ProposalSchemaError);
    json missing;
    missing["mechanism_brief"] = "x";
    missing["mechanism_spec"] = canned_spec_json();
    missing["expected_x_behavior"] = "x";
    CHECK_THROWS_AS(parse_llm_reply(missing.dump()), ProposalSchemaError);
    json bad_spec = json::parse(canned_reply());
    bad_spec["mechanism_spec"] = json{{"n_rows", 5}};
    CHECK_THROWS_AS(parse_llm_reply(bad_spec.dump()), ProposalSchemaError);
}

TEST_CASE("prompt templates carry the mandated markers") {
    const TargetCell cell = grid_cells(7)[2 * 7 + 3];
    const std::string initial = llm_initial_prompt(cell);
    CHECK(initial.find("Target specification:") != std::string::npos);
    for (const char* num :
         {"0.428571", "0.571429", "0.285714", "0.428571", "0.500000", "0.357143"})
        CHECK(initial.find(num) != std::string::npos);

    const std::string repair = llm_repair_prompt(cell, 0.12, 0.617);
    CHECK(repair.find("Previous attempt missed the target region.") !=
          std::string::npos);
    CHECK(repair.find("x_score=0.120000, y_score=0.617000") != std::string::npos);
    CHECK(!llm_system_prompt().empty());
}

TEST_CASE("LlmProposer parses a valid first reply") {
    auto transport = std::make_shared<StubTransport>(
        std::vector<std::string>{canned_reply()});
    LlmProposer proposer(test_config(), transport);
    const TargetCell cell = grid_cells(7)[2 * 7 + 3];
    const Proposal p = proposer.propose(cell, 0, {});
    CHECK(p.spec.n_rows == 50);
    CHECK(p.tokens_in == 100);
    CHECK(p.tokens_out == 50);
    REQUIRE(transport->seen.size() == 1);
    const json& messages = transport->seen[0];
    CHECK(messages[0].at("role") == "system");
    CHECK(messages[1].at("role") == "user");
    CHECK(messages[1].at("content").get<std::string>().find("Target specification:") !=
          std::string::npos);
}

TEST_CASE("LlmProposer re-asks once on a schema violation") {
    auto transport = std::make_shared<StubTransport>(
        std::vector<std::string>{"garbage", canned_reply()});
    LlmProposer proposer(test_config(), transport);
    const TargetCell cell = grid_cells(7)[0];
    const Proposal p = proposer.propose(cell, 0, {});
    CHECK(p.spec.n_rows == 50);
    CHECK(transport->calls == 2);
    // Token usage accumulates across the re-ask.
    CHECK(p.tokens_in == 200);

    auto bad = std::make_shared<StubTransport>(
        std::vector<std::string>{"garbage", "still garbage"});
    LlmProposer failing(test_config(), bad);
    CHECK_THROWS_AS(failing.propose(cell, 0, {}), ProposalSchemaError);
    CHECK(bad->calls == 2);
}

TEST_CASE("LlmProposer threads the conversation per cell") {
    auto transport = std::make_shared<StubTransport>(std::vector<std::string>{
        canned_reply(), canned_reply(), canned_reply()});
    LlmProposer proposer(test_config(), transport);
    const auto cells = grid_cells(7);
    const TargetCell& cell = cells[0];

    const Proposal first = proposer.propose(cell, 0, {});
    AttemptRecord miss;
    miss.cell_id = cell.id();
    miss.spec = first.spec;
    miss.x_score = 0.9;
    miss.y_score = 0.9;
    proposer.propose(cell, 1, {miss});

    // The repair turn extends the same thread: assistant reply retained.
    const json& second = transport->seen[1];
    CHECK(second.size() > transport->seen[0].size());
    bool has_assistant = false, has_repair = false;
    for (const auto& m : second) {
        if (m.at("role") == "assistant") has_assistant = true;
        if (m.at("role") == "user" &&
            m.at("content").get<std::string>().find(
                "Previous attempt missed the target region.") != std::string::npos)
            has_repair = true;
    }
    CHECK(has_assistant);
    CHECK(has_repair);

    // A new cell resets the thread.
    proposer.propose(cells[1], 0, {});
    const json& third = transport->seen[2];
    CHECK(third.size() == 2);
    CHECK(third[0].at("role") == "system");
}

TEST_CASE("LlmConfig parses JSON with defaults") {
    const json j = {{"endpoint", "http://example.test/v1/chat/completions"},
                    {"model", "m"}};
    const LlmConfig c = LlmConfig::from_json(j);
    CHECK(c.endpoint == "http://example.test/v1/chat/completions");
    CHECK(c.model == "m");
    CHECK(c.api_key_env == "LLM_API_KEY");
    CHECK(c.max_retries == 3);
    CHECK(c.timeout_seconds > 0);
}
