#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "omninova/message.hpp"

namespace omninova {

// ── Tiers and configuration ─────────────────────────────────────────────

enum class ModelTier { reasoning, basic, vision };

inline constexpr std::array<ModelTier, 3> kAllTiers = {ModelTier::reasoning, ModelTier::basic,
                                                       ModelTier::vision};

std::string tier_name(ModelTier tier);
std::optional<ModelTier> tier_from_name(const std::string& name);

// Scalar parameters (temperature, max output tokens, base URL, credential
// env-var name). Credentials are always references, never literal secrets.
using ParamMap = std::map<std::string, nlohmann::json>;

struct ModelConfig {
    ModelTier tier = ModelTier::basic;
    std::string provider;
    std::string model_name;
    ParamMap params;
};

struct AgentModelMap {
    std::map<std::string, ModelTier> entries;
};

// All seven agents draw from the basic tier by default; the planner escalates
// to reasoning via the deep-thinking flag at call time.
AgentModelMap default_agent_model_map();

// ── Usage accounting ────────────────────────────────────────────────────

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    ModelTier tier = ModelTier::basic;
};

struct ChatResponse {
    std::string content;
    TokenUsage usage;
};

struct StreamResponse {
    std::vector<std::string> chunks;
    TokenUsage usage;

    std::string joined() const;
};

// Per-run ledger; every token is attributed to exactly one tier.
class TokenLedger {
public:
    void add(const TokenUsage& usage);
    long long total(ModelTier tier) const;
    long long prompt_total(ModelTier tier) const;
    long long completion_total(ModelTier tier) const;
    // All three tiers, keyed by tier name, zeros included.
    std::map<std::string, long long> totals_by_tier() const;

private:
    std::array<long long, 3> prompt_{};
    std::array<long long, 3> completion_{};
};

// Deterministic approximation: ceil(UTF-8 byte length / 4). Monotone
// non-decreasing in text length.
long long count_tokens(const std::string& text);

// ── Errors ──────────────────────────────────────────────────────────────

enum class ModelErrorKind {
    unknown_key,
    backend_unavailable,  // transport failure, retryable
    backend_rejected,     // non-retryable provider error
    stream_interrupted,
    schema_violation,
    parse_failure,
};

class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ModelErrorKind kind() const { return kind_; }

private:
    ModelErrorKind kind_;
};

class StreamInterrupted : public ModelError {
public:
    StreamInterrupted(const std::string& message, std::vector<std::string> chunks)
        : ModelError(ModelErrorKind::stream_interrupted, message), chunks_(std::move(chunks)) {}
    // Chunks received before the failure.
    const std::vector<std::string>& chunks() const { return chunks_; }

private:
    std::vector<std::string> chunks_;
};

// ── Backends ────────────────────────────────────────────────────────────

struct ModelHandle;

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ModelHandle& handle,
                                  const std::vector<Message>& messages) = 0;
    virtual StreamResponse stream(const ModelHandle& handle,
                                  const std::vector<Message>& messages) = 0;
};

// Resolved backend plus parameters. Immutable after resolution; safe to share
// across workflow instances. `key` is the resolution key (agent name or tier
// name) and is what the scripted backend dispatches on.
struct ModelHandle {
    std::string key;
    ModelConfig config;
    std::shared_ptr<ChatBackend> backend;
};

// One scripted entry: full response content, optional stream chunk size in
// bytes (0 streams the whole content as one chunk), and an optional failure
// injection point for exercising StreamInterrupted.
struct ScriptedResponse {
    std::string content;
    std::size_t chunk_size = 0;
    int fail_after_chunks = -1;  // <0 disables
};

// Deterministic scripted backend keyed by (resolution key, zero-based turn
// index per key). Fixture file: JSON object mapping agent name to an ordered
// array of response strings or objects {content, chunk_size}.
class MockBackend : public ChatBackend {
public:
    static std::shared_ptr<MockBackend> from_json(const nlohmann::json& doc);
    static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

    void add_script(const std::string& key, std::vector<ScriptedResponse> responses);

    ChatResponse complete(const ModelHandle& handle, const std::vector<Message>& messages) override;
    StreamResponse stream(const ModelHandle& handle, const std::vector<Message>& messages) override;

    struct RecordedRequest {
        std::string key;
        std::vector<Message> messages;
    };
    // Outbound request capture, in call order.
    const std::vector<RecordedRequest>& requests() const { return requests_; }

private:
    const ScriptedResponse& next_for(const std::string& key);

    std::map<std::string, std::vector<ScriptedResponse>> scripts_;
    std::map<std::string, std::size_t> turns_;
    std::vector<RecordedRequest> requests_;
};

// Chat-completions-style JSON over HTTP: messages array in, choices with a
// message out. Base URL, credential env-var name, temperature and max_tokens
// come from the handle's params.
class HttpBackend : public ChatBackend {
public:
    ChatResponse complete(const ModelHandle& handle, const std::vector<Message>& messages) override;
    StreamResponse stream(const ModelHandle& handle, const std::vector<Message>& messages) override;
};

// Default vision backend: resolves and type-checks but rejects every call.
class UnconfiguredBackend : public ChatBackend {
public:
    explicit UnconfiguredBackend(std::string reason) : reason_(std::move(reason)) {}
    ChatResponse complete(const ModelHandle&, const std::vector<Message>&) override;
    StreamResponse stream(const ModelHandle&, const std::vector<Message>&) override;

private:
    std::string reason_;
};

// ── Resolution ──────────────────────────────────────────────────────────

struct ModelSettings {
    std::map<ModelTier, ModelConfig> tiers;
    AgentModelMap agent_map;
};

ModelSettings default_model_settings();

class ModelLayer {
public:
    explicit ModelLayer(ModelSettings settings);

    // Routes every tier through the given backend (scripted runs).
    void set_backend(std::shared_ptr<ChatBackend> backend);

    // Resolves a tier name or an agent name. Agent names resolve through the
    // agent map and then recurse on the tier; overrides merge over the
    // tier's params with override precedence. Throws ModelError{unknown_key}.
    ModelHandle resolve(const std::string& key, const ParamMap& overrides = {}) const;

    // Resolves an agent against an explicit tier (deep-thinking escalation,
    // single-tier ablation) while keeping the agent as the scripted key.
    ModelHandle resolve_for_agent(const std::string& agent, ModelTier tier,
                                  const ParamMap& overrides = {}) const;

    const ModelSettings& settings() const { return settings_; }

private:
    std::shared_ptr<ChatBackend> backend_for(ModelTier tier) const;

    ModelSettings settings_;
    std::shared_ptr<ChatBackend> override_backend_;
    std::shared_ptr<ChatBackend> http_backend_;
    std::shared_ptr<ChatBackend> vision_backend_;
};

// ── Chat operations ─────────────────────────────────────────────────────

ChatResponse chat(const ModelHandle& handle, const std::vector<Message>& messages);

// Ordered content chunks; their concatenation equals the chat content for
// the same backend state.
StreamResponse chat_stream(const ModelHandle& handle, const std::vector<Message>& messages);

struct SchemaField {
    std::string name;
    bool required = true;
    std::vector<std::string> allowed;  // empty accepts any value
};

struct ObjectSchema {
    std::string name;
    std::vector<SchemaField> fields;
};

struct StructuredResponse {
    nlohmann::ordered_json value;
    TokenUsage usage;
};

// Runs chat, routes the raw output through repair_json, and validates the
// object against the schema. Throws ModelError{parse_failure} when repair
// cannot produce JSON and ModelError{schema_violation} when a required field
// is missing or a value falls outside its enum.
StructuredResponse structured_chat(const ModelHandle& handle, const std::vector<Message>& messages,
                                   const ObjectSchema& schema);

}  // namespace omninova
