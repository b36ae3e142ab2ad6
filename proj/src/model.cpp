#include "omninova/model.hpp"

#include <cstdlib>
#include <fstream>

#include "httplib.h"
#include "omninova/json_repair.hpp"

namespace omninova {

// ── Tiers ───────────────────────────────────────────────────────────────

std::string tier_name(ModelTier tier) {
    switch (tier) {
        case ModelTier::reasoning: return "reasoning";
        case ModelTier::basic: return "basic";
        case ModelTier::vision: return "vision";
    }
    return "basic";
}

std::optional<ModelTier> tier_from_name(const std::string& name) {
    if (name == "reasoning") return ModelTier::reasoning;
    if (name == "basic") return ModelTier::basic;
    if (name == "vision") return ModelTier::vision;
    return std::nullopt;
}

AgentModelMap default_agent_model_map() {
    AgentModelMap map;
    for (const char* agent : {"coordinator", "planner", "supervisor", "researcher", "coder",
                              "browser", "reporter"}) {
        map.entries[agent] = ModelTier::basic;
    }
    return map;
}

ModelSettings default_model_settings() {
    ModelSettings settings;
    settings.tiers[ModelTier::reasoning] = {ModelTier::reasoning, "openai-compatible",
                                            "reasoning-default", {}};
    settings.tiers[ModelTier::basic] = {ModelTier::basic, "openai-compatible", "basic-default", {}};
    settings.tiers[ModelTier::vision] = {ModelTier::vision, "openai-compatible", "vision-default",
                                         {}};
    settings.agent_map = default_agent_model_map();
    return settings;
}

// ── Usage ───────────────────────────────────────────────────────────────

std::string StreamResponse::joined() const {
    std::string out;
    for (const auto& chunk : chunks) out += chunk;
    return out;
}

void TokenLedger::add(const TokenUsage& usage) {
    const auto idx = static_cast<std::size_t>(usage.tier);
    prompt_[idx] += usage.prompt_tokens;
    completion_[idx] += usage.completion_tokens;
}

long long TokenLedger::total(ModelTier tier) const {
    const auto idx = static_cast<std::size_t>(tier);
    return prompt_[idx] + completion_[idx];
}

long long TokenLedger::prompt_total(ModelTier tier) const {
    return prompt_[static_cast<std::size_t>(tier)];
}

long long TokenLedger::completion_total(ModelTier tier) const {
    return completion_[static_cast<std::size_t>(tier)];
}

std::map<std::string, long long> TokenLedger::totals_by_tier() const {
    std::map<std::string, long long> out;
    for (ModelTier tier : kAllTiers) out[tier_name(tier)] = total(tier);
    return out;
}

long long count_tokens(const std::string& text) {
    return static_cast<long long>((text.size() + 3) / 4);
}

namespace {

TokenUsage usage_for(const std::vector<Message>& messages, const std::string& completion,
                     ModelTier tier) {
    TokenUsage usage;
    usage.tier = tier;
    for (const auto& message : messages) usage.prompt_tokens += count_tokens(message.content);
    usage.completion_tokens = count_tokens(completion);
    return usage;
}

void require_messages(const std::vector<Message>& messages) {
    if (messages.empty()) throw std::invalid_argument("chat requires a non-empty message list");
}

// Splits on byte budget without cutting a UTF-8 sequence in half.
std::vector<std::string> chunk_content(const std::string& content, std::size_t chunk_size) {
    std::vector<std::string> chunks;
    if (content.empty()) return chunks;
    if (chunk_size == 0) {
        chunks.push_back(content);
        return chunks;
    }
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = std::min(pos + chunk_size, content.size());
        while (end < content.size() &&
               (static_cast<unsigned char>(content[end]) & 0xC0) == 0x80) {
            ++end;
        }
        chunks.push_back(content.substr(pos, end - pos));
        pos = end;
    }
    return chunks;
}

}  // namespace

// ── Mock backend ────────────────────────────────────────────────────────

std::shared_ptr<MockBackend> MockBackend::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw std::invalid_argument("mock fixture must be a JSON object of agent → responses");
    }
    auto backend = std::make_shared<MockBackend>();
    for (const auto& [agent, entries] : doc.items()) {
        if (!entries.is_array()) {
            throw std::invalid_argument("fixture responses for '" + agent + "' must be an array");
        }
        std::vector<ScriptedResponse> responses;
        for (const auto& entry : entries) {
            ScriptedResponse scripted;
            if (entry.is_string()) {
                scripted.content = entry.get<std::string>();
            } else if (entry.is_object()) {
                scripted.content = entry.value("content", "");
                scripted.chunk_size = entry.value("chunk_size", std::size_t{0});
                scripted.fail_after_chunks = entry.value("fail_after_chunks", -1);
            } else {
                throw std::invalid_argument("fixture entry for '" + agent +
                                            "' must be a string or object");
            }
            responses.push_back(std::move(scripted));
        }
        backend->add_script(agent, std::move(responses));
    }
    return backend;
}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open mock fixture: " + path.string());
    nlohmann::json doc;
    in >> doc;
    return from_json(doc);
}

void MockBackend::add_script(const std::string& key, std::vector<ScriptedResponse> responses) {
    scripts_[key] = std::move(responses);
}

const ScriptedResponse& MockBackend::next_for(const std::string& key) {
    auto it = scripts_.find(key);
    if (it == scripts_.end()) {
        throw ModelError(ModelErrorKind::backend_rejected,
                         "mock fixture has no script for '" + key + "'");
    }
    const std::size_t turn = turns_[key];
    if (turn >= it->second.size()) {
        throw ModelError(ModelErrorKind::backend_rejected,
                         "mock fixture exhausted for '" + key + "' (turn " +
                             std::to_string(turn) + ")");
    }
    ++turns_[key];
    return it->second[turn];
}

ChatResponse MockBackend::complete(const ModelHandle& handle,
                                   const std::vector<Message>& messages) {
    requests_.push_back({handle.key, messages});
    const ScriptedResponse& scripted = next_for(handle.key);
    return {scripted.content, usage_for(messages, scripted.content, handle.config.tier)};
}

StreamResponse MockBackend::stream(const ModelHandle& handle,
                                   const std::vector<Message>& messages) {
    requests_.push_back({handle.key, messages});
    const ScriptedResponse& scripted = next_for(handle.key);
    StreamResponse response;
    response.chunks = chunk_content(scripted.content, scripted.chunk_size);
    if (scripted.fail_after_chunks >= 0 &&
        static_cast<std::size_t>(scripted.fail_after_chunks) < response.chunks.size()) {
        std::vector<std::string> received(response.chunks.begin(),
                                          response.chunks.begin() + scripted.fail_after_chunks);
        throw StreamInterrupted("scripted mid-stream failure for '" + handle.key + "'",
                                std::move(received));
    }
    response.usage = usage_for(messages, scripted.content, handle.config.tier);
    return response;
}

// ── HTTP backend ────────────────────────────────────────────────────────

namespace {

struct ParsedBase {
    std::string scheme_host_port;
    std::string path_prefix;
};

ParsedBase parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ModelError(ModelErrorKind::backend_rejected,
                         "base_url must include a scheme: " + base_url);
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

std::string param_string(const ParamMap& params, const std::string& key,
                         const std::string& fallback = "") {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    if (it->second.is_string()) return it->second.get<std::string>();
    return it->second.dump();
}

nlohmann::ordered_json build_request_body(const ModelHandle& handle,
                                          const std::vector<Message>& messages, bool stream) {
    nlohmann::ordered_json body;
    body["model"] = handle.config.model_name;
    auto msgs = nlohmann::ordered_json::array();
    for (const auto& message : messages) msgs.push_back(message_to_json(message));
    body["messages"] = std::move(msgs);
    if (auto it = handle.config.params.find("temperature"); it != handle.config.params.end()) {
        body["temperature"] = it->second;
    }
    if (auto it = handle.config.params.find("max_tokens"); it != handle.config.params.end()) {
        body["max_tokens"] = it->second;
    }
    if (stream) body["stream"] = true;
    return body;
}

httplib::Headers auth_headers(const ModelHandle& handle) {
    httplib::Headers headers;
    const std::string key_env = param_string(handle.config.params, "api_key_env");
    if (!key_env.empty()) {
        const char* key = std::getenv(key_env.c_str());
        if (key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    return headers;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

[[noreturn]] void throw_for_status(int status, const std::string& body) {
    std::string detail = "provider returned HTTP " + std::to_string(status);
    if (!body.empty()) detail += ": " + body;
    if (retryable_status(status)) {
        throw ModelError(ModelErrorKind::backend_unavailable, detail);
    }
    throw ModelError(ModelErrorKind::backend_rejected, detail);
}

TokenUsage usage_from_response(const nlohmann::json& doc, const std::vector<Message>& messages,
                               const std::string& content, ModelTier tier) {
    TokenUsage usage = usage_for(messages, content, tier);
    if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& u = doc["usage"];
        usage.prompt_tokens = u.value("prompt_tokens", usage.prompt_tokens);
        usage.completion_tokens = u.value("completion_tokens", usage.completion_tokens);
    }
    return usage;
}

}  // namespace

ChatResponse HttpBackend::complete(const ModelHandle& handle,
                                   const std::vector<Message>& messages) {
    const std::string base_url = param_string(handle.config.params, "base_url");
    if (base_url.empty()) {
        throw ModelError(ModelErrorKind::backend_rejected,
                         "no base_url configured for tier " + tier_name(handle.config.tier));
    }
    const ParsedBase base = parse_base_url(base_url);
    httplib::Client client(base.scheme_host_port);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);

    const auto body = build_request_body(handle, messages, false);
    auto result = client.Post(base.path_prefix + "/chat/completions", auth_headers(handle),
                              body.dump(), "application/json");
    if (!result) {
        throw ModelError(ModelErrorKind::backend_unavailable,
                         "transport failure contacting " + base_url + ": " +
                             httplib::to_string(result.error()));
    }
    if (result->status != 200) throw_for_status(result->status, result->body);

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(ModelErrorKind::backend_rejected,
                         std::string("malformed provider response: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw ModelError(ModelErrorKind::backend_rejected, "provider response has no choices");
    }
    const std::string content = doc["choices"][0].value("message", nlohmann::json::object())
                                    .value("content", "");
    return {content, usage_from_response(doc, messages, content, handle.config.tier)};
}

StreamResponse HttpBackend::stream(const ModelHandle& handle,
                                   const std::vector<Message>& messages) {
    const std::string base_url = param_string(handle.config.params, "base_url");
    if (base_url.empty()) {
        throw ModelError(ModelErrorKind::backend_rejected,
                         "no base_url configured for tier " + tier_name(handle.config.tier));
    }
    const ParsedBase base = parse_base_url(base_url);
    httplib::Client client(base.scheme_host_port);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);

    std::vector<std::string> chunks;
    std::string line_buffer;
    bool done = false;
    auto consume_line = [&](const std::string& line) {
        if (line.rfind("data:", 0) != 0) return;
        std::string payload = line.substr(5);
        const auto start = payload.find_first_not_of(' ');
        payload = (start == std::string::npos) ? "" : payload.substr(start);
        if (payload == "[DONE]") {
            done = true;
            return;
        }
        nlohmann::json event = nlohmann::json::parse(payload, nullptr, false);
        if (event.is_discarded()) return;
        if (event.contains("choices") && event["choices"].is_array() &&
            !event["choices"].empty()) {
            const auto& delta = event["choices"][0].value("delta", nlohmann::json::object());
            const std::string piece = delta.value("content", "");
            if (!piece.empty()) chunks.push_back(piece);
        }
    };

    httplib::Request request;
    request.method = "POST";
    request.path = base.path_prefix + "/chat/completions";
    request.headers = auth_headers(handle);
    request.set_header("Content-Type", "application/json");
    request.set_header("Accept", "text/event-stream");
    request.body = build_request_body(handle, messages, true).dump();
    request.content_receiver = [&](const char* data, std::size_t length, std::uint64_t,
                                   std::uint64_t) {
        line_buffer.append(data, length);
        std::size_t newline;
        while ((newline = line_buffer.find('\n')) != std::string::npos) {
            std::string line = line_buffer.substr(0, newline);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            line_buffer.erase(0, newline + 1);
            consume_line(line);
        }
        return true;
    };

    auto result = client.send(request);
    if (!result) {
        const std::string detail = "transport failure contacting " + base_url + ": " +
                                   httplib::to_string(result.error());
        if (!chunks.empty()) throw StreamInterrupted(detail, std::move(chunks));
        throw ModelError(ModelErrorKind::backend_unavailable, detail);
    }
    if (result->status != 200) throw_for_status(result->status, result->body);
    if (!line_buffer.empty()) consume_line(line_buffer);
    (void)done;

    StreamResponse response;
    response.chunks = std::move(chunks);
    response.usage = usage_for(messages, response.joined(), handle.config.tier);
    return response;
}

// ── Unconfigured backend ────────────────────────────────────────────────

ChatResponse UnconfiguredBackend::complete(const ModelHandle&, const std::vector<Message>&) {
    throw ModelError(ModelErrorKind::backend_rejected, reason_);
}

StreamResponse UnconfiguredBackend::stream(const ModelHandle&, const std::vector<Message>&) {
    throw ModelError(ModelErrorKind::backend_rejected, reason_);
}

// ── Resolution ──────────────────────────────────────────────────────────

ModelLayer::ModelLayer(ModelSettings settings)
    : settings_(std::move(settings)),
      http_backend_(std::make_shared<HttpBackend>()),
      vision_backend_(std::make_shared<UnconfiguredBackend>("vision backend not configured")) {}

void ModelLayer::set_backend(std::shared_ptr<ChatBackend> backend) {
    override_backend_ = std::move(backend);
}

std::shared_ptr<ChatBackend> ModelLayer::backend_for(ModelTier tier) const {
    if (override_backend_) return override_backend_;
    if (tier == ModelTier::vision) return vision_backend_;
    return http_backend_;
}

namespace {

ModelConfig merge_overrides(ModelConfig config, const ParamMap& overrides) {
    for (const auto& [key, value] : overrides) {
        if (key == "model_name" && value.is_string()) {
            config.model_name = value.get<std::string>();
        } else if (key == "provider" && value.is_string()) {
            config.provider = value.get<std::string>();
        } else {
            config.params[key] = value;
        }
    }
    return config;
}

}  // namespace

ModelHandle ModelLayer::resolve(const std::string& key, const ParamMap& overrides) const {
    if (auto tier = tier_from_name(key)) {
        auto it = settings_.tiers.find(*tier);
        if (it == settings_.tiers.end()) {
            throw ModelError(ModelErrorKind::unknown_key,
                             "no model configured for tier " + key);
        }
        return {key, merge_overrides(it->second, overrides), backend_for(*tier)};
    }
    auto agent = settings_.agent_map.entries.find(key);
    if (agent == settings_.agent_map.entries.end()) {
        throw ModelError(ModelErrorKind::unknown_key,
                         "'" + key + "' is neither a tier nor a mapped agent");
    }
    return resolve_for_agent(key, agent->second, overrides);
}

ModelHandle ModelLayer::resolve_for_agent(const std::string& agent, ModelTier tier,
                                          const ParamMap& overrides) const {
    auto it = settings_.tiers.find(tier);
    if (it == settings_.tiers.end()) {
        throw ModelError(ModelErrorKind::unknown_key,
                         "no model configured for tier " + tier_name(tier));
    }
    return {agent, merge_overrides(it->second, overrides), backend_for(tier)};
}

// ── Chat operations ─────────────────────────────────────────────────────

ChatResponse chat(const ModelHandle& handle, const std::vector<Message>& messages) {
    require_messages(messages);
    return handle.backend->complete(handle, messages);
}

StreamResponse chat_stream(const ModelHandle& handle, const std::vector<Message>& messages) {
    require_messages(messages);
    return handle.backend->stream(handle, messages);
}

StructuredResponse structured_chat(const ModelHandle& handle,
                                   const std::vector<Message>& messages,
                                   const ObjectSchema& schema) {
    const ChatResponse response = chat(handle, messages);
    RepairOutcome outcome;
    try {
        outcome = repair_json(response.content);
    } catch (const RepairError& e) {
        throw ModelError(ModelErrorKind::parse_failure,
                         "structured output for schema '" + schema.name +
                             "' is not JSON: " + e.what());
    }
    if (!outcome.value.is_object()) {
        throw ModelError(ModelErrorKind::schema_violation,
                         "structured output for schema '" + schema.name + "' is not an object");
    }
    for (const auto& field : schema.fields) {
        if (!outcome.value.contains(field.name)) {
            if (field.required) {
                throw ModelError(ModelErrorKind::schema_violation,
                                 "schema '" + schema.name + "' requires field '" + field.name +
                                     "'");
            }
            continue;
        }
        if (!field.allowed.empty()) {
            const auto& value = outcome.value[field.name];
            const bool allowed = value.is_string() &&
                                 std::find(field.allowed.begin(), field.allowed.end(),
                                           value.get<std::string>()) != field.allowed.end();
            if (!allowed) {
                throw ModelError(ModelErrorKind::schema_violation,
                                 "field '" + field.name + "' value " + value.dump() +
                                     " is outside the allowed set");
            }
        }
    }
    return {std::move(outcome.value), response.usage};
}

}  // namespace omninova
