#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "omninova/model.hpp"

namespace omninova {

enum class ConfigErrorKind { parse_error, validation_error };

class ConfigError : public std::runtime_error {
public:
    ConfigError(ConfigErrorKind kind, const std::string& message,
                std::vector<std::string> violations = {})
        : std::runtime_error(message), kind_(kind), violations_(std::move(violations)) {}
    ConfigErrorKind kind() const { return kind_; }
    // Every violated constraint, not just the first.
    const std::vector<std::string>& violations() const { return violations_; }

private:
    ConfigErrorKind kind_;
    std::vector<std::string> violations_;
};

struct Config {
    std::map<ModelTier, ModelConfig> models;
    AgentModelMap agent_llm_map;
    std::vector<std::string> team_members;
    std::filesystem::path prompts_dir = "prompts";
    std::filesystem::path sandbox_root = "sandbox";
    int step_budget = 64;
    int tool_budget = 8;
    long long history_budget = 8192;
    std::string search_endpoint = "https://api.tavily.com/search";

    // Deterministic serialization: identical configs yield identical bytes.
    nlohmann::ordered_json to_json() const;

    ModelSettings model_settings() const { return {models, agent_llm_map}; }
};

Config default_config();

// Env var scheme: OMNINOVA_ prefix, upper-snake config path, double
// underscore for nesting (OMNINOVA_STEP_BUDGET, OMNINOVA_MODELS__BASIC__MODEL_NAME).
inline constexpr const char* kEnvPrefix = "OMNINOVA_";

// Snapshot of OMNINOVA_-prefixed process environment variables.
std::map<std::string, std::string> env_snapshot();

// Layered load: runtime overrides > env > file > built-in defaults, followed
// by full validation. Overrides are keyed by dotted config path. Throws
// ConfigError{parse_error} for an unreadable or unparseable file and
// ConfigError{validation_error} listing every violated constraint.
Config load_config(const std::optional<std::filesystem::path>& file_path,
                   const std::map<std::string, std::string>& env_map = {},
                   const std::map<std::string, std::string>& runtime_overrides = {});

}  // namespace omninova
