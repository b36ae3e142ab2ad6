#include "omninova/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <set>

#include "omninova/agents.hpp"

extern char** environ;

namespace omninova {

Config default_config() {
    Config config;
    config.models = default_model_settings().tiers;
    config.agent_llm_map = default_agent_model_map();
    config.team_members = default_team_members();
    return config;
}

nlohmann::ordered_json Config::to_json() const {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json models_doc;
    for (ModelTier tier : kAllTiers) {
        auto it = models.find(tier);
        if (it == models.end()) continue;
        nlohmann::ordered_json entry;
        entry["provider"] = it->second.provider;
        entry["model_name"] = it->second.model_name;
        entry["params"] = it->second.params;  // std::map keeps keys sorted
        models_doc[tier_name(tier)] = std::move(entry);
    }
    doc["models"] = std::move(models_doc);
    nlohmann::ordered_json map_doc;
    for (const auto& [agent, tier] : agent_llm_map.entries) map_doc[agent] = tier_name(tier);
    doc["agent_llm_map"] = std::move(map_doc);
    doc["team_members"] = team_members;
    doc["prompts_dir"] = prompts_dir.string();
    doc["sandbox_root"] = sandbox_root.string();
    doc["step_budget"] = step_budget;
    doc["tool_budget"] = tool_budget;
    doc["history_budget"] = history_budget;
    doc["search_endpoint"] = search_endpoint;
    return doc;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

std::string lower(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto& item : split(text, ',')) {
        const auto begin = item.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const auto end = item.find_last_not_of(" \t");
        out.push_back(item.substr(begin, end - begin + 1));
    }
    return out;
}

// One scalar assignment into the config by dotted path; returns an error
// description on failure.
std::optional<std::string> set_scalar(Config& config, const std::vector<std::string>& path,
                                      const std::string& value) {
    auto parse_int = [&](long long min_ok) -> std::optional<long long> {
        try {
            std::size_t idx = 0;
            const long long parsed = std::stoll(value, &idx);
            if (idx != value.size()) return std::nullopt;
            (void)min_ok;
            return parsed;
        } catch (...) {
            return std::nullopt;
        }
    };

    if (path.size() == 1) {
        const std::string& key = path[0];
        if (key == "step_budget" || key == "tool_budget" || key == "history_budget") {
            const auto parsed = parse_int(1);
            if (!parsed) return "value for " + key + " is not an integer: " + value;
            if (key == "step_budget") config.step_budget = static_cast<int>(*parsed);
            else if (key == "tool_budget") config.tool_budget = static_cast<int>(*parsed);
            else config.history_budget = *parsed;
            return std::nullopt;
        }
        if (key == "prompts_dir") {
            config.prompts_dir = value;
            return std::nullopt;
        }
        if (key == "sandbox_root") {
            config.sandbox_root = value;
            return std::nullopt;
        }
        if (key == "search_endpoint") {
            config.search_endpoint = value;
            return std::nullopt;
        }
        if (key == "team_members") {
            config.team_members = split_csv_list(value);
            return std::nullopt;
        }
        return "unknown configuration key: " + key;
    }

    if (path[0] == "agent_llm_map" && path.size() == 2) {
        const auto tier = tier_from_name(value);
        if (!tier) return "agent_llm_map." + path[1] + " names unknown tier: " + value;
        config.agent_llm_map.entries[path[1]] = *tier;
        return std::nullopt;
    }

    if (path[0] == "models" && path.size() >= 3) {
        const auto tier = tier_from_name(path[1]);
        if (!tier) return "models." + path[1] + " is not a tier";
        ModelConfig& model = config.models[*tier];
        model.tier = *tier;
        if (path.size() == 3 && path[2] == "model_name") {
            model.model_name = value;
            return std::nullopt;
        }
        if (path.size() == 3 && path[2] == "provider") {
            model.provider = value;
            return std::nullopt;
        }
        // Everything else is a scalar param; numbers stay numeric.
        std::string param = path[2];
        for (std::size_t i = 3; i < path.size(); ++i) param += "." + path[i];
        const nlohmann::json probe = nlohmann::json::parse(value, nullptr, false);
        if (!probe.is_discarded() && (probe.is_number() || probe.is_boolean())) {
            model.params[param] = probe;
        } else {
            model.params[param] = value;
        }
        return std::nullopt;
    }

    std::string joined = path[0];
    for (std::size_t i = 1; i < path.size(); ++i) joined += "." + path[i];
    return "unknown configuration key: " + joined;
}

void apply_yaml(Config& config, const YAML::Node& node, std::vector<std::string>& errors,
                std::vector<std::string> prefix = {}) {
    for (const auto& entry : node) {
        const std::string key = entry.first.as<std::string>();
        std::vector<std::string> path = prefix;
        path.push_back(key);
        const YAML::Node& value = entry.second;
        if (value.IsMap()) {
            apply_yaml(config, value, errors, path);
        } else if (value.IsSequence()) {
            if (path.size() == 1 && key == "team_members") {
                std::vector<std::string> team;
                for (const auto& item : value) team.push_back(item.as<std::string>());
                config.team_members = std::move(team);
            } else {
                std::string joined = path[0];
                for (std::size_t i = 1; i < path.size(); ++i) joined += "." + path[i];
                errors.push_back("unexpected list for configuration key: " + joined);
            }
        } else {
            if (auto err = set_scalar(config, path, value.as<std::string>())) {
                errors.push_back(*err);
            }
        }
    }
}

std::vector<std::string> validate(const Config& config) {
    std::vector<std::string> violations;
    if (config.step_budget < 1) violations.push_back("step_budget must be >= 1");
    if (config.tool_budget < 1) violations.push_back("tool_budget must be >= 1");
    if (config.history_budget < 1) violations.push_back("history_budget must be >= 1");

    if (config.team_members.empty()) {
        violations.push_back("team_members must be non-empty");
    }
    std::set<std::string> seen;
    for (const auto& member : config.team_members) {
        if (!seen.insert(member).second) {
            violations.push_back("team_members has duplicate entry: " + member);
        }
        const auto& known = default_team_members();
        if (std::find(known.begin(), known.end(), member) == known.end()) {
            violations.push_back("team member has no registered handler: " + member);
        }
    }

    for (ModelTier tier : kAllTiers) {
        auto it = config.models.find(tier);
        if (it == config.models.end()) {
            violations.push_back("no model configured for tier " + tier_name(tier));
        } else if (it->second.model_name.empty()) {
            violations.push_back("models." + tier_name(tier) + ".model_name must be non-empty");
        }
    }

    for (const std::string& agent : all_agent_names()) {
        if (config.agent_llm_map.entries.count(agent) == 0) {
            violations.push_back("agent_llm_map is missing entry for " + agent);
        }
        const auto file = config.prompts_dir / (agent + ".md");
        if (!std::filesystem::is_regular_file(file)) {
            violations.push_back("prompt file missing: " + file.string());
        }
    }
    return violations;
}

}  // namespace

std::map<std::string, std::string> env_snapshot() {
    std::map<std::string, std::string> out;
    for (char** entry = environ; entry != nullptr && *entry != nullptr; ++entry) {
        const std::string pair(*entry);
        if (pair.rfind(kEnvPrefix, 0) != 0) continue;
        const auto eq = pair.find('=');
        if (eq == std::string::npos) continue;
        out[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    return out;
}

Config load_config(const std::optional<std::filesystem::path>& file_path,
                   const std::map<std::string, std::string>& env_map,
                   const std::map<std::string, std::string>& runtime_overrides) {
    Config config = default_config();
    std::vector<std::string> errors;

    if (file_path) {
        YAML::Node root;
        try {
            root = YAML::LoadFile(file_path->string());
        } catch (const YAML::Exception& e) {
            throw ConfigError(ConfigErrorKind::parse_error,
                              "cannot load config file " + file_path->string() + ": " + e.what());
        }
        if (!root.IsNull() && !root.IsMap()) {
            throw ConfigError(ConfigErrorKind::parse_error,
                              "config file must be a key-value document: " + file_path->string());
        }
        if (root.IsMap()) apply_yaml(config, root, errors);
    }

    for (const auto& [key, value] : env_map) {
        if (key.rfind(kEnvPrefix, 0) != 0) continue;
        const std::string stripped = key.substr(std::string(kEnvPrefix).size());
        // Double underscore separates nesting levels.
        std::vector<std::string> segments;
        std::size_t pos = 0;
        while (true) {
            const std::size_t sep = stripped.find("__", pos);
            if (sep == std::string::npos) {
                segments.push_back(lower(stripped.substr(pos)));
                break;
            }
            segments.push_back(lower(stripped.substr(pos, sep - pos)));
            pos = sep + 2;
        }
        if (auto err = set_scalar(config, segments, value)) errors.push_back(*err);
    }

    for (const auto& [key, value] : runtime_overrides) {
        if (auto err = set_scalar(config, split(key, '.'), value)) errors.push_back(*err);
    }

    auto violations = validate(config);
    errors.insert(errors.end(), violations.begin(), violations.end());
    if (!errors.empty()) {
        std::string summary = "configuration is invalid:";
        for (const auto& error : errors) summary += "\n  - " + error;
        throw ConfigError(ConfigErrorKind::validation_error, summary, errors);
    }
    return config;
}

}  // namespace omninova
