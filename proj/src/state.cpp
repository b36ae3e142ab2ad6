#include "omninova/state.hpp"

#include <cstdint>

#include "omninova/graph.hpp"

namespace omninova {

bool StateUpdate::empty() const {
    return messages.empty() && !team_members && !team_member_configurations && !next &&
           !full_plan && !deep_thinking_mode && !search_before_planning;
}

AgentState apply_update(const AgentState& state, const StateUpdate& update) {
    AgentState out = state;
    for (const auto& message : update.messages) out.messages.push_back(message);
    if (update.team_members) out.team_members = *update.team_members;
    if (update.team_member_configurations) {
        out.team_member_configurations = *update.team_member_configurations;
    }
    if (update.next) out.next = *update.next;
    if (update.full_plan) out.full_plan = *update.full_plan;
    if (update.deep_thinking_mode) out.deep_thinking_mode = *update.deep_thinking_mode;
    if (update.search_before_planning) {
        out.search_before_planning = *update.search_before_planning;
    }
    return out;
}

StateUpdate state_update_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw GraphError(GraphErrorKind::unknown_field, "state update must be a JSON object");
    }
    StateUpdate update;
    for (const auto& [key, value] : doc.items()) {
        if (key == "messages") {
            for (const auto& entry : value) update.messages.push_back(message_from_json(entry));
        } else if (key == "team_members") {
            update.team_members = value.get<std::vector<std::string>>();
        } else if (key == "team_member_configurations") {
            std::map<std::string, nlohmann::ordered_json> configs;
            for (const auto& [agent, cfg] : value.items()) configs[agent] = cfg;
            update.team_member_configurations = std::move(configs);
        } else if (key == "next") {
            update.next = value.get<std::string>();
        } else if (key == "full_plan") {
            update.full_plan = value.get<std::string>();
        } else if (key == "deep_thinking_mode") {
            update.deep_thinking_mode = value.get<bool>();
        } else if (key == "search_before_planning") {
            update.search_before_planning = value.get<bool>();
        } else {
            throw GraphError(GraphErrorKind::unknown_field,
                             "state update names unknown field: " + key);
        }
    }
    return update;
}

std::string canonical_state_json(const AgentState& state) {
    // Plain nlohmann::json keeps object keys sorted, which pins the field
    // ordering of the serialized form.
    nlohmann::json doc;
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& message : state.messages) {
        nlohmann::json entry;
        entry["role"] = role_name(message.role);
        entry["name"] = message.name;
        entry["content"] = message.content;
        messages.push_back(std::move(entry));
    }
    doc["messages"] = std::move(messages);
    doc["team_members"] = state.team_members;
    nlohmann::json configs = nlohmann::json::object();
    for (const auto& [agent, cfg] : state.team_member_configurations) {
        configs[agent] = nlohmann::json(cfg);
    }
    doc["team_member_configurations"] = std::move(configs);
    doc["next"] = state.next;
    doc["full_plan"] = state.full_plan;
    doc["deep_thinking_mode"] = state.deep_thinking_mode;
    doc["search_before_planning"] = state.search_before_planning;
    return doc.dump();
}

std::string state_digest(const AgentState& state) {
    const std::string text = canonical_state_json(state);
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buffer);
}

}  // namespace omninova
