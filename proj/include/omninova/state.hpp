#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omninova/message.hpp"

namespace omninova {

// Shared workflow state passed between agent nodes. `next` is either empty,
// a team member, "reporter", or "__end__". `full_plan`, when non-empty, is
// strictly valid JSON text.
struct AgentState {
    std::vector<Message> messages;
    std::vector<std::string> team_members;
    std::map<std::string, nlohmann::ordered_json> team_member_configurations;
    std::string next;
    std::string full_plan;
    bool deep_thinking_mode = false;
    bool search_before_planning = false;
};

// Partial state delta carried by a Command. Messages are appended in order;
// every other engaged field overwrites the previous value.
struct StateUpdate {
    std::vector<Message> messages;
    std::optional<std::vector<std::string>> team_members;
    std::optional<std::map<std::string, nlohmann::ordered_json>> team_member_configurations;
    std::optional<std::string> next;
    std::optional<std::string> full_plan;
    std::optional<bool> deep_thinking_mode;
    std::optional<bool> search_before_planning;

    bool empty() const;
};

// Pure merge: returns a new state, leaves the input untouched.
AgentState apply_update(const AgentState& state, const StateUpdate& update);

// Parses an update from a JSON object. Throws GraphError{unknown_field} when
// the object names a field outside the AgentState schema.
StateUpdate state_update_from_json(const nlohmann::json& doc);

// Canonical serialization: field-name-sorted keys, minimal whitespace, UTF-8.
std::string canonical_state_json(const AgentState& state);

// Stable FNV-1a 64-bit digest of the canonical serialization, lowercase hex.
std::string state_digest(const AgentState& state);

}  // namespace omninova
