#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace omninova {

enum class Role { system, user, assistant, tool };

std::string role_name(Role role);
Role role_from_name(const std::string& name);  // throws std::invalid_argument

// One conversation entry. `name` attributes the message to an agent or tool
// and is empty when the message has no attribution.
struct Message {
    Role role = Role::user;
    std::string name;
    std::string content;

    static Message system(std::string content) { return {Role::system, "", std::move(content)}; }
    static Message user(std::string content, std::string name = "") {
        return {Role::user, std::move(name), std::move(content)};
    }
    static Message assistant(std::string content, std::string name = "") {
        return {Role::assistant, std::move(name), std::move(content)};
    }
    static Message tool(std::string content, std::string name) {
        return {Role::tool, std::move(name), std::move(content)};
    }
};

bool operator==(const Message& a, const Message& b);

nlohmann::ordered_json message_to_json(const Message& message);
Message message_from_json(const nlohmann::json& doc);  // throws std::invalid_argument

}  // namespace omninova
