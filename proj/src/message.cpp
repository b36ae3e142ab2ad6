#include "omninova/message.hpp"

#include <stdexcept>

namespace omninova {

std::string role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "user";
}

Role role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    if (name == "tool") return Role::tool;
    throw std::invalid_argument("unknown message role: " + name);
}

bool operator==(const Message& a, const Message& b) {
    return a.role == b.role && a.name == b.name && a.content == b.content;
}

nlohmann::ordered_json message_to_json(const Message& message) {
    nlohmann::ordered_json doc;
    doc["role"] = role_name(message.role);
    if (!message.name.empty()) doc["name"] = message.name;
    doc["content"] = message.content;
    return doc;
}

Message message_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("message must be a JSON object");
    Message message;
    message.role = role_from_name(doc.value("role", "user"));
    message.name = doc.value("name", "");
    if (!doc.contains("content") || !doc.at("content").is_string()) {
        throw std::invalid_argument("message content must be a string");
    }
    message.content = doc.at("content").get<std::string>();
    return message;
}

}  // namespace omninova
