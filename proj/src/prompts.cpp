#include "omninova/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "omninova/model.hpp"

namespace omninova {

namespace {

bool is_placeholder_name(const std::string& name) {
    if (name.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
    for (char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

std::set<std::string> scan_placeholders(const std::string& name, const std::string& body) {
    std::set<std::string> placeholders;
    std::size_t pos = 0;
    while ((pos = body.find("{{", pos)) != std::string::npos) {
        const std::size_t close = body.find("}}", pos + 2);
        if (close == std::string::npos) {
            throw PromptError(PromptErrorKind::malformed_placeholder,
                              "template '" + name + "' has an unbalanced placeholder at offset " +
                                  std::to_string(pos));
        }
        const std::string inner = body.substr(pos + 2, close - pos - 2);
        if (!is_placeholder_name(inner)) {
            throw PromptError(PromptErrorKind::malformed_placeholder,
                              "template '" + name + "' has a malformed placeholder {{" + inner +
                                  "}}");
        }
        placeholders.insert(inner);
        pos = close + 2;
    }
    return placeholders;
}

std::string join_team(const std::vector<std::string>& team) {
    std::string out;
    for (std::size_t i = 0; i < team.size(); ++i) {
        if (i > 0) out += ", ";
        out += team[i];
    }
    return out;
}

std::string resolve_placeholder(const std::string& name, const AgentState& state) {
    if (name == "team_members") return join_team(state.team_members);
    if (name == "next") return state.next;
    if (name == "full_plan") return state.full_plan;
    if (name == "deep_thinking_mode") return state.deep_thinking_mode ? "true" : "false";
    if (name == "search_before_planning") return state.search_before_planning ? "true" : "false";
    if (name == "team_member_configurations") {
        nlohmann::json doc = nlohmann::json::object();
        for (const auto& [agent, cfg] : state.team_member_configurations) {
            doc[agent] = nlohmann::json(cfg);
        }
        return doc.dump();
    }
    throw PromptError(PromptErrorKind::missing_context,
                      "no state field matches placeholder {{" + name + "}}");
}

}  // namespace

Template load_template(const std::string& name, const std::filesystem::path& root) {
    const std::filesystem::path file = root / (name + ".md");
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw PromptError(PromptErrorKind::template_not_found,
                          "template file not found: " + file.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    Template tmpl;
    tmpl.name = name;
    tmpl.body = buffer.str();
    tmpl.required_placeholders = scan_placeholders(name, tmpl.body);
    return tmpl;
}

std::string render_template(const Template& tmpl, const AgentState& state) {
    std::string out;
    out.reserve(tmpl.body.size());
    std::size_t pos = 0;
    while (pos < tmpl.body.size()) {
        const std::size_t open = tmpl.body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl.body, pos, std::string::npos);
            break;
        }
        out.append(tmpl.body, pos, open - pos);
        const std::size_t close = tmpl.body.find("}}", open + 2);
        if (close == std::string::npos) {
            throw PromptError(PromptErrorKind::malformed_placeholder,
                              "template '" + tmpl.name + "' has an unbalanced placeholder");
        }
        const std::string name = tmpl.body.substr(open + 2, close - open - 2);
        out += resolve_placeholder(name, state);
        pos = close + 2;
    }
    return out;
}

std::vector<Message> truncate_history(const std::vector<Message>& messages,
                                      const RenderBudget& budget) {
    if (messages.empty()) return {};
    const long long head_cost = count_tokens(messages.front().content);
    if (head_cost > budget.max_tokens) {
        throw PromptError(PromptErrorKind::budget_too_small,
                          "system message alone needs " + std::to_string(head_cost) +
                              " tokens against a budget of " + std::to_string(budget.max_tokens));
    }
    long long remaining = budget.max_tokens - head_cost;
    // Longest suffix of the remainder that fits; whole messages only.
    std::size_t keep_from = messages.size();
    for (std::size_t i = messages.size(); i > 1; --i) {
        const long long cost = count_tokens(messages[i - 1].content);
        if (cost > remaining) break;
        remaining -= cost;
        keep_from = i - 1;
    }
    std::vector<Message> out;
    out.push_back(messages.front());
    for (std::size_t i = std::max<std::size_t>(keep_from, 1); i < messages.size(); ++i) {
        out.push_back(messages[i]);
    }
    return out;
}

std::string format_team_response(const std::string& agent_name, const std::string& content) {
    return "Response from " + agent_name + ":\n\n<response>\n" + content +
           "\n</response>\n\n*Please execute the next step.*";
}

std::string flatten_messages(const std::vector<Message>& messages) {
    std::string out;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += role_name(messages[i].role);
        if (!messages[i].name.empty()) out += "(" + messages[i].name + ")";
        out += ": " + messages[i].content;
    }
    return out;
}

PromptLibrary::PromptLibrary(std::filesystem::path root) : root_(std::move(root)) {
    if (!std::filesystem::is_directory(root_)) {
        throw PromptError(PromptErrorKind::template_not_found,
                          "prompt directory not found: " + root_.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".md") continue;
        const std::string name = entry.path().stem().string();
        templates_.emplace(name, load_template(name, root_));
    }
}

const Template& PromptLibrary::get(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw PromptError(PromptErrorKind::template_not_found,
                          "no template named '" + name + "' under " + root_.string());
    }
    return it->second;
}

std::vector<Message> PromptLibrary::apply(const std::string& name, const AgentState& state,
                                          RenderMode mode) const {
    std::vector<Message> out;
    out.push_back(Message::system(render_template(get(name), state)));
    out.insert(out.end(), state.messages.begin(), state.messages.end());
    if (mode == RenderMode::completion) {
        return {Message::user(flatten_messages(out))};
    }
    return out;
}

}  // namespace omninova
