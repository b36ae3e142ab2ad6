#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "omninova/state.hpp"

namespace omninova {

enum class PromptErrorKind { template_not_found, malformed_placeholder, missing_context, budget_too_small };

class PromptError : public std::runtime_error {
public:
    PromptError(PromptErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    PromptErrorKind kind() const { return kind_; }

private:
    PromptErrorKind kind_;
};

// File-based template with {{name}} placeholders. No expressions or
// conditionals; rendering is plain variable injection.
struct Template {
    std::string name;
    std::string body;
    std::set<std::string> required_placeholders;
};

struct RenderBudget {
    long long max_tokens = 1;
};

enum class RenderMode { chat, completion };

// Reads <root>/<name>.md and extracts placeholders. Throws
// PromptError{template_not_found, malformed_placeholder}.
Template load_template(const std::string& name, const std::filesystem::path& root);

// Substitutes placeholders from state fields: scalars as text, booleans as
// "true"/"false", team_members comma-joined, configurations as JSON. Throws
// PromptError{missing_context} for a placeholder with no matching field.
std::string render_template(const Template& tmpl, const AgentState& state);

// Keeps the first (system) message plus the longest suffix of the remainder
// whose summed count_tokens fits the budget; drops whole messages only.
// Throws PromptError{budget_too_small} when the first message alone exceeds
// the budget.
std::vector<Message> truncate_history(const std::vector<Message>& messages,
                                      const RenderBudget& budget);

// "Response from {agent}:\n\n<response>\n{content}\n</response>\n\n
//  *Please execute the next step.*"
std::string format_team_response(const std::string& agent_name, const std::string& content);

// Flattens a message list to a single role-prefixed text block for
// completion-style models.
std::string flatten_messages(const std::vector<Message>& messages);

// Loads every *.md under a directory once; immutable afterwards and safe for
// shared concurrent reads.
class PromptLibrary {
public:
    explicit PromptLibrary(std::filesystem::path root);

    bool has(const std::string& name) const { return templates_.count(name) > 0; }
    const Template& get(const std::string& name) const;
    const std::filesystem::path& root() const { return root_; }

    // [system message = rendered template] ++ state.messages. Completion mode
    // collapses the result into one flattened message.
    std::vector<Message> apply(const std::string& name, const AgentState& state,
                               RenderMode mode = RenderMode::chat) const;

private:
    std::filesystem::path root_;
    std::map<std::string, Template> templates_;
};

}  // namespace omninova
