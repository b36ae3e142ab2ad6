#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omninova/graph.hpp"
#include "omninova/model.hpp"
#include "omninova/prompts.hpp"
#include "omninova/tools.hpp"

namespace omninova {

inline constexpr const char* kHandoffMarker = "handoff_to_planner";
inline constexpr const char* kFinishVerdict = "FINISH";

// Structured routing decision emitted by the supervisor.
struct Router {
    std::string next;
};

ObjectSchema router_schema(const std::vector<std::string>& team_members);

// Structured JSON representation of the task plan.
struct PlanStep {
    std::string agent;
    std::string description;
    std::string note;
};

struct Plan {
    std::string thought;
    std::string title;
    std::vector<PlanStep> steps;
};

// Lenient extraction: unknown fields pass through untouched, missing optional
// fields default. Throws std::invalid_argument when the document is not an
// object or a step lacks an agent.
Plan plan_from_json(const nlohmann::json& doc);

// Invariant check: steps non-empty, every step agent within
// team ∪ {"reporter"}. Returns violations, empty when valid.
std::vector<std::string> validate_plan(const Plan& plan, const std::vector<std::string>& team_members);

// One turn of a specialist's react loop.
struct ReactStep {
    enum class Kind { tool_call, final_answer };
    Kind kind = Kind::final_answer;
    std::string tool_name;
    nlohmann::ordered_json arguments;
    std::string answer;
};

// Parses the tool-call envelope {"tool": name, "args": {...}} or
// {"final_answer": text}. Plain prose with no JSON material is treated as a
// final answer. Returns nullopt (with a reason) for JSON that matches
// neither shape, letting the loop feed the error back as an observation.
std::optional<ReactStep> parse_react_step(const std::string& model_output, std::string* reason);

// Everything a node handler needs. Pointees must outlive the run; the ledger
// is owned per-run and touched only from the run loop thread.
struct AgentRuntime {
    const ModelLayer* models = nullptr;
    const PromptLibrary* prompts = nullptr;
    ToolRegistry* tools = nullptr;
    TokenLedger* ledger = nullptr;
    long long history_budget = 8192;
    int tool_budget = 8;
    // Single-tier ablation: every resolution collapses to basic.
    bool force_basic_tier = false;
};

// Triage: answers directly or hands off to the planner when the response
// contains the handoff marker.
Command coordinator_node(const AgentRuntime& rt, const AgentState& state);

// Streams the plan, repairs it into strict JSON, and routes to the
// supervisor; an irreparable plan ends the run.
Command planner_node(const AgentRuntime& rt, const AgentState& state);

// Structured routing over the Router schema; FINISH maps to "__end__".
Command supervisor_node(const AgentRuntime& rt, const AgentState& state);

// React loop: alternates model calls and tool executions until a final
// answer or the tool budget runs out, then returns to the supervisor.
Command specialist_node(const AgentRuntime& rt, const std::string& agent_name,
                        const AgentState& state);

// Consolidates specialist output into the final report, then returns to the
// supervisor (which issues FINISH).
Command reporter_node(const AgentRuntime& rt, const AgentState& state);

// The seven-node workflow: coordinator (start), planner, supervisor,
// researcher, coder, browser, reporter.
WorkflowGraph build_workflow(const AgentRuntime& rt);

inline const std::vector<std::string>& all_agent_names() {
    static const std::vector<std::string> names = {"coordinator", "planner",  "supervisor",
                                                   "researcher",  "coder",    "browser",
                                                   "reporter"};
    return names;
}

inline const std::vector<std::string>& default_team_members() {
    static const std::vector<std::string> team = {"researcher", "coder", "browser"};
    return team;
}

}  // namespace omninova
