#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "omninova/state.hpp"

namespace omninova {

inline constexpr const char* kEndNode = "__end__";

enum class GraphErrorKind { duplicate_node, empty_graph, unknown_start, unknown_field };

class GraphError : public std::runtime_error {
public:
    GraphError(GraphErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    GraphErrorKind kind() const { return kind_; }

private:
    GraphErrorKind kind_;
};

// A node's verdict: the state delta to apply and the next node to visit.
struct Command {
    std::string goto_node;
    StateUpdate update;
};

using NodeHandler = std::function<Command(const AgentState&)>;

// Node registry with a start node. Routing is entirely dynamic via
// Command.goto_node; no static edges are materialized beyond the start.
class WorkflowGraph {
public:
    const std::string& start() const { return start_; }
    bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }
    const NodeHandler& handler(const std::string& id) const;
    std::vector<std::string> node_ids() const;

private:
    friend WorkflowGraph build_graph(const std::vector<std::pair<std::string, NodeHandler>>&,
                                     const std::string&);
    std::map<std::string, NodeHandler> nodes_;
    std::string start_;
};

// Validates and assembles a graph. Registration order is irrelevant.
// Throws GraphError{empty_graph, duplicate_node, unknown_start}.
WorkflowGraph build_graph(const std::vector<std::pair<std::string, NodeHandler>>& node_specs,
                          const std::string& start = "coordinator");

// One record per handler invocation.
struct TraceEvent {
    int step_index = 0;
    std::string node;
    std::string goto_node;
    std::string state_digest;
    std::map<std::string, long long> token_usage_delta;
};

bool operator==(const TraceEvent& a, const TraceEvent& b);

enum class RunErrorKind { step_budget_exceeded, unknown_node, handler_failure };

std::string run_error_name(RunErrorKind kind);

struct RunError {
    RunErrorKind kind;
    std::string message;
    std::string node;  // node being processed when the error surfaced
    int step = 0;      // handler invocations completed or attempted so far
};

struct RunResult {
    AgentState state;
    std::vector<TraceEvent> trace;
    std::optional<RunError> error;

    // True iff the run terminated by a handler routing to "__end__".
    bool reached_end() const { return !error.has_value(); }
};

struct RunOptions {
    int step_budget = 64;
    // Optional probe returning cumulative per-tier token totals; sampled
    // around each handler invocation to fill token_usage_delta.
    std::function<std::map<std::string, long long>()> usage_probe;
};

// Iterates Command transitions from the start node until a handler routes to
// "__end__", the step budget is exhausted, a goto names an unregistered node,
// or a handler throws. Never exits silently: either the last trace event has
// goto "__end__" or RunResult.error is engaged.
RunResult run(const WorkflowGraph& graph, AgentState initial, const RunOptions& options = {});

// Trace export: one JSON object per line, field names exactly
// step_index, node, goto, state_digest, token_usage_delta.
std::string trace_to_ndjson(const std::vector<TraceEvent>& trace);
void write_trace(const std::vector<TraceEvent>& trace, const std::filesystem::path& path);

}  // namespace omninova
