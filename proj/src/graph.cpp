#include "omninova/graph.hpp"

#include <fstream>
#include <set>

namespace omninova {

const NodeHandler& WorkflowGraph::handler(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        throw std::out_of_range("no handler registered for node: " + id);
    }
    return it->second;
}

std::vector<std::string> WorkflowGraph::node_ids() const {
    std::vector<std::string> ids;
    ids.reserve(nodes_.size());
    for (const auto& [id, handler] : nodes_) ids.push_back(id);
    return ids;
}

WorkflowGraph build_graph(const std::vector<std::pair<std::string, NodeHandler>>& node_specs,
                          const std::string& start) {
    if (node_specs.empty()) {
        throw GraphError(GraphErrorKind::empty_graph, "graph has no nodes");
    }
    WorkflowGraph graph;
    for (const auto& [id, handler] : node_specs) {
        if (graph.nodes_.count(id) > 0) {
            throw GraphError(GraphErrorKind::duplicate_node, "duplicate node identifier: " + id);
        }
        graph.nodes_.emplace(id, handler);
    }
    if (graph.nodes_.count(start) == 0) {
        throw GraphError(GraphErrorKind::unknown_start,
                         "start node is not registered: " + start);
    }
    graph.start_ = start;
    return graph;
}

bool operator==(const TraceEvent& a, const TraceEvent& b) {
    return a.step_index == b.step_index && a.node == b.node && a.goto_node == b.goto_node &&
           a.state_digest == b.state_digest && a.token_usage_delta == b.token_usage_delta;
}

std::string run_error_name(RunErrorKind kind) {
    switch (kind) {
        case RunErrorKind::step_budget_exceeded: return "step_budget_exceeded";
        case RunErrorKind::unknown_node: return "unknown_node";
        case RunErrorKind::handler_failure: return "handler_failure";
    }
    return "unknown";
}

namespace {

std::map<std::string, long long> probe_totals(const RunOptions& options) {
    if (!options.usage_probe) return {};
    return options.usage_probe();
}

std::map<std::string, long long> usage_delta(const std::map<std::string, long long>& before,
                                             const std::map<std::string, long long>& after) {
    std::map<std::string, long long> delta = after;
    for (auto& [tier, total] : delta) {
        auto it = before.find(tier);
        if (it != before.end()) total -= it->second;
    }
    return delta;
}

}  // namespace

RunResult run(const WorkflowGraph& graph, AgentState initial, const RunOptions& options) {
    RunResult result;
    result.state = std::move(initial);

    std::string node = graph.start();
    int step = 0;
    while (true) {
        if (step >= options.step_budget) {
            result.error = RunError{RunErrorKind::step_budget_exceeded,
                                    "step budget of " + std::to_string(options.step_budget) +
                                        " handler invocations exhausted at node '" + node + "'",
                                    node, step};
            return result;
        }

        const auto before = probe_totals(options);
        Command command;
        try {
            command = graph.handler(node)(result.state);
        } catch (const std::exception& e) {
            result.error = RunError{RunErrorKind::handler_failure,
                                    "handler for node '" + node + "' failed at step " +
                                        std::to_string(step) + ": " + e.what(),
                                    node, step};
            return result;
        }
        result.state = apply_update(result.state, command.update);

        TraceEvent event;
        event.step_index = step;
        event.node = node;
        event.goto_node = command.goto_node;
        event.state_digest = state_digest(result.state);
        event.token_usage_delta = usage_delta(before, probe_totals(options));
        result.trace.push_back(std::move(event));
        ++step;

        if (command.goto_node == kEndNode) return result;
        if (!graph.has_node(command.goto_node)) {
            result.error = RunError{RunErrorKind::unknown_node,
                                    "node '" + node + "' routed to unregistered node '" +
                                        command.goto_node + "'",
                                    command.goto_node, step};
            return result;
        }
        node = command.goto_node;
    }
}

std::string trace_to_ndjson(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const auto& event : trace) {
        nlohmann::ordered_json doc;
        doc["step_index"] = event.step_index;
        doc["node"] = event.node;
        doc["goto"] = event.goto_node;
        doc["state_digest"] = event.state_digest;
        doc["token_usage_delta"] = event.token_usage_delta;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

void write_trace(const std::vector<TraceEvent>& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path.string());
    out << trace_to_ndjson(trace);
}

}  // namespace omninova
