#include "omninova/agents.hpp"

#include <algorithm>
#include <iostream>

#include "omninova/json_repair.hpp"

namespace omninova {

ObjectSchema router_schema(const std::vector<std::string>& team_members) {
    ObjectSchema schema;
    schema.name = "Router";
    SchemaField next;
    next.name = "next";
    next.required = true;
    next.allowed = team_members;
    next.allowed.push_back("reporter");
    next.allowed.push_back(kFinishVerdict);
    schema.fields.push_back(std::move(next));
    return schema;
}

Plan plan_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("plan must be a JSON object");
    Plan plan;
    plan.thought = doc.value("thought", "");
    plan.title = doc.value("title", "");
    if (doc.contains("steps")) {
        if (!doc["steps"].is_array()) throw std::invalid_argument("plan steps must be an array");
        for (const auto& entry : doc["steps"]) {
            if (!entry.is_object() || !entry.contains("agent") || !entry["agent"].is_string()) {
                throw std::invalid_argument("every plan step needs an agent name");
            }
            PlanStep step;
            step.agent = entry["agent"].get<std::string>();
            step.description = entry.value("description", "");
            step.note = entry.value("note", "");
            plan.steps.push_back(std::move(step));
        }
    }
    return plan;
}

std::vector<std::string> validate_plan(const Plan& plan,
                                       const std::vector<std::string>& team_members) {
    std::vector<std::string> violations;
    if (plan.steps.empty()) violations.push_back("plan has no steps");
    for (const auto& step : plan.steps) {
        const bool known =
            step.agent == "reporter" ||
            std::find(team_members.begin(), team_members.end(), step.agent) != team_members.end();
        if (!known) violations.push_back("plan step targets unknown agent: " + step.agent);
    }
    return violations;
}

std::optional<ReactStep> parse_react_step(const std::string& model_output, std::string* reason) {
    RepairOutcome outcome;
    try {
        outcome = repair_json(model_output);
    } catch (const RepairError&) {
        // No JSON material at all: treat the prose as the final answer.
        ReactStep step;
        step.kind = ReactStep::Kind::final_answer;
        step.answer = model_output;
        return step;
    }
    if (!outcome.value.is_object()) {
        if (reason) *reason = "react envelope must be a JSON object";
        return std::nullopt;
    }
    if (outcome.value.contains("final_answer")) {
        ReactStep step;
        step.kind = ReactStep::Kind::final_answer;
        const auto& answer = outcome.value["final_answer"];
        step.answer = answer.is_string() ? answer.get<std::string>() : answer.dump();
        return step;
    }
    if (outcome.value.contains("tool")) {
        if (!outcome.value["tool"].is_string()) {
            if (reason) *reason = "\"tool\" must be a string";
            return std::nullopt;
        }
        ReactStep step;
        step.kind = ReactStep::Kind::tool_call;
        step.tool_name = outcome.value["tool"].get<std::string>();
        step.arguments = outcome.value.value("args", nlohmann::ordered_json::object());
        if (!step.arguments.is_object()) {
            if (reason) *reason = "\"args\" must be a JSON object";
            return std::nullopt;
        }
        return step;
    }
    if (reason) {
        *reason = "expected {\"tool\": name, \"args\": {...}} or {\"final_answer\": text}";
    }
    return std::nullopt;
}

namespace {

ModelHandle handle_for(const AgentRuntime& rt, const std::string& agent) {
    if (rt.force_basic_tier) return rt.models->resolve_for_agent(agent, ModelTier::basic);
    return rt.models->resolve(agent);
}

std::vector<Message> rendered_messages(const AgentRuntime& rt, const std::string& agent,
                                       const AgentState& state) {
    auto messages = rt.prompts->apply(agent, state);
    return truncate_history(messages, RenderBudget{rt.history_budget});
}

void note_usage(const AgentRuntime& rt, const TokenUsage& usage) {
    if (rt.ledger) rt.ledger->add(usage);
}

std::string last_user_content(const AgentState& state) {
    for (auto it = state.messages.rbegin(); it != state.messages.rend(); ++it) {
        if (it->role == Role::user) return it->content;
    }
    return state.messages.empty() ? "" : state.messages.back().content;
}

}  // namespace

Command coordinator_node(const AgentRuntime& rt, const AgentState& state) {
    const auto messages = rendered_messages(rt, "coordinator", state);
    const ChatResponse response = chat(handle_for(rt, "coordinator"), messages);
    note_usage(rt, response.usage);

    Command command;
    if (response.content.find(kHandoffMarker) != std::string::npos) {
        command.goto_node = "planner";
        return command;
    }
    command.goto_node = kEndNode;
    command.update.messages.push_back(Message::assistant(response.content, "coordinator"));
    return command;
}

Command planner_node(const AgentRuntime& rt, const AgentState& state) {
    const ModelTier tier = (state.deep_thinking_mode && !rt.force_basic_tier)
                               ? ModelTier::reasoning
                               : ModelTier::basic;
    const ModelHandle handle = rt.models->resolve_for_agent("planner", tier);

    auto messages = rendered_messages(rt, "planner", state);
    if (state.search_before_planning && rt.tools != nullptr) {
        nlohmann::json args;
        args["query"] = last_user_content(state);
        const ToolResult searched = rt.tools->invoke("tavily_search", args);
        if (searched.ok) {
            messages.back().content += "\n\n# Search Results\n\n" + searched.content;
        } else {
            // Search failure degrades to planning without background results.
            std::cerr << "planner: search degraded: " << searched.content << "\n";
        }
    }

    const StreamResponse streamed = chat_stream(handle, messages);
    note_usage(rt, streamed.usage);
    const std::string full_response = streamed.joined();

    Command command;
    try {
        const RepairOutcome outcome = repair_json(full_response);
        const std::string plan_text = to_canonical_text(outcome.value);
        command.goto_node = "supervisor";
        command.update.messages.push_back(Message::user(plan_text, "planner"));
        command.update.full_plan = plan_text;
    } catch (const RepairError&) {
        command.goto_node = kEndNode;
    }
    return command;
}

Command supervisor_node(const AgentRuntime& rt, const AgentState& state) {
    auto messages = rendered_messages(rt, "supervisor", state);
    // Wrap team-member responses for the routing request only; the stored
    // state stays untouched.
    for (auto& message : messages) {
        if (message.name.empty()) continue;
        const bool is_team_member = std::find(state.team_members.begin(),
                                              state.team_members.end(),
                                              message.name) != state.team_members.end();
        if (is_team_member) {
            message.content = format_team_response(message.name, message.content);
        }
    }

    const StructuredResponse response =
        structured_chat(handle_for(rt, "supervisor"), messages, router_schema(state.team_members));
    note_usage(rt, response.usage);

    std::string next = response.value["next"].get<std::string>();
    if (next == kFinishVerdict) next = kEndNode;

    Command command;
    command.goto_node = next;
    command.update.next = next;
    return command;
}

Command specialist_node(const AgentRuntime& rt, const std::string& agent_name,
                        const AgentState& state) {
    auto messages = rendered_messages(rt, agent_name, state);
    const ModelHandle handle = handle_for(rt, agent_name);

    int tool_calls_used = 0;
    for (int iteration = 0; iteration <= rt.tool_budget; ++iteration) {
        const ChatResponse response = chat(handle, messages);
        note_usage(rt, response.usage);

        std::string reason;
        const auto step = parse_react_step(response.content, &reason);
        if (!step) {
            messages.push_back(Message::assistant(response.content, agent_name));
            messages.push_back(Message::tool("invalid react envelope: " + reason, "system"));
            continue;
        }
        if (step->kind == ReactStep::Kind::final_answer) {
            Command command;
            command.goto_node = "supervisor";
            command.update.messages.push_back(Message::user(step->answer, agent_name));
            return command;
        }
        if (tool_calls_used >= rt.tool_budget) break;
        const ToolResult result = rt.tools->invoke(step->tool_name, step->arguments);
        ++tool_calls_used;
        messages.push_back(Message::assistant(response.content, agent_name));
        const std::string observation =
            result.ok ? result.content
                      : "error(" + tool_error_name(*result.error_kind) + "): " + result.content;
        messages.push_back(Message::tool(observation, step->tool_name));
    }

    Command command;
    command.goto_node = "supervisor";
    command.update.messages.push_back(Message::user(
        "tool budget exceeded after " + std::to_string(tool_calls_used) +
            " tool calls; stopping without a final answer.",
        agent_name));
    return command;
}

Command reporter_node(const AgentRuntime& rt, const AgentState& state) {
    const auto messages = rendered_messages(rt, "reporter", state);
    const ChatResponse response = chat(handle_for(rt, "reporter"), messages);
    note_usage(rt, response.usage);

    Command command;
    command.goto_node = "supervisor";
    command.update.messages.push_back(Message::user(response.content, "reporter"));
    return command;
}

WorkflowGraph build_workflow(const AgentRuntime& rt) {
    std::vector<std::pair<std::string, NodeHandler>> specs;
    specs.emplace_back("coordinator",
                       [rt](const AgentState& s) { return coordinator_node(rt, s); });
    specs.emplace_back("planner", [rt](const AgentState& s) { return planner_node(rt, s); });
    specs.emplace_back("supervisor",
                       [rt](const AgentState& s) { return supervisor_node(rt, s); });
    for (const std::string agent : default_team_members()) {
        specs.emplace_back(agent, [rt, agent](const AgentState& s) {
            return specialist_node(rt, agent, s);
        });
    }
    specs.emplace_back("reporter", [rt](const AgentState& s) { return reporter_node(rt, s); });
    return build_graph(specs, "coordinator");
}

}  // namespace omninova
