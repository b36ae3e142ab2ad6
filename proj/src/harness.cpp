#include "omninova/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>

namespace omninova {

std::string ablation_name(AblationMode mode) {
    switch (mode) {
        case AblationMode::full: return "full";
        case AblationMode::no_hierarchy: return "no_hierarchy";
        case AblationMode::single_tier: return "single_tier";
        case AblationMode::no_planning: return "no_planning";
        case AblationMode::no_supervisor: return "no_supervisor";
    }
    return "full";
}

std::optional<AblationMode> ablation_from_name(const std::string& name) {
    if (name == "full") return AblationMode::full;
    if (name == "no_hierarchy") return AblationMode::no_hierarchy;
    if (name == "single_tier") return AblationMode::single_tier;
    if (name == "no_planning") return AblationMode::no_planning;
    if (name == "no_supervisor") return AblationMode::no_supervisor;
    return std::nullopt;
}

namespace {

std::vector<SearchResult> search_results_from_json(const nlohmann::json& arr) {
    std::vector<SearchResult> results;
    for (const auto& entry : arr) {
        results.push_back({entry.value("title", ""), entry.value("url", ""),
                           entry.value("content", "")});
    }
    return results;
}

}  // namespace

ScenarioFixture scenario_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("scenario fixture must be a JSON object");
    ScenarioFixture fixture;
    if (!doc.contains("responses")) {
        // Bare mock fixture: the whole document is the response map.
        fixture.responses = doc;
        return fixture;
    }
    fixture.name = doc.value("name", "");
    fixture.query = doc.value("query", "");
    fixture.deep_thinking_mode = doc.value("deep_thinking_mode", false);
    fixture.search_before_planning = doc.value("search_before_planning", false);
    fixture.responses = doc.at("responses");
    if (doc.contains("expected_path")) {
        fixture.expected_path = doc.at("expected_path").get<std::vector<std::string>>();
    }
    if (doc.contains("tools")) {
        const auto& tools = doc.at("tools");
        if (tools.contains("search") && tools["search"].is_array() &&
            !tools["search"].empty()) {
            if (tools["search"][0].is_array()) {
                for (const auto& call : tools["search"]) {
                    fixture.search_calls.push_back(search_results_from_json(call));
                }
            } else {
                fixture.search_calls.push_back(search_results_from_json(tools["search"]));
                fixture.search_reuse = true;
            }
        }
        if (tools.contains("pages")) {
            for (const auto& [url, body] : tools["pages"].items()) {
                fixture.pages[url] = body.get<std::string>();
            }
        }
        if (tools.contains("browser")) {
            for (const auto& [url, body] : tools["browser"].items()) {
                fixture.browser_pages[url] = body.get<std::string>();
            }
        }
        if (tools.contains("exec")) {
            for (const auto& entry : tools["exec"]) {
                ExecResult result;
                result.stdout_text = entry.value("stdout", "");
                result.stderr_text = entry.value("stderr", "");
                result.exit_code = entry.value("exit_code", 0);
                fixture.exec_results.push_back(std::move(result));
            }
        }
    }
    return fixture;
}

ScenarioFixture load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario fixture: " + path.string());
    nlohmann::json doc;
    in >> doc;
    ScenarioFixture fixture = scenario_from_json(doc);
    if (fixture.name.empty()) fixture.name = path.stem().string();
    return fixture;
}

namespace {

std::filesystem::path unique_run_dir(const std::filesystem::path& sandbox_root) {
    static std::atomic<int> counter{0};
    return sandbox_root / ("run-" + std::to_string(counter.fetch_add(1)));
}

// Flat network: coordinator hands to the first specialist, specialists chain
// round-robin, the last one hands to the reporter, the reporter ends the run.
WorkflowGraph wire_no_hierarchy(const AgentRuntime& rt, const std::vector<std::string>& team) {
    std::vector<std::pair<std::string, NodeHandler>> specs;
    const std::string first = team.empty() ? std::string("reporter") : team.front();
    specs.emplace_back("coordinator", [rt, first](const AgentState& s) {
        Command command = coordinator_node(rt, s);
        if (command.goto_node == "planner") command.goto_node = first;
        return command;
    });
    for (std::size_t i = 0; i < team.size(); ++i) {
        const std::string agent = team[i];
        const std::string next = (i + 1 < team.size()) ? team[i + 1] : "reporter";
        specs.emplace_back(agent, [rt, agent, next](const AgentState& s) {
            Command command = specialist_node(rt, agent, s);
            command.goto_node = next;
            return command;
        });
    }
    specs.emplace_back("reporter", [rt](const AgentState& s) {
        Command command = reporter_node(rt, s);
        command.goto_node = kEndNode;
        return command;
    });
    return build_graph(specs, "coordinator");
}

// Planning removed: the coordinator hands straight to the supervisor and
// full_plan stays empty.
WorkflowGraph wire_no_planning(const AgentRuntime& rt, const std::vector<std::string>& team) {
    std::vector<std::pair<std::string, NodeHandler>> specs;
    specs.emplace_back("coordinator", [rt](const AgentState& s) {
        Command command = coordinator_node(rt, s);
        if (command.goto_node == "planner") command.goto_node = "supervisor";
        return command;
    });
    specs.emplace_back("supervisor", [rt](const AgentState& s) { return supervisor_node(rt, s); });
    for (const std::string& agent : team) {
        specs.emplace_back(agent, [rt, agent](const AgentState& s) {
            return specialist_node(rt, agent, s);
        });
    }
    specs.emplace_back("reporter", [rt](const AgentState& s) { return reporter_node(rt, s); });
    return build_graph(specs, "coordinator");
}

// Supervisor removed: plan steps execute in order, the reporter runs last,
// and no routing decisions are made.
WorkflowGraph wire_no_supervisor(const AgentRuntime& rt, const std::vector<std::string>& team) {
    struct Schedule {
        std::vector<std::string> order;
        std::size_t cursor = 0;
    };
    auto schedule = std::make_shared<Schedule>();
    auto advance = [schedule]() -> std::string {
        if (schedule->cursor < schedule->order.size()) {
            return schedule->order[schedule->cursor++];
        }
        return kEndNode;
    };

    std::vector<std::pair<std::string, NodeHandler>> specs;
    specs.emplace_back("coordinator",
                       [rt](const AgentState& s) { return coordinator_node(rt, s); });
    specs.emplace_back("planner", [rt, schedule, advance, team](const AgentState& s) {
        Command command = planner_node(rt, s);
        if (command.goto_node != "supervisor") return command;  // irreparable plan
        schedule->order.clear();
        schedule->cursor = 0;
        try {
            const std::string plan_text = command.update.full_plan.value_or("{}");
            const Plan plan = plan_from_json(nlohmann::json::parse(plan_text));
            for (const auto& step : plan.steps) {
                const bool known = step.agent == "reporter" ||
                                   std::find(team.begin(), team.end(), step.agent) != team.end();
                if (known) schedule->order.push_back(step.agent);
            }
        } catch (const std::exception&) {
            // fall through to a reporter-only schedule
        }
        if (schedule->order.empty() || schedule->order.back() != "reporter") {
            schedule->order.push_back("reporter");
        }
        command.goto_node = advance();
        return command;
    });
    for (const std::string& agent : team) {
        specs.emplace_back(agent, [rt, agent, advance](const AgentState& s) {
            Command command = specialist_node(rt, agent, s);
            command.goto_node = advance();
            return command;
        });
    }
    specs.emplace_back("reporter", [rt, advance](const AgentState& s) {
        Command command = reporter_node(rt, s);
        command.goto_node = advance();
        return command;
    });
    return build_graph(specs, "coordinator");
}

WorkflowGraph wire(AblationMode mode, const AgentRuntime& rt,
                   const std::vector<std::string>& team) {
    switch (mode) {
        case AblationMode::no_hierarchy: return wire_no_hierarchy(rt, team);
        case AblationMode::no_planning: return wire_no_planning(rt, team);
        case AblationMode::no_supervisor: return wire_no_supervisor(rt, team);
        case AblationMode::full:
        case AblationMode::single_tier: return build_workflow(rt);
    }
    return build_workflow(rt);
}

bool has_reporter_message(const AgentState& state) {
    for (const auto& message : state.messages) {
        if (message.name == "reporter") return true;
    }
    return false;
}

bool run_completed(AblationMode mode, const RunResult& result) {
    if (result.error) return false;
    if (mode == AblationMode::full || mode == AblationMode::single_tier) {
        // Completion means the task produced a report (reporter-then-FINISH)
        // or the coordinator handled the query directly.
        if (has_reporter_message(result.state)) return true;
        return result.trace.size() == 1 && result.trace.front().node == "coordinator";
    }
    return true;
}

}  // namespace

namespace {

ScenarioOutcome execute_workflow(const Config& config, ModelLayer& models, ToolRegistry& tools,
                                 const AgentState& initial, AblationMode mode) {
    PromptLibrary prompts(config.prompts_dir);
    TokenLedger ledger;
    AgentRuntime rt;
    rt.models = &models;
    rt.prompts = &prompts;
    rt.tools = &tools;
    rt.ledger = &ledger;
    rt.history_budget = config.history_budget;
    rt.tool_budget = config.tool_budget;
    rt.force_basic_tier = (mode == AblationMode::single_tier);

    const WorkflowGraph graph = wire(mode, rt, config.team_members);
    RunOptions options;
    options.step_budget = config.step_budget;
    options.usage_probe = [&ledger] { return ledger.totals_by_tier(); };

    ScenarioOutcome outcome;
    const auto started = std::chrono::steady_clock::now();
    outcome.run = run(graph, initial, options);
    outcome.metrics.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
    outcome.metrics.completed = run_completed(mode, outcome.run);
    outcome.metrics.steps = static_cast<long long>(outcome.run.trace.size());
    outcome.metrics.tokens_by_tier = ledger.totals_by_tier();
    outcome.metrics.tool_calls = static_cast<long long>(tools.io_log().size());
    if (outcome.run.error) {
        outcome.metrics.diagnostic = run_error_name(outcome.run.error->kind) + ": " +
                                     outcome.run.error->message;
    } else if (!outcome.metrics.completed) {
        outcome.metrics.diagnostic = "run ended without producing a report";
    }
    return outcome;
}

AgentState initial_state(const Config& config, const std::string& query, bool deep_thinking,
                         bool search_before_planning) {
    AgentState initial;
    initial.messages.push_back(Message::user(query));
    initial.team_members = config.team_members;
    initial.deep_thinking_mode = deep_thinking;
    initial.search_before_planning = search_before_planning;
    return initial;
}

}  // namespace

ScenarioOutcome run_scenario(const Config& config, const ScenarioFixture& fixture,
                             AblationMode mode) {
    ModelLayer models(config.model_settings());
    models.set_backend(MockBackend::from_json(fixture.responses));

    ToolDeps deps;
    deps.search = std::make_shared<MockSearchTransport>(fixture.search_calls,
                                                        fixture.search_reuse);
    deps.fetch = std::make_shared<MockFetchTransport>(fixture.pages);
    if (fixture.exec_results.empty()) {
        deps.exec = std::make_shared<SubprocessExecBackend>();
    } else {
        deps.exec = std::make_shared<CannedExecBackend>(fixture.exec_results);
    }
    deps.browser = std::make_shared<MockBrowserDriver>(fixture.browser_pages);
    deps.sandbox_root = unique_run_dir(config.sandbox_root);
    ToolRegistry tools = make_default_registry(std::move(deps));

    const AgentState initial = initial_state(config, fixture.query, fixture.deep_thinking_mode,
                                             fixture.search_before_planning);
    return execute_workflow(config, models, tools, initial, mode);
}

ScenarioOutcome run_task(const Config& config, const std::optional<ScenarioFixture>& fixture,
                         const std::string& query, bool deep_thinking,
                         bool search_before_planning, AblationMode mode) {
    if (fixture) {
        ScenarioFixture scripted = *fixture;
        scripted.query = query;
        scripted.deep_thinking_mode = deep_thinking;
        scripted.search_before_planning = search_before_planning;
        return run_scenario(config, scripted, mode);
    }

    ModelLayer models(config.model_settings());
    ToolDeps deps;
    deps.search = std::make_shared<HttpSearchTransport>(config.search_endpoint);
    deps.fetch = std::make_shared<HttpFetchTransport>();
    deps.exec = std::make_shared<SubprocessExecBackend>();
    if (const char* driver = std::getenv("OMNINOVA_BROWSER_DRIVER");
        driver != nullptr && *driver != '\0') {
        deps.browser = std::make_shared<SubprocessBrowserDriver>(
            std::vector<std::string>{std::string(driver)});
    }
    deps.sandbox_root = unique_run_dir(config.sandbox_root);
    ToolRegistry tools = make_default_registry(std::move(deps));
    if (const char* key = std::getenv("TAVILY_API_KEY"); key != nullptr && *key != '\0') {
        tools.add_secret(key);
    }

    const AgentState initial =
        initial_state(config, query, deep_thinking, search_before_planning);
    return execute_workflow(config, models, tools, initial, mode);
}

nlohmann::ordered_json metrics_to_json(const std::string& scenario, AblationMode mode,
                                       const RunMetrics& metrics) {
    nlohmann::ordered_json doc;
    doc["scenario"] = scenario;
    doc["mode"] = ablation_name(mode);
    doc["completed"] = metrics.completed;
    doc["steps"] = metrics.steps;
    doc["tokens_by_tier"] = metrics.tokens_by_tier;
    doc["tool_calls"] = metrics.tool_calls;
    doc["wall_ms"] = metrics.wall_ms;
    if (!metrics.diagnostic.empty()) doc["diagnostic"] = metrics.diagnostic;
    return doc;
}

void append_metrics(const std::filesystem::path& path, const std::string& scenario,
                    AblationMode mode, const RunMetrics& metrics) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open metrics file: " + path.string());
    out << metrics_to_json(scenario, mode, metrics).dump() << '\n';
}

}  // namespace omninova
