#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omninova/agents.hpp"
#include "omninova/config.hpp"
#include "omninova/graph.hpp"

namespace omninova {

enum class AblationMode { full, no_hierarchy, single_tier, no_planning, no_supervisor };

std::string ablation_name(AblationMode mode);
std::optional<AblationMode> ablation_from_name(const std::string& name);

struct RunMetrics {
    bool completed = false;
    long long steps = 0;  // equals trace length
    std::map<std::string, long long> tokens_by_tier;
    long long tool_calls = 0;
    long long wall_ms = 0;
    std::string diagnostic;  // empty when the run terminated cleanly
};

// One hermetic scenario: scripted model responses, canned tool transports,
// initial flags and an expected-path annotation, all in one file.
struct ScenarioFixture {
    std::string name;
    std::string query;
    bool deep_thinking_mode = false;
    bool search_before_planning = false;
    nlohmann::json responses;  // agent name → ordered scripted responses
    std::vector<std::vector<SearchResult>> search_calls;
    bool search_reuse = false;  // single canned list answers every call
    std::map<std::string, std::string> pages;
    std::map<std::string, std::string> browser_pages;
    std::vector<ExecResult> exec_results;  // empty → real subprocess execution
    std::vector<std::string> expected_path;
};

ScenarioFixture scenario_from_json(const nlohmann::json& doc);
ScenarioFixture load_scenario(const std::filesystem::path& path);

struct ScenarioOutcome {
    RunMetrics metrics;
    RunResult run;
};

// Replays a scenario under an ablation mode. Rewiring changes only the
// workflow wiring; the Config passes through untouched.
//
//   full          seven-node hierarchy as built.
//   no_hierarchy  flat network: coordinator hands to the specialists
//                 round-robin, last specialist to the reporter, reporter
//                 ends the run.
//   single_tier   every resolution collapses to the basic tier, including
//                 deep-thinking planner calls.
//   no_planning   coordinator hands straight to the supervisor with an
//                 empty plan.
//   no_supervisor plan steps execute in plan order with no routing
//                 decisions; the reporter runs last.
ScenarioOutcome run_scenario(const Config& config, const ScenarioFixture& fixture,
                             AblationMode mode);

// CLI entry: a fixture forces the scripted backend and canned transports;
// without one, live HTTP transports and real subprocess execution are used.
ScenarioOutcome run_task(const Config& config, const std::optional<ScenarioFixture>& fixture,
                         const std::string& query, bool deep_thinking,
                         bool search_before_planning, AblationMode mode);

// Appends one JSON object per run: {scenario, mode, completed, steps,
// tokens_by_tier, tool_calls, wall_ms}.
void append_metrics(const std::filesystem::path& path, const std::string& scenario,
                    AblationMode mode, const RunMetrics& metrics);

nlohmann::ordered_json metrics_to_json(const std::string& scenario, AblationMode mode,
                                       const RunMetrics& metrics);

}  // namespace omninova
