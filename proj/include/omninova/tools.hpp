#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace omninova {

// ── Tool interface ──────────────────────────────────────────────────────

enum class ToolErrorKind { timeout, transport, denied, nonzero_exit, invalid_args };

std::string tool_error_name(ToolErrorKind kind);

struct ToolSpec {
    std::string name;
    std::string description;  // non-empty: models route on it
    nlohmann::ordered_json param_schema;
};

// Tool errors are data, not exceptions: the react loop sees failures as
// observations.
struct ToolResult {
    bool ok = false;
    std::string content;
    std::optional<ToolErrorKind> error_kind;

    static ToolResult success(std::string content) { return {true, std::move(content), {}}; }
    static ToolResult failure(ToolErrorKind kind, std::string content) {
        return {false, std::move(content), kind};
    }
};

struct IoLogRecord {
    std::string tool;
    nlohmann::ordered_json arguments;  // secrets redacted
    std::string result_digest;
    long long duration_ms = 0;
};

using ToolFn = std::function<ToolResult(const nlohmann::json& args)>;

// Validates arguments against a minimal JSON-object schema
// ({"type":"object","properties":{name:{"type":...}},"required":[...]}).
// Returns an error description, or nullopt when the arguments conform.
std::optional<std::string> validate_args(const nlohmann::json& schema, const nlohmann::json& args);

class ToolRegistry {
public:
    // Throws std::invalid_argument on duplicate names or empty descriptions.
    void register_tool(ToolSpec spec, ToolFn fn);

    bool has(const std::string& name) const;
    const ToolSpec* spec(const std::string& name) const;
    std::vector<std::string> names() const;

    // Unknown names and invalid arguments come back in-band; one IoLogRecord
    // is appended per invocation, success or not.
    ToolResult invoke(const std::string& name, const nlohmann::json& args);

    const std::vector<IoLogRecord>& io_log() const { return log_; }

    // Values never allowed to appear in log records.
    void add_secret(std::string value);

private:
    nlohmann::ordered_json redact(const nlohmann::json& args) const;

    std::map<std::string, std::pair<ToolSpec, ToolFn>> tools_;
    std::vector<std::string> order_;
    std::vector<IoLogRecord> log_;
    std::vector<std::string> secrets_;
};

// ── Subprocess execution ────────────────────────────────────────────────

struct ExecResult {
    std::string stdout_text;
    std::string stderr_text;
    int exit_code = -1;
    bool timed_out = false;
};

class ExecBackend {
public:
    virtual ~ExecBackend() = default;
    virtual ExecResult run(const std::vector<std::string>& argv, const std::string& stdin_data,
                           double timeout_s, const std::filesystem::path& workdir) = 0;
};

// fork/exec with piped stdio; the whole process group is killed on timeout.
class SubprocessExecBackend : public ExecBackend {
public:
    ExecResult run(const std::vector<std::string>& argv, const std::string& stdin_data,
                   double timeout_s, const std::filesystem::path& workdir) override;
};

// Replays canned results in call order; exhaustion reports a failure result.
class CannedExecBackend : public ExecBackend {
public:
    explicit CannedExecBackend(std::vector<ExecResult> results) : results_(std::move(results)) {}
    ExecResult run(const std::vector<std::string>& argv, const std::string& stdin_data,
                   double timeout_s, const std::filesystem::path& workdir) override;

private:
    std::vector<ExecResult> results_;
    std::size_t cursor_ = 0;
};

// ── Search ──────────────────────────────────────────────────────────────

struct SearchResult {
    std::string title;
    std::string url;
    std::string content;
};

nlohmann::ordered_json search_results_to_json(const std::vector<SearchResult>& results);

class SearchDenied : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SearchTransport {
public:
    virtual ~SearchTransport() = default;
    // Throws SearchDenied (missing credential) or std::runtime_error
    // (transport failure).
    virtual std::vector<SearchResult> search(const std::string& query, int max_results) = 0;
};

// JSON-over-HTTP client with the endpoint shape of the Tavily API; the
// endpoint URL is configurable so mocks and alternative providers drop in.
class HttpSearchTransport : public SearchTransport {
public:
    HttpSearchTransport(std::string endpoint, std::string api_key_env = "TAVILY_API_KEY");
    std::vector<SearchResult> search(const std::string& query, int max_results) override;

private:
    std::string endpoint_;
    std::string api_key_env_;
};

class MockSearchTransport : public SearchTransport {
public:
    // One inner list per call; a single list is reused for every call.
    explicit MockSearchTransport(std::vector<std::vector<SearchResult>> calls, bool reuse = false)
        : calls_(std::move(calls)), reuse_(reuse) {}
    std::vector<SearchResult> search(const std::string& query, int max_results) override;

private:
    std::vector<std::vector<SearchResult>> calls_;
    bool reuse_;
    std::size_t cursor_ = 0;
};

// ── URL fetch ───────────────────────────────────────────────────────────

class FetchTransport {
public:
    virtual ~FetchTransport() = default;
    // Returns the raw body; throws std::runtime_error on transport failure.
    virtual std::string fetch(const std::string& url) = 0;
};

class HttpFetchTransport : public FetchTransport {
public:
    std::string fetch(const std::string& url) override;
};

class MockFetchTransport : public FetchTransport {
public:
    explicit MockFetchTransport(std::map<std::string, std::string> pages)
        : pages_(std::move(pages)) {}
    std::string fetch(const std::string& url) override;

private:
    std::map<std::string, std::string> pages_;
};

// Tag stripping + entity decoding for fetched HTML.
std::string strip_html(const std::string& html);

// ── Browser driver protocol ─────────────────────────────────────────────
//
// Commands are one JSON object per line: {action, url|selector, text};
// responses are {ok, content} per command.

class BrowserDriver {
public:
    virtual ~BrowserDriver() = default;
    virtual nlohmann::ordered_json execute(const nlohmann::ordered_json& command) = 0;
};

// In-tree driver backed by a url → page-text map; tracks the current page
// for extract/click/type actions.
class MockBrowserDriver : public BrowserDriver {
public:
    explicit MockBrowserDriver(std::map<std::string, std::string> pages)
        : pages_(std::move(pages)) {}
    nlohmann::ordered_json execute(const nlohmann::ordered_json& command) override;

private:
    std::map<std::string, std::string> pages_;
    std::string current_url_;
};

// Drives an external driver binary over its standard streams, one
// newline-delimited JSON command/response pair at a time.
class SubprocessBrowserDriver : public BrowserDriver {
public:
    explicit SubprocessBrowserDriver(std::vector<std::string> argv);
    ~SubprocessBrowserDriver() override;
    nlohmann::ordered_json execute(const nlohmann::ordered_json& command) override;

    SubprocessBrowserDriver(const SubprocessBrowserDriver&) = delete;
    SubprocessBrowserDriver& operator=(const SubprocessBrowserDriver&) = delete;

private:
    void spawn();
    void shutdown();

    std::vector<std::string> argv_;
    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string read_buffer_;
};

// ── Sandbox path confinement ────────────────────────────────────────────

// Lexically normalizes `user_path` against `root` and returns the contained
// absolute path, or nullopt when the path escapes the sandbox root.
std::optional<std::filesystem::path> confine_path(const std::filesystem::path& root,
                                                  const std::string& user_path);

// ── Default registry ────────────────────────────────────────────────────

struct ToolDeps {
    std::shared_ptr<SearchTransport> search;
    std::shared_ptr<FetchTransport> fetch;
    std::shared_ptr<ExecBackend> exec;
    std::shared_ptr<BrowserDriver> browser;
    std::filesystem::path sandbox_root;
    std::string interpreter = "python3";
    std::size_t fetch_cap_bytes = 64 * 1024;
    double default_timeout_s = 30.0;
    int search_max_results = 5;
};

// Registers tavily_search, fetch_url, exec_code, exec_shell, file_read,
// file_write and browser over the given transports.
ToolRegistry make_default_registry(ToolDeps deps);

}  // namespace omninova
