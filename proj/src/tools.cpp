#include "omninova/tools.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "httplib.h"

namespace omninova {

std::string tool_error_name(ToolErrorKind kind) {
    switch (kind) {
        case ToolErrorKind::timeout: return "timeout";
        case ToolErrorKind::transport: return "transport";
        case ToolErrorKind::denied: return "denied";
        case ToolErrorKind::nonzero_exit: return "nonzero_exit";
        case ToolErrorKind::invalid_args: return "invalid_args";
    }
    return "unknown";
}

// ── Argument validation ─────────────────────────────────────────────────

namespace {

bool type_matches(const std::string& type, const nlohmann::json& value) {
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "boolean") return value.is_boolean();
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    return true;
}

std::string digest_text(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buffer);
}

}  // namespace

std::optional<std::string> validate_args(const nlohmann::json& schema,
                                         const nlohmann::json& args) {
    if (!args.is_object()) return "arguments must be a JSON object";
    if (schema.contains("required")) {
        for (const auto& name : schema["required"]) {
            if (!args.contains(name.get<std::string>())) {
                return "missing required argument: " + name.get<std::string>();
            }
        }
    }
    if (schema.contains("properties")) {
        const auto& props = schema["properties"];
        for (const auto& [key, value] : args.items()) {
            auto it = props.find(key);
            if (it == props.end()) return "unexpected argument: " + key;
            const std::string type = it->value("type", "");
            if (!type.empty() && !type_matches(type, value)) {
                return "argument '" + key + "' must have type " + type;
            }
        }
    }
    return std::nullopt;
}

// ── Registry ────────────────────────────────────────────────────────────

void ToolRegistry::register_tool(ToolSpec spec, ToolFn fn) {
    if (spec.name.empty()) throw std::invalid_argument("tool name must be non-empty");
    if (spec.description.empty()) {
        throw std::invalid_argument("tool '" + spec.name + "' needs a description");
    }
    if (tools_.count(spec.name) > 0) {
        throw std::invalid_argument("duplicate tool name: " + spec.name);
    }
    order_.push_back(spec.name);
    const std::string name = spec.name;
    tools_.emplace(name, std::make_pair(std::move(spec), std::move(fn)));
}

bool ToolRegistry::has(const std::string& name) const { return tools_.count(name) > 0; }

const ToolSpec* ToolRegistry::spec(const std::string& name) const {
    auto it = tools_.find(name);
    return it == tools_.end() ? nullptr : &it->second.first;
}

std::vector<std::string> ToolRegistry::names() const { return order_; }

void ToolRegistry::add_secret(std::string value) {
    if (!value.empty()) secrets_.push_back(std::move(value));
}

nlohmann::ordered_json ToolRegistry::redact(const nlohmann::json& args) const {
    std::string text = args.dump();
    for (const auto& secret : secrets_) {
        std::size_t pos = 0;
        while ((pos = text.find(secret, pos)) != std::string::npos) {
            text.replace(pos, secret.size(), "[REDACTED]");
            pos += 10;
        }
    }
    return nlohmann::ordered_json::parse(text);
}

ToolResult ToolRegistry::invoke(const std::string& name, const nlohmann::json& args) {
    const auto started = std::chrono::steady_clock::now();
    ToolResult result;
    auto it = tools_.find(name);
    if (it == tools_.end()) {
        result = ToolResult::failure(ToolErrorKind::denied, "unknown tool: " + name);
    } else if (auto violation = validate_args(it->second.first.param_schema, args)) {
        result = ToolResult::failure(ToolErrorKind::invalid_args, *violation);
    } else {
        try {
            result = it->second.second(args);
        } catch (const std::exception& e) {
            // Tools never raise into the agent loop.
            result = ToolResult::failure(ToolErrorKind::transport,
                                         std::string("tool crashed: ") + e.what());
        }
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    IoLogRecord record;
    record.tool = name;
    record.arguments = redact(args);
    record.result_digest = digest_text(result.content);
    record.duration_ms = elapsed.count();
    log_.push_back(std::move(record));
    return result;
}

// ── Subprocess execution ────────────────────────────────────────────────

namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

}  // namespace

ExecResult SubprocessExecBackend::run(const std::vector<std::string>& argv,
                                      const std::string& stdin_data, double timeout_s,
                                      const std::filesystem::path& workdir) {
    ExecResult result;
    if (argv.empty()) {
        result.stderr_text = "empty argv";
        return result;
    }
    int in_pipe[2] = {-1, -1};
    int out_pipe[2] = {-1, -1};
    int err_pipe[2] = {-1, -1};
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        result.stderr_text = std::string("pipe failed: ") + std::strerror(errno);
        return result;
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        result.stderr_text = std::string("fork failed: ") + std::strerror(errno);
        return result;
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                       err_pipe[1]}) {
            ::close(fd);
        }
        if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) _exit(127);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& arg : argv) cargv.push_back(const_cast<char*>(arg.c_str()));
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        _exit(127);
    }

    // Both sides set the process group so the timeout kill cannot race the
    // child's setpgid.
    ::setpgid(pid, pid);
    close_fd(in_pipe[0]);
    close_fd(out_pipe[1]);
    close_fd(err_pipe[1]);

    // Feed stdin before reading; snippets are small enough that the pipe
    // buffer plus the child's consumption absorbs them.
    signal(SIGPIPE, SIG_IGN);
    if (!stdin_data.empty()) {
        std::size_t written = 0;
        while (written < stdin_data.size()) {
            const ssize_t n =
                ::write(in_pipe[1], stdin_data.data() + written, stdin_data.size() - written);
            if (n <= 0) break;
            written += static_cast<std::size_t>(n);
        }
    }
    close_fd(in_pipe[1]);

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    bool out_open = true;
    bool err_open = true;
    char buffer[4096];
    while (out_open || err_open) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            break;
        }
        const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        const int ready = ::poll(fds, nfds, static_cast<int>(std::min<long long>(
                                                wait_ms.count(), 1000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (nfds_t i = 0; i < nfds; ++i) {
            if (fds[i].revents == 0) continue;
            const ssize_t n = ::read(fds[i].fd, buffer, sizeof(buffer));
            std::string& sink = (fds[i].fd == out_pipe[0]) ? result.stdout_text
                                                           : result.stderr_text;
            if (n > 0) {
                sink.append(buffer, static_cast<std::size_t>(n));
            } else {
                if (fds[i].fd == out_pipe[0]) out_open = false;
                else err_open = false;
            }
        }
    }
    close_fd(out_pipe[0]);
    close_fd(err_pipe[0]);

    int status = 0;
    ::waitpid(pid, &status, 0);
    if (result.timed_out) {
        result.exit_code = -1;
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

ExecResult CannedExecBackend::run(const std::vector<std::string>&, const std::string&, double,
                                  const std::filesystem::path&) {
    if (cursor_ >= results_.size()) {
        ExecResult out;
        out.exit_code = -1;
        out.stderr_text = "canned execution results exhausted";
        return out;
    }
    return results_[cursor_++];
}

// ── Search ──────────────────────────────────────────────────────────────

nlohmann::ordered_json search_results_to_json(const std::vector<SearchResult>& results) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& result : results) {
        nlohmann::ordered_json entry;
        entry["title"] = result.title;
        entry["url"] = result.url;
        entry["content"] = result.content;
        arr.push_back(std::move(entry));
    }
    return arr;
}

HttpSearchTransport::HttpSearchTransport(std::string endpoint, std::string api_key_env)
    : endpoint_(std::move(endpoint)), api_key_env_(std::move(api_key_env)) {}

std::vector<SearchResult> HttpSearchTransport::search(const std::string& query,
                                                      int max_results) {
    const char* key = std::getenv(api_key_env_.c_str());
    if (key == nullptr || *key == '\0') {
        throw SearchDenied("search credential env var " + api_key_env_ + " is not set");
    }

    const auto scheme_end = endpoint_.find("://");
    if (scheme_end == std::string::npos) {
        throw std::runtime_error("search endpoint must include a scheme: " + endpoint_);
    }
    const auto path_start = endpoint_.find('/', scheme_end + 3);
    const std::string host = (path_start == std::string::npos)
                                 ? endpoint_
                                 : endpoint_.substr(0, path_start);
    const std::string path = (path_start == std::string::npos)
                                 ? "/"
                                 : endpoint_.substr(path_start);

    nlohmann::ordered_json body;
    body["api_key"] = key;
    body["query"] = query;
    body["max_results"] = max_results;

    httplib::Client client(host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    auto result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        throw std::runtime_error("search transport failure: " +
                                 httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw std::runtime_error("search endpoint returned HTTP " +
                                 std::to_string(result->status));
    }
    nlohmann::json doc = nlohmann::json::parse(result->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("results") || !doc["results"].is_array()) {
        throw std::runtime_error("search endpoint returned an unexpected payload");
    }
    std::vector<SearchResult> results;
    for (const auto& entry : doc["results"]) {
        results.push_back({entry.value("title", ""), entry.value("url", ""),
                           entry.value("content", "")});
        if (static_cast<int>(results.size()) >= max_results) break;
    }
    return results;
}

std::vector<SearchResult> MockSearchTransport::search(const std::string&, int max_results) {
    if (calls_.empty()) return {};
    std::vector<SearchResult> results;
    if (reuse_) {
        results = calls_.front();
    } else {
        if (cursor_ >= calls_.size()) {
            throw std::runtime_error("mock search transport exhausted");
        }
        results = calls_[cursor_++];
    }
    if (static_cast<int>(results.size()) > max_results) {
        results.resize(static_cast<std::size_t>(max_results));
    }
    return results;
}

// ── URL fetch ───────────────────────────────────────────────────────────

std::string HttpFetchTransport::fetch(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::runtime_error("malformed url: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string host = (path_start == std::string::npos) ? url : url.substr(0, path_start);
    const std::string path = (path_start == std::string::npos) ? "/" : url.substr(path_start);
    httplib::Client client(host);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    client.set_follow_location(true);
    auto result = client.Get(path);
    if (!result) {
        throw std::runtime_error("fetch transport failure: " +
                                 httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw std::runtime_error("fetch returned HTTP " + std::to_string(result->status));
    }
    return result->body;
}

std::string MockFetchTransport::fetch(const std::string& url) {
    auto it = pages_.find(url);
    if (it == pages_.end()) throw std::runtime_error("no canned page for url: " + url);
    return it->second;
}

namespace {

std::string decode_entities(const std::string& text) {
    static const std::pair<const char*, const char*> kEntities[] = {
        {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""},
        {"&#39;", "'"}, {"&apos;", "'"}, {"&nbsp;", " "},
    };
    std::string out = text;
    for (const auto& [entity, replacement] : kEntities) {
        std::size_t pos = 0;
        while ((pos = out.find(entity, pos)) != std::string::npos) {
            out.replace(pos, std::strlen(entity), replacement);
            pos += std::strlen(replacement);
        }
    }
    return out;
}

void erase_blocks(std::string& html, const std::string& open_tag, const std::string& close_tag) {
    std::string lower;
    lower.reserve(html.size());
    for (char c : html) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::size_t pos = 0;
    while ((pos = lower.find(open_tag, pos)) != std::string::npos) {
        const std::size_t end = lower.find(close_tag, pos);
        const std::size_t erase_end =
            (end == std::string::npos) ? html.size() : end + close_tag.size();
        html.erase(pos, erase_end - pos);
        lower.erase(pos, erase_end - pos);
    }
}

}  // namespace

std::string strip_html(const std::string& html) {
    std::string work = html;
    erase_blocks(work, "<script", "</script>");
    erase_blocks(work, "<style", "</style>");

    std::string out;
    out.reserve(work.size());
    bool in_tag = false;
    for (char c : work) {
        if (c == '<') {
            in_tag = true;
            continue;
        }
        if (c == '>') {
            if (in_tag) {
                in_tag = false;
                continue;
            }
        }
        if (!in_tag) out.push_back(c);
    }
    out = decode_entities(out);

    // Collapse runs of blank lines and trim.
    std::string collapsed;
    int newlines = 0;
    for (char c : out) {
        if (c == '\n') {
            if (++newlines <= 2) collapsed.push_back(c);
        } else {
            newlines = 0;
            collapsed.push_back(c);
        }
    }
    const auto begin = collapsed.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = collapsed.find_last_not_of(" \t\r\n");
    return collapsed.substr(begin, end - begin + 1);
}

// ── Browser drivers ─────────────────────────────────────────────────────

nlohmann::ordered_json MockBrowserDriver::execute(const nlohmann::ordered_json& command) {
    nlohmann::ordered_json response;
    const std::string action = command.value("action", "");
    if (action == "navigate") {
        const std::string url = command.value("url", "");
        auto it = pages_.find(url);
        if (it == pages_.end()) {
            response["ok"] = false;
            response["content"] = "no page at " + url;
            return response;
        }
        current_url_ = url;
        response["ok"] = true;
        response["content"] = "navigated to " + url;
        return response;
    }
    if (action == "extract") {
        auto it = pages_.find(current_url_);
        response["ok"] = it != pages_.end();
        response["content"] = it != pages_.end() ? it->second : "no current page";
        return response;
    }
    if (action == "click" || action == "type") {
        if (current_url_.empty()) {
            response["ok"] = false;
            response["content"] = "no current page";
            return response;
        }
        response["ok"] = true;
        response["content"] = action + " on " + command.value("selector", "<page>");
        return response;
    }
    response["ok"] = false;
    response["content"] = "unknown browser action: " + action;
    return response;
}

SubprocessBrowserDriver::SubprocessBrowserDriver(std::vector<std::string> argv)
    : argv_(std::move(argv)) {
    spawn();
}

SubprocessBrowserDriver::~SubprocessBrowserDriver() { shutdown(); }

void SubprocessBrowserDriver::spawn() {
    int to_pipe[2] = {-1, -1};
    int from_pipe[2] = {-1, -1};
    if (::pipe(to_pipe) != 0 || ::pipe(from_pipe) != 0) {
        throw std::runtime_error("browser driver pipe failed");
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("browser driver fork failed");
    if (pid == 0) {
        ::dup2(to_pipe[0], STDIN_FILENO);
        ::dup2(from_pipe[1], STDOUT_FILENO);
        for (int fd : {to_pipe[0], to_pipe[1], from_pipe[0], from_pipe[1]}) ::close(fd);
        std::vector<char*> cargv;
        for (const auto& arg : argv_) cargv.push_back(const_cast<char*>(arg.c_str()));
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        _exit(127);
    }
    child_pid_ = pid;
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
    ::close(to_pipe[0]);
    ::close(from_pipe[1]);
}

void SubprocessBrowserDriver::shutdown() {
    close_fd(to_child_);
    close_fd(from_child_);
    if (child_pid_ > 0) {
        ::kill(child_pid_, SIGTERM);
        int status = 0;
        ::waitpid(child_pid_, &status, 0);
        child_pid_ = -1;
    }
}

nlohmann::ordered_json SubprocessBrowserDriver::execute(const nlohmann::ordered_json& command) {
    const std::string line = command.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = ::write(to_child_, line.data() + written, line.size() - written);
        if (n <= 0) throw std::runtime_error("browser driver is not accepting commands");
        written += static_cast<std::size_t>(n);
    }
    while (true) {
        const std::size_t newline = read_buffer_.find('\n');
        if (newline != std::string::npos) {
            const std::string payload = read_buffer_.substr(0, newline);
            read_buffer_.erase(0, newline + 1);
            auto doc = nlohmann::ordered_json::parse(payload, nullptr, false);
            if (doc.is_discarded()) {
                throw std::runtime_error("browser driver sent malformed response: " + payload);
            }
            return doc;
        }
        char buffer[4096];
        const ssize_t n = ::read(from_child_, buffer, sizeof(buffer));
        if (n <= 0) throw std::runtime_error("browser driver closed its output stream");
        read_buffer_.append(buffer, static_cast<std::size_t>(n));
    }
}

// ── Sandbox path confinement ────────────────────────────────────────────

std::optional<std::filesystem::path> confine_path(const std::filesystem::path& root,
                                                  const std::string& user_path) {
    namespace fs = std::filesystem;
    const fs::path abs_root = fs::absolute(root).lexically_normal();
    fs::path requested(user_path);
    fs::path candidate = requested.is_absolute() ? requested : abs_root / requested;
    candidate = fs::absolute(candidate).lexically_normal();

    // Normalized-prefix check: candidate must sit at or below the root.
    auto root_it = abs_root.begin();
    auto cand_it = candidate.begin();
    for (; root_it != abs_root.end(); ++root_it, ++cand_it) {
        if (root_it->empty()) continue;  // trailing slash artifact
        if (cand_it == candidate.end() || *cand_it != *root_it) return std::nullopt;
    }
    return candidate;
}

// ── Default registry ────────────────────────────────────────────────────

namespace {

nlohmann::ordered_json object_schema(
    std::initializer_list<std::pair<const char*, const char*>> properties,
    std::initializer_list<const char*> required) {
    nlohmann::ordered_json schema;
    schema["type"] = "object";
    auto props = nlohmann::ordered_json::object();
    for (const auto& [name, type] : properties) props[name] = {{"type", type}};
    schema["properties"] = std::move(props);
    auto req = nlohmann::ordered_json::array();
    for (const char* name : required) req.push_back(name);
    schema["required"] = std::move(req);
    return schema;
}

std::string exec_content(const ExecResult& result) {
    nlohmann::ordered_json doc;
    doc["stdout"] = result.stdout_text;
    doc["stderr"] = result.stderr_text;
    doc["exit_code"] = result.exit_code;
    return doc.dump();
}

struct SnippetCounter {
    int next = 0;
};

}  // namespace

ToolRegistry make_default_registry(ToolDeps deps) {
    ToolRegistry registry;
    auto shared = std::make_shared<ToolDeps>(std::move(deps));
    auto snippets = std::make_shared<SnippetCounter>();

    registry.register_tool(
        {"tavily_search", "Search the web for information.",
         object_schema({{"query", "string"}, {"max_results", "integer"}}, {"query"})},
        [shared](const nlohmann::json& args) {
            if (!shared->search) {
                return ToolResult::failure(ToolErrorKind::denied, "search is not configured");
            }
            const int max_results = args.value("max_results", shared->search_max_results);
            if (max_results < 1) {
                return ToolResult::failure(ToolErrorKind::invalid_args,
                                           "max_results must be positive");
            }
            try {
                auto results = shared->search->search(args.at("query").get<std::string>(),
                                                      max_results);
                return ToolResult::success(search_results_to_json(results).dump());
            } catch (const SearchDenied& e) {
                return ToolResult::failure(ToolErrorKind::denied, e.what());
            } catch (const std::exception& e) {
                return ToolResult::failure(ToolErrorKind::transport, e.what());
            }
        });

    registry.register_tool(
        {"fetch_url", "Fetch a web page and extract its readable text.",
         object_schema({{"url", "string"}}, {"url"})},
        [shared](const nlohmann::json& args) {
            const std::string url = args.at("url").get<std::string>();
            if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
                return ToolResult::failure(ToolErrorKind::denied,
                                           "only http(s) urls are allowed: " + url);
            }
            if (!shared->fetch) {
                return ToolResult::failure(ToolErrorKind::denied, "fetch is not configured");
            }
            try {
                std::string text = strip_html(shared->fetch->fetch(url));
                if (text.size() > shared->fetch_cap_bytes) {
                    text.resize(shared->fetch_cap_bytes);
                    text += "\n...[truncated]";
                }
                return ToolResult::success(std::move(text));
            } catch (const std::exception& e) {
                return ToolResult::failure(ToolErrorKind::transport, e.what());
            }
        });

    auto run_exec = [shared](const std::vector<std::string>& argv, const std::string& stdin_data,
                             double timeout_s) {
        std::error_code ec;
        std::filesystem::create_directories(shared->sandbox_root, ec);
        const ExecResult result =
            shared->exec->run(argv, stdin_data, timeout_s, shared->sandbox_root);
        if (result.timed_out) {
            return ToolResult::failure(ToolErrorKind::timeout,
                                       "execution timed out; process killed. " +
                                           exec_content(result));
        }
        if (result.exit_code != 0) {
            return ToolResult::failure(ToolErrorKind::nonzero_exit, exec_content(result));
        }
        return ToolResult::success(exec_content(result));
    };

    registry.register_tool(
        {"exec_code", "Run a source snippet under the configured interpreter.",
         object_schema({{"source", "string"}, {"timeout_s", "number"}}, {"source"})},
        [shared, snippets, run_exec](const nlohmann::json& args) {
            const double timeout_s = args.value("timeout_s", shared->default_timeout_s);
            if (timeout_s <= 0) {
                return ToolResult::failure(ToolErrorKind::invalid_args,
                                           "timeout_s must be positive");
            }
            std::error_code ec;
            std::filesystem::create_directories(shared->sandbox_root, ec);
            const auto snippet = shared->sandbox_root /
                                 ("snippet_" + std::to_string(snippets->next++) + ".src");
            {
                std::ofstream out(snippet, std::ios::binary);
                if (!out) {
                    return ToolResult::failure(ToolErrorKind::transport,
                                               "cannot write snippet file");
                }
                out << args.at("source").get<std::string>();
            }
            return run_exec({shared->interpreter, snippet.string()}, "", timeout_s);
        });

    registry.register_tool(
        {"exec_shell", "Run a command under the system shell.",
         object_schema({{"command", "string"}, {"timeout_s", "number"}}, {"command"})},
        [shared, run_exec](const nlohmann::json& args) {
            const double timeout_s = args.value("timeout_s", shared->default_timeout_s);
            if (timeout_s <= 0) {
                return ToolResult::failure(ToolErrorKind::invalid_args,
                                           "timeout_s must be positive");
            }
            return run_exec({"/bin/sh", "-c", args.at("command").get<std::string>()}, "",
                            timeout_s);
        });

    registry.register_tool(
        {"file_read", "Read a UTF-8 text file inside the sandbox.",
         object_schema({{"path", "string"}}, {"path"})},
        [shared](const nlohmann::json& args) {
            const auto confined =
                confine_path(shared->sandbox_root, args.at("path").get<std::string>());
            if (!confined) {
                return ToolResult::failure(ToolErrorKind::denied,
                                           "path escapes the sandbox root");
            }
            std::ifstream in(*confined, std::ios::binary);
            if (!in) {
                return ToolResult::failure(ToolErrorKind::transport,
                                           "cannot read file (not found?): " +
                                               args.at("path").get<std::string>());
            }
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return ToolResult::success(buffer.str());
        });

    registry.register_tool(
        {"file_write", "Write a UTF-8 text file inside the sandbox.",
         object_schema({{"path", "string"}, {"content", "string"}}, {"path", "content"})},
        [shared](const nlohmann::json& args) {
            const auto confined =
                confine_path(shared->sandbox_root, args.at("path").get<std::string>());
            if (!confined) {
                return ToolResult::failure(ToolErrorKind::denied,
                                           "path escapes the sandbox root");
            }
            std::error_code ec;
            std::filesystem::create_directories(confined->parent_path(), ec);
            std::ofstream out(*confined, std::ios::binary);
            if (!out) {
                return ToolResult::failure(ToolErrorKind::transport, "cannot open file for write");
            }
            out << args.at("content").get<std::string>();
            return ToolResult::success("ok");
        });

    registry.register_tool(
        {"browser", "Drive a browser: navigate, extract, click, or type.",
         object_schema({{"action", "string"}, {"url", "string"}, {"selector", "string"},
                        {"text", "string"}},
                       {"action"})},
        [shared](const nlohmann::json& args) {
            if (!shared->browser) {
                return ToolResult::failure(ToolErrorKind::denied, "browser is not configured");
            }
            nlohmann::ordered_json command;
            command["action"] = args.at("action").get<std::string>();
            for (const char* key : {"url", "selector", "text"}) {
                if (args.contains(key)) command[key] = args.at(key);
            }
            try {
                const auto response = shared->browser->execute(command);
                const bool ok = response.value("ok", false);
                const std::string content = response.value("content", "");
                if (!ok) return ToolResult::failure(ToolErrorKind::transport, content);
                return ToolResult::success(content);
            } catch (const std::exception& e) {
                return ToolResult::failure(ToolErrorKind::transport, e.what());
            }
        });

    return registry;
}

}  // namespace omninova
