#include "omninova/json_repair.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <string_view>

namespace omninova {

std::string fix_kind_name(FixKind kind) {
    switch (kind) {
        case FixKind::fence_stripped: return "fence_stripped";
        case FixKind::trailing_comma: return "trailing_comma";
        case FixKind::single_quotes: return "single_quotes";
        case FixKind::unquoted_key: return "unquoted_key";
        case FixKind::unclosed_container: return "unclosed_container";
        case FixKind::truncated_string: return "truncated_string";
        case FixKind::prose_stripped: return "prose_stripped";
    }
    return "unknown";
}

bool RepairOutcome::applied(FixKind kind) const {
    return std::find(applied_fixes.begin(), applied_fixes.end(), kind) != applied_fixes.end();
}

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool all_whitespace(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](char c) { return is_ws(c); });
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t extra;
        unsigned cp_min;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp_min = 0x80;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp_min = 0x800;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp_min = 0x10000;
        } else {
            return false;
        }
        if (i + extra >= text.size()) return false;
        unsigned cp = c & (0x3F >> extra);
        for (std::size_t k = 1; k <= extra; ++k) {
            unsigned char cont = static_cast<unsigned char>(text[i + k]);
            if ((cont & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (cp < cp_min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += extra + 1;
    }
    return true;
}

// Drops a trailing incomplete multi-byte sequence left behind by byte-level
// truncation.
void trim_incomplete_utf8_tail(std::string& text) {
    std::size_t i = text.size();
    std::size_t continuation = 0;
    while (i > 0 && continuation < 3) {
        unsigned char c = static_cast<unsigned char>(text[i - 1]);
        if ((c & 0xC0) == 0x80) {
            ++continuation;
            --i;
            continue;
        }
        std::size_t expected = 0;
        if ((c & 0xE0) == 0xC0) expected = 1;
        else if ((c & 0xF0) == 0xE0) expected = 2;
        else if ((c & 0xF8) == 0xF0) expected = 3;
        if (expected > continuation) text.resize(i - 1);
        return;
    }
}

void encode_utf8(unsigned cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Recursive-descent parser over almost-JSON. Produces the value directly and
// records every tolerance it had to apply. Unrecoverable shapes throw
// RepairError.
class TolerantParser {
public:
    TolerantParser(std::string_view text, std::vector<FixKind>& fixes)
        : text_(text), fixes_(fixes) {}

    nlohmann::ordered_json parse_value() {
        skip_ws();
        if (at_end()) fail("unexpected end of input where a value was expected");
        char c = peek();
        if (c == '{') return parse_object();
        if (c == '[') return parse_array();
        if (c == '"' || c == '\'') return nlohmann::ordered_json(parse_string(c));
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (c == 't' || c == 'f' || c == 'n') return parse_literal();
        fail(std::string("unexpected character '") + c + "'");
    }

    std::size_t pos() const { return pos_; }

private:
    void record(FixKind kind) {
        if (std::find(fixes_.begin(), fixes_.end(), kind) == fixes_.end()) {
            fixes_.push_back(kind);
        }
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char take() { return text_[pos_++]; }
    void skip_ws() {
        while (!at_end() && is_ws(peek())) ++pos_;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw RepairError("cannot repair JSON at offset " + std::to_string(pos_) + ": " + why);
    }

    nlohmann::ordered_json parse_object() {
        take();  // '{'
        auto obj = nlohmann::ordered_json::object();
        skip_ws();
        if (at_end()) {
            record(FixKind::unclosed_container);
            return obj;
        }
        if (peek() == '}') {
            take();
            return obj;
        }
        while (true) {
            skip_ws();
            if (at_end()) {
                record(FixKind::unclosed_container);
                return obj;
            }
            std::string key;
            char c = peek();
            if (c == '"' || c == '\'') {
                key = parse_string(c);
            } else if (is_ident_start(c)) {
                record(FixKind::unquoted_key);
                key.push_back(take());
                while (!at_end() && is_ident_char(peek())) key.push_back(take());
            } else {
                fail(std::string("expected object key, found '") + c + "'");
            }
            skip_ws();
            if (at_end()) {
                // Dangling key with no value: drop it rather than invent one.
                record(FixKind::unclosed_container);
                return obj;
            }
            if (peek() != ':') fail("expected ':' after object key");
            take();
            skip_ws();
            if (at_end()) {
                record(FixKind::unclosed_container);
                return obj;
            }
            obj[key] = parse_value();
            skip_ws();
            if (at_end()) {
                record(FixKind::unclosed_container);
                return obj;
            }
            if (peek() == ',') {
                take();
                skip_ws();
                if (at_end()) {
                    record(FixKind::trailing_comma);
                    record(FixKind::unclosed_container);
                    return obj;
                }
                if (peek() == '}') {
                    record(FixKind::trailing_comma);
                    take();
                    return obj;
                }
                continue;
            }
            if (peek() == '}') {
                take();
                return obj;
            }
            fail("expected ',' or '}' in object");
        }
    }

    nlohmann::ordered_json parse_array() {
        take();  // '['
        auto arr = nlohmann::ordered_json::array();
        skip_ws();
        if (at_end()) {
            record(FixKind::unclosed_container);
            return arr;
        }
        if (peek() == ']') {
            take();
            return arr;
        }
        while (true) {
            skip_ws();
            if (at_end()) {
                record(FixKind::unclosed_container);
                return arr;
            }
            arr.push_back(parse_value());
            skip_ws();
            if (at_end()) {
                record(FixKind::unclosed_container);
                return arr;
            }
            if (peek() == ',') {
                take();
                skip_ws();
                if (at_end()) {
                    record(FixKind::trailing_comma);
                    record(FixKind::unclosed_container);
                    return arr;
                }
                if (peek() == ']') {
                    record(FixKind::trailing_comma);
                    take();
                    return arr;
                }
                continue;
            }
            if (peek() == ']') {
                take();
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }

    std::string parse_string(char quote) {
        if (quote == '\'') record(FixKind::single_quotes);
        take();  // opening quote
        std::string out;
        while (true) {
            if (at_end()) {
                // Truncated: close the string, do not invent content.
                record(FixKind::truncated_string);
                trim_incomplete_utf8_tail(out);
                break;
            }
            char c = take();
            if (c == quote) break;
            if (c == '\\') {
                if (at_end()) {
                    record(FixKind::truncated_string);
                    break;
                }
                char e = take();
                switch (e) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case '/': out.push_back('/'); break;
                    case 'b': out.push_back('\b'); break;
                    case 'f': out.push_back('\f'); break;
                    case 'n': out.push_back('\n'); break;
                    case 'r': out.push_back('\r'); break;
                    case 't': out.push_back('\t'); break;
                    case 'u':
                        if (!parse_unicode_escape(out)) {
                            record(FixKind::truncated_string);
                            pos_ = text_.size();
                        }
                        break;
                    case '\'':
                        if (quote == '\'') {
                            out.push_back('\'');
                            break;
                        }
                        fail("invalid escape \\'");
                    default: fail(std::string("invalid escape \\") + e);
                }
                if (at_end() && fixes_applied_truncation()) break;
            } else {
                // Raw control characters and UTF-8 bytes pass through as-is.
                out.push_back(c);
            }
        }
        if (!is_valid_utf8(out)) fail("string is not valid UTF-8");
        return out;
    }

    bool fixes_applied_truncation() const {
        return std::find(fixes_.begin(), fixes_.end(), FixKind::truncated_string) != fixes_.end();
    }

    // Returns false when the escape is cut off by end of input.
    bool parse_unicode_escape(std::string& out) {
        if (pos_ + 4 > text_.size()) return false;
        unsigned cp = parse_hex4();
        if (cp >= 0xD800 && cp <= 0xDBFF) {
            if (pos_ + 6 <= text_.size() && text_[pos_] == '\\' && text_[pos_ + 1] == 'u') {
                pos_ += 2;
                unsigned low = parse_hex4();
                if (low < 0xDC00 || low > 0xDFFF) fail("invalid low surrogate");
                cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
            } else {
                fail("lone high surrogate");
            }
        } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
            fail("lone low surrogate");
        }
        encode_utf8(cp, out);
        return true;
    }

    unsigned parse_hex4() {
        unsigned value = 0;
        for (int i = 0; i < 4; ++i) {
            char c = take();
            value <<= 4;
            if (c >= '0' && c <= '9') value |= static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') value |= static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') value |= static_cast<unsigned>(c - 'A' + 10);
            else fail("invalid \\u escape");
        }
        return value;
    }

    nlohmann::ordered_json parse_number() {
        const std::size_t start = pos_;
        if (!at_end() && peek() == '-') take();
        if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) {
            fail("malformed number");
        }
        if (take() != '0') {
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) take();
        }
        if (!at_end() && peek() == '.') {
            take();
            if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) {
                fail("malformed number fraction");
            }
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) take();
        }
        if (!at_end() && (peek() == 'e' || peek() == 'E')) {
            take();
            if (!at_end() && (peek() == '+' || peek() == '-')) take();
            if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) {
                fail("malformed number exponent");
            }
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) take();
        }
        const std::string_view span = text_.substr(start, pos_ - start);
        // Delegate value semantics to the strict parser.
        if (!nlohmann::ordered_json::accept(span)) fail("malformed number");
        return nlohmann::ordered_json::parse(span);
    }

    nlohmann::ordered_json parse_literal() {
        static constexpr std::string_view kTrue = "true";
        static constexpr std::string_view kFalse = "false";
        static constexpr std::string_view kNull = "null";
        for (std::string_view word : {kTrue, kFalse, kNull}) {
            if (text_.substr(pos_, word.size()) == word) {
                const std::size_t after = pos_ + word.size();
                if (after < text_.size() && is_ident_char(text_[after])) break;
                pos_ = after;
                if (word == kTrue) return nlohmann::ordered_json(true);
                if (word == kFalse) return nlohmann::ordered_json(false);
                return nlohmann::ordered_json(nullptr);
            }
        }
        fail("expected literal true/false/null");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<FixKind>& fixes_;
};

bool looks_like_language_tag(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' ||
               c == ' ' || c == '\r';
    });
}

// Returns the content of the first fenced block that contains JSON material.
std::optional<std::string> extract_fenced_block(const std::string& text) {
    std::size_t search = 0;
    while (true) {
        const std::size_t open = text.find("```", search);
        if (open == std::string::npos) return std::nullopt;
        std::size_t content_start = open + 3;
        const std::size_t line_end = text.find('\n', content_start);
        if (line_end != std::string::npos &&
            looks_like_language_tag(std::string_view(text).substr(content_start,
                                                                  line_end - content_start))) {
            content_start = line_end + 1;
        }
        const std::size_t close = text.find("```", content_start);
        const std::size_t content_end = (close == std::string::npos) ? text.size() : close;
        std::string content = text.substr(content_start, content_end - content_start);
        if (content.find_first_of("{[") != std::string::npos) return content;
        if (close == std::string::npos) return std::nullopt;
        search = close + 3;
    }
}

void record_fix(std::vector<FixKind>& fixes, FixKind kind) {
    if (std::find(fixes.begin(), fixes.end(), kind) == fixes.end()) fixes.push_back(kind);
}

}  // namespace

RepairOutcome repair_json(const std::string& text) {
    // Conservativity: strictly valid input passes through untouched.
    if (nlohmann::ordered_json::accept(text)) {
        return {nlohmann::ordered_json::parse(text), {}};
    }

    std::vector<FixKind> fixes;
    std::string working = text;
    if (auto fenced = extract_fenced_block(text)) {
        working = std::move(*fenced);
        record_fix(fixes, FixKind::fence_stripped);
        if (nlohmann::ordered_json::accept(working)) {
            return {nlohmann::ordered_json::parse(working), std::move(fixes)};
        }
    }

    const std::size_t first = working.find_first_of("{[");
    if (first == std::string::npos) {
        throw RepairError("no JSON value found in input");
    }
    if (!all_whitespace(std::string_view(working).substr(0, first))) {
        record_fix(fixes, FixKind::prose_stripped);
    }

    TolerantParser parser(std::string_view(working).substr(first), fixes);
    nlohmann::ordered_json value = parser.parse_value();
    const std::string_view rest = std::string_view(working).substr(first + parser.pos());
    if (!all_whitespace(rest)) {
        // Multiple top-level values or trailing prose: keep the first value.
        record_fix(fixes, FixKind::prose_stripped);
    }

    // Soundness gate: the outcome must round-trip under the strict parser.
    if (!nlohmann::ordered_json::accept(value.dump())) {
        throw RepairError("repaired value does not serialize to strict JSON");
    }
    return {std::move(value), std::move(fixes)};
}

std::string to_canonical_text(const nlohmann::ordered_json& value) {
    return value.dump();
}

}  // namespace omninova
