#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace omninova {

enum class FixKind {
    fence_stripped,
    trailing_comma,
    single_quotes,
    unquoted_key,
    unclosed_container,
    truncated_string,
    prose_stripped,
};

std::string fix_kind_name(FixKind kind);

// Raised when no plausible JSON value can be recovered (for example pure
// prose with no brace or bracket).
class RepairError : public std::runtime_error {
public:
    explicit RepairError(const std::string& message) : std::runtime_error(message) {}
};

struct RepairOutcome {
    nlohmann::ordered_json value;
    // Fixes in first-application order, deduplicated.
    std::vector<FixKind> applied_fixes;

    bool applied(FixKind kind) const;
};

// Converts almost-JSON text into a strictly valid JSON value.
//
// Pipeline, in order: (1) strip markdown code fences and prose around the
// value; (2) tokenize tolerantly, accepting single-quoted strings and
// unquoted identifier keys; (3) drop trailing commas; (4) close unclosed
// strings at end of input, then unclosed containers in LIFO order;
// (5) verify the result under a strict parser. Input that already parses
// strictly is returned unchanged with no fixes. Raw control characters
// inside string literals are accepted verbatim.
//
// Throws RepairError when nothing recoverable is found.
RepairOutcome repair_json(const std::string& text);

// Deterministic serialization: object keys in insertion order, minimal
// whitespace, UTF-8, no escaping beyond JSON requirements.
std::string to_canonical_text(const nlohmann::ordered_json& value);

}  // namespace omninova
