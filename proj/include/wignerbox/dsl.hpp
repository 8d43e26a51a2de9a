#pragma once

#include <stdexcept>
#include <string>

#include "wignerbox/protocol.hpp"

namespace wignerbox {

struct SyntaxError : std::runtime_error {
    int line;
    int col;
    std::string expected;

    SyntaxError(int line_, int col_, const std::string &expected_, const std::string &got)
        : std::runtime_error("syntax error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": expected " + expected_ + ", got " + got),
          line(line_), col(col_), expected(expected_) {}
};

struct SemanticError : std::runtime_error {
    int line; // -1 when not tied to a source location

    explicit SemanticError(const std::string &msg, int line_ = -1)
        : std::runtime_error(line_ >= 0 ? "semantic error at line " + std::to_string(line_) +
                                              ": " + msg
                                        : "semantic error: " + msg),
          line(line_) {}
};

/// Parses the protocol text format and validates the result. Throws
/// SyntaxError for grammar violations and SemanticError when the schedule
/// is structurally invalid (undeclared register, non-orthonormal basis,
/// time ordering violation, ...).
Schedule parse_schedule(const std::string &text);

/// Syntax and reference resolution only; callers run validate() themselves.
Schedule parse_schedule_unchecked(const std::string &text);

} // namespace wignerbox
