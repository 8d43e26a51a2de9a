#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "wignerbox/engine.hpp"

namespace wignerbox::testing {

inline std::string project_root() {
    if (const char *env = std::getenv("WIGNERBOX_ROOT")) {
        return env;
    }
    return ".";
}

inline std::string cli_binary() {
    if (const char *env = std::getenv("WIGNERBOX_BIN")) {
        return env;
    }
    return "./build/wignerbox";
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommandResult {
    int exit_code;
    std::string output;
};

/// Runs a shell command, capturing stdout (stderr folded in).
inline CommandResult run_command(const std::string &command) {
    std::string full = command + " 2>&1";
    FILE *pipe = popen(full.c_str(), "r");
    if (!pipe) {
        throw std::runtime_error("popen failed for: " + command);
    }
    std::string output;
    char buffer[4096];
    size_t n;
    while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
        output.append(buffer, n);
    }
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, output};
}

/// The exact amplitudes used all over the protocol, by radicand.
inline ExactReal rt(long num, long den) { return ExactReal::from_sqrt(Rational(num, den)); }

} // namespace wignerbox::testing
