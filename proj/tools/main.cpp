// wignerbox: run, check, sample and validate timed multi-agent measurement
// protocols with exact state-vector evolution.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "wignerbox/engine.hpp"
#include "wignerbox/json_io.hpp"

namespace {

using namespace wignerbox;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitEngineError = 3;

struct Style {
    bool color;

    std::string green(const std::string &s) const {
        return color ? "\033[32m" + s + "\033[0m" : s;
    }
    std::string red(const std::string &s) const { return color ? "\033[31m" + s + "\033[0m" : s; }
    std::string bold(const std::string &s) const { return color ? "\033[1m" + s + "\033[0m" : s; }
};

Style make_style() {
    bool tty = isatty(fileno(stdout)) != 0;
    bool no_color = std::getenv("WIGNERBOX_NO_COLOR") != nullptr;
    return Style{tty && !no_color};
}

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Schedule load_schedule(const std::string &builtin, const std::string &file) {
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            throw InputError("cannot open protocol file: " + file);
        }
        std::stringstream text;
        text << in.rdbuf();
        return parse_schedule(text.str());
    }
    if (builtin == "fr" || builtin.empty()) {
        return canonical_fr_schedule();
    }
    throw InputError("unknown builtin protocol: " + builtin);
}

/// Accepts both "0:02" and the round-symbolic "n:02".
TimeStamp parse_tick(std::string text) {
    if (!text.empty() && (text[0] == 'n' || text[0] == 'N')) {
        text = "0" + text.substr(1);
    }
    return TimeStamp::parse(text);
}

std::string tick_label(TimeStamp t) {
    return "n:" + std::string(t.tick < 10 ? "0" : "") + std::to_string(t.tick);
}

ComparisonTimePolicy parse_policy(const std::string &name) {
    if (name == "declared") {
        return ComparisonTimePolicy::Declared;
    }
    if (name == "observation") {
        return ComparisonTimePolicy::ObservationTick;
    }
    throw InputError("unknown comparison policy: " + name);
}

void print_distribution(const Json &dist, const Style &style) {
    std::cout << style.bold("outcome distribution") << "\n";
    for (const auto &[key, p] : dist.items()) {
        std::cout << "  " << key << "  ";
        if (!p.at("exact").is_null()) {
            std::cout << p.at("exact").get<std::string>() << "  ";
        }
        std::cout << "(" << p.at("float").get<double>() << ")\n";
    }
}

void print_checkpoints(const Json &snaps, const Style &style) {
    for (const auto &snap : snaps) {
        std::cout << style.bold("state at " + snap.at("checkpoint").get<std::string>()) << "\n";
        for (const auto &term : snap.at("terms")) {
            std::cout << "  ";
            for (const auto &[reg, tok] : term.at("labels").items()) {
                std::cout << reg << "=" << tok.get<std::string>() << " ";
            }
            if (!term.at("amplitude_exact").is_null()) {
                std::cout << " " << term.at("amplitude_exact").get<std::string>();
            }
            std::cout << "  (" << term.at("amplitude_float").get<double>() << ")\n";
        }
    }
}

// ---- run --------------------------------------------------------------

int cmd_run(const std::string &builtin, const std::string &file, const std::string &mode,
            const std::vector<std::string> &checkpoint_args, const std::string &format,
            const std::string &policy_name) {
    Schedule schedule = load_schedule(builtin, file);
    Scenario scenario = Scenario::compile(schedule);
    ComparisonTimePolicy policy = parse_policy(policy_name);

    std::vector<TimeStamp> checkpoints;
    for (const auto &arg : checkpoint_args) {
        std::stringstream ss(arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) {
                checkpoints.push_back(parse_tick(item));
            }
        }
    }

    Json report;
    report["config"] = {{"protocol", file.empty() ? "builtin:fr" : file},
                        {"mode", mode},
                        {"policy", policy_name}};
    report["checkpoints"] = Json::array();
    report["violations"] = Json::array();

    if (mode == "collapse") {
        if (!checkpoints.empty()) {
            throw InputError("collapse mode keeps a classical ensemble; state checkpoints "
                             "are only defined for unitary runs");
        }
        Json dist = Json::object();
        for (const auto &[key, p] : collapse_distribution(scenario)) {
            dist[outcome_key(key)] = probability_to_json(p);
        }
        report["distribution"] = dist;
    } else if (mode == "float") {
        auto result = evolve_round<double>(scenario, checkpoints);
        for (const auto &snap : result.snapshots) {
            report["checkpoints"].push_back(snapshot_to_json(snap));
        }
        Json dist = Json::object();
        for (const auto &[key, p] : outcome_distribution(scenario, result.final_state)) {
            dist[outcome_key(key)] = probability_to_json(p);
        }
        report["distribution"] = dist;
    } else if (mode == "exact") {
        auto result = evolve_round<ExactReal>(scenario, checkpoints);
        for (const auto &snap : result.snapshots) {
            report["checkpoints"].push_back(snapshot_to_json(snap));
        }
        Json dist = Json::object();
        for (const auto &[key, p] : outcome_distribution(scenario, result.final_state)) {
            dist[outcome_key(key)] = probability_to_json(p);
        }
        report["distribution"] = dist;
        for (const auto &branch : detect_violations(scenario, result.final_state, policy)) {
            report["violations"].push_back(branch_to_json(scenario, branch));
        }
    } else {
        throw InputError("unknown mode: " + mode);
    }

    if (format == "json") {
        std::cout << report.dump(2) << "\n";
        return kExitOk;
    }
    Style style = make_style();
    print_distribution(report["distribution"], style);
    if (!report["violations"].empty()) {
        std::cout << style.bold("rule-S violations") << "\n";
        for (const auto &v : report["violations"]) {
            std::cout << "  branch";
            for (const auto &[reg, tok] : v.at("labels").items()) {
                std::cout << " " << reg << "=" << tok.get<std::string>();
            }
            std::cout << "   p = " << v.at("probability").at("exact").get<std::string>() << "\n";
            for (const auto &pair : v.at("violations")) {
                const auto &a = pair.at("a");
                const auto &b = pair.at("b");
                std::cout << "    " << a.at("agent").get<std::string>() << ": certain "
                          << a.at("variable").get<std::string>() << " = "
                          << a.at("value").get<std::string>() << " at "
                          << a.at("time").get<std::string>() << "  vs  certain "
                          << b.at("variable").get<std::string>() << " = "
                          << b.at("value").get<std::string>() << " at "
                          << b.at("time").get<std::string>() << "\n";
            }
        }
    }
    print_checkpoints(report["checkpoints"], style);
    return kExitOk;
}

// ---- check ------------------------------------------------------------

std::string default_data_dir() {
    if (const char *env = std::getenv("WIGNERBOX_DATA_DIR")) {
        return env;
    }
    return "data/expected/fr";
}

int cmd_check(const std::string &builtin, const std::string &file, const std::string &mode,
              const std::string &data_dir, const std::string &format) {
    if (mode != "exact") {
        throw InputError("check compares exact amplitude maps; exact mode required");
    }
    Schedule schedule = load_schedule(builtin, file);
    Scenario scenario = Scenario::compile(schedule);

    std::vector<ExpectedState> expected;
    std::error_code ec;
    std::filesystem::directory_iterator dir(data_dir, ec);
    if (ec) {
        throw InputError("cannot read expected-state directory: " + data_dir);
    }
    for (const auto &entry : dir) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        std::ifstream in(entry.path());
        expected.push_back(expected_state_from_json(Json::parse(in)));
    }
    if (expected.empty()) {
        throw InputError("no expected-state files in " + data_dir);
    }
    std::sort(expected.begin(), expected.end(),
              [](const ExpectedState &a, const ExpectedState &b) { return a.at < b.at; });

    std::vector<TimeStamp> checkpoints;
    for (const auto &e : expected) {
        checkpoints.push_back(e.at);
    }
    auto result = evolve_round<ExactReal>(scenario, checkpoints);

    Style style = make_style();
    Json rows = Json::array();
    bool all_pass = true;
    for (size_t i = 0; i < expected.size(); ++i) {
        CheckResult check = compare_snapshot(expected[i], result.snapshots[i].presented);
        all_pass = all_pass && check.pass;
        Json diffs = Json::array();
        for (const auto &d : check.diffs) {
            diffs.push_back(d);
        }
        rows.push_back({{"checkpoint", check.at.str()},
                        {"pass", check.pass},
                        {"terms", expected[i].terms.size()},
                        {"diffs", diffs}});
        if (format != "json") {
            std::cout << (check.pass ? style.green("PASS") : style.red("FAIL")) << "  "
                      << tick_label(check.at) << "  (" << expected[i].terms.size() << " terms)\n";
            for (const auto &d : check.diffs) {
                std::cout << "      " << d << "\n";
            }
        }
    }
    if (format == "json") {
        std::cout << Json({{"checkpoints", rows}, {"pass", all_pass}}).dump(2) << "\n";
    } else {
        std::cout << (all_pass ? style.green("all checkpoints reproduced")
                               : style.red("checkpoint mismatch"))
                  << "\n";
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

// ---- sample -------------------------------------------------------------

int cmd_sample(const std::string &builtin, const std::string &file, const std::string &mode,
               uint32_t runs, uint64_t seed, uint32_t max_rounds, bool allow_partial,
               const std::string &format) {
    if (mode != "float" && mode != "exact") {
        throw InputError("sample supports --mode exact|float");
    }
    Schedule schedule = load_schedule(builtin, file);
    Scenario scenario = Scenario::compile(schedule);

    RunConfig config;
    config.mode = mode == "float" ? Mode::Float : Mode::Exact;
    config.seed = seed;
    config.max_rounds = max_rounds;

    SampleReport report = sample_runs(scenario, config, runs);
    if (format == "json") {
        std::cout << sample_report_to_json(report).dump(2) << "\n";
    } else {
        std::cout << "runs: " << report.runs << "  seed: " << report.seed << "\n";
        std::cout << "mean halting round: " << report.mean_halting_round << "\n";
        std::cout << "rounds drawn in total: " << report.total_draws << "\n";
        for (const auto &[key, count] : report.draw_counts) {
            std::cout << "  " << key << ": " << count << "  ("
                      << static_cast<double>(count) / static_cast<double>(report.total_draws)
                      << ")\n";
        }
        if (report.partial_runs) {
            std::cout << report.partial_runs << " run(s) hit max-rounds without halting\n";
        }
    }
    if (report.partial_runs > 0 && !allow_partial) {
        std::cerr << "error: " << report.partial_runs
                  << " run(s) exceeded max rounds (pass --allow-partial to accept)\n";
        return kExitEngineError;
    }
    return kExitOk;
}

// ---- validate -------------------------------------------------------------

int cmd_validate(const std::string &builtin, const std::string &file, const std::string &format) {
    Schedule schedule;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) {
            throw InputError("cannot open protocol file: " + file);
        }
        std::stringstream text;
        text << in.rdbuf();
        schedule = parse_schedule_unchecked(text.str());
    } else {
        if (!(builtin == "fr" || builtin.empty())) {
            throw InputError("unknown builtin protocol: " + builtin);
        }
        schedule = canonical_fr_schedule();
    }
    auto diagnostics = validate(schedule);
    if (format == "json") {
        Json rows = Json::array();
        for (const auto &d : diagnostics) {
            rows.push_back({{"step", d.step}, {"message", d.message}});
        }
        std::cout << Json({{"ok", diagnostics.empty()}, {"diagnostics", rows}}).dump(2) << "\n";
    } else {
        for (const auto &d : diagnostics) {
            if (d.step >= 0) {
                std::cout << "step " << d.step << ": ";
            }
            std::cout << d.message << "\n";
        }
        if (diagnostics.empty()) {
            std::cout << "ok\n";
        }
    }
    return diagnostics.empty() ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"exact state-vector simulator for timed multi-agent measurement protocols"};
    app.require_subcommand(1);

    std::string builtin, file, mode = "exact", format = "table", policy = "declared";
    std::string data_dir = default_data_dir();
    std::vector<std::string> checkpoints;
    uint32_t runs = 1, max_rounds = 1000;
    uint64_t seed = 0;
    bool allow_partial = false;

    auto add_protocol_flags = [&](CLI::App *cmd) {
        cmd->add_option("--builtin", builtin, "built-in protocol name (fr)");
        cmd->add_option("--file", file, "protocol file in the text format");
    };

    CLI::App *run = app.add_subcommand("run", "evolve one round and report the final state");
    add_protocol_flags(run);
    run->add_option("--mode", mode, "exact | float | collapse");
    run->add_option("--checkpoints", checkpoints,
                    "comma-separated ticks to snapshot (e.g. n:02,n:24)");
    run->add_option("--format", format, "table | json");
    run->add_option("--compare-policy", policy, "declared | observation");

    CLI::App *check = app.add_subcommand("check", "compare snapshots against expected states");
    add_protocol_flags(check);
    check->add_option("--mode", mode, "must be exact");
    check->add_option("--data", data_dir, "directory of expected-state JSON files");
    check->add_option("--format", format, "table | json");

    CLI::App *sample = app.add_subcommand("sample", "seeded multi-round sampling to the halt");
    add_protocol_flags(sample);
    sample->add_option("--runs", runs, "number of independent runs")->required();
    sample->add_option("--seed", seed, "64-bit generator seed")->required();
    sample->add_option("--max-rounds", max_rounds, "round cap per run");
    sample->add_flag("--allow-partial", allow_partial, "tolerate runs that never halt");
    sample->add_option("--mode", mode, "exact | float");
    sample->add_option("--format", format, "table | json");

    CLI::App *validate_cmd = app.add_subcommand("validate", "parse and validate a protocol file");
    add_protocol_flags(validate_cmd);
    validate_cmd->add_option("--format", format, "table | json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (run->parsed()) {
            return cmd_run(builtin, file, mode, checkpoints, format, policy);
        }
        if (check->parsed()) {
            return cmd_check(builtin, file, mode, data_dir, format);
        }
        if (sample->parsed()) {
            return cmd_sample(builtin, file, mode, runs, seed, max_rounds, allow_partial, format);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(builtin, file, format);
        }
    } catch (const SyntaxError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const SemanticError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEngineError;
    }
    return kExitInputError;
}
