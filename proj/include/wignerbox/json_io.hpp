#pragma once

#include <json.hpp>

#include "wignerbox/engine.hpp"

namespace wignerbox {

using Json = nlohmann::ordered_json;

/// Dump format: ordered list of {labels, amplitude_exact, amplitude_float},
/// labels keyed by register name, terms sorted lexicographically by register
/// name then token.
Json state_to_json(const StateVector<ExactReal> &state);
Json state_to_json(const StateVector<double> &state);

/// {"exact": "1/12", "float": 0.0833...}; compact exact form, null in float mode.
Json probability_to_json(const ExactReal &p);
Json probability_to_json(double p);

Json statement_to_json(const CertaintyStatement &st);
Json branch_to_json(const Scenario &scenario, const BranchReport &report);

template <typename A> Json snapshot_to_json(const Snapshot<A> &snap);

Json sample_report_to_json(const SampleReport &report);

// ---- Expected checkpoint states (data files) -----------------------------

struct ExpectedState {
    TimeStamp at;
    std::vector<std::string> registers; // presentation register order
    std::vector<std::pair<std::map<std::string, std::string>, ExactReal>> terms;
};

ExpectedState expected_state_from_json(const Json &j);
Json expected_state_to_json(const ExpectedState &e);
/// Renders a presented snapshot in the expected-state file format.
ExpectedState expected_state_from_snapshot(const Snapshot<ExactReal> &snap);

struct CheckResult {
    TimeStamp at;
    bool pass = false;
    std::vector<std::string> diffs; // labeled amplitude differences
};

CheckResult compare_snapshot(const ExpectedState &expected,
                             const StateVector<ExactReal> &presented);

} // namespace wignerbox
