#include "wignerbox/json_io.hpp"

#include <algorithm>

namespace wignerbox {

namespace {

// (register name, token) pairs sorted by register name, for stable dumps.
template <typename A>
std::vector<std::pair<std::string, std::string>> sorted_labels(const StateVector<A> &state,
                                                               const LabelKey &key) {
    std::vector<std::pair<std::string, std::string>> labels;
    for (size_t i = 0; i < state.space()->size(); ++i) {
        labels.emplace_back(state.space()->reg(i).name, state.space()->token_name(i, key[i]));
    }
    std::sort(labels.begin(), labels.end());
    return labels;
}

template <typename A>
Json state_json_impl(const StateVector<A> &state,
                     const std::function<Json(const A &)> &exact_field) {
    std::vector<std::pair<std::vector<std::pair<std::string, std::string>>, const A *>> rows;
    for (const auto &[key, amp] : state.terms()) {
        rows.emplace_back(sorted_labels(state, key), &amp);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });

    Json terms = Json::array();
    for (const auto &[labels, amp] : rows) {
        Json labels_json = Json::object();
        for (const auto &[reg, tok] : labels) {
            labels_json[reg] = tok;
        }
        terms.push_back({{"labels", labels_json},
                         {"amplitude_exact", exact_field(*amp)},
                         {"amplitude_float", amp_traits<A>::to_double(*amp)}});
    }
    return terms;
}

} // namespace

Json state_to_json(const StateVector<ExactReal> &state) {
    return state_json_impl<ExactReal>(state,
                                      [](const ExactReal &a) { return Json(a.to_string()); });
}

Json state_to_json(const StateVector<double> &state) {
    return state_json_impl<double>(state, [](const double &) { return Json(nullptr); });
}

Json probability_to_json(const ExactReal &p) {
    return {{"exact", p.to_short_string()}, {"float", p.to_double()}};
}

Json probability_to_json(double p) { return {{"exact", nullptr}, {"float", p}}; }

Json statement_to_json(const CertaintyStatement &st) {
    Json premises = Json::array();
    for (const auto &p : st.premises) {
        premises.push_back(statement_to_json(*p));
    }
    return {{"agent", st.agent},           {"variable", st.variable}, {"value", st.value},
            {"time", st.time.str()},       {"rule", rule_tag_name(st.rule)},
            {"premises", premises}};
}

Json branch_to_json(const Scenario &scenario, const BranchReport &report) {
    Json labels = Json::object();
    Json displays = Json::object();
    std::vector<std::pair<std::string, std::string>> sorted = report.labels;
    std::sort(sorted.begin(), sorted.end());
    for (const auto &[reg, tok] : sorted) {
        labels[reg] = tok;
        if (scenario.space()->has_register(reg)) {
            size_t i = scenario.space()->index_of(reg);
            const TokenMeta &meta = scenario.meta(i, scenario.space()->token_index(i, tok));
            if (!meta.display.empty()) {
                displays[reg] = meta.display;
            }
        }
    }
    Json records = Json::array();
    for (const auto &st : report.records) {
        records.push_back(statement_to_json(*st));
    }
    Json violations = Json::array();
    for (const auto &[a, b] : report.violations) {
        violations.push_back({{"a", statement_to_json(*a)}, {"b", statement_to_json(*b)}});
    }
    return {{"labels", labels},
            {"displays", displays},
            {"amplitude_exact", report.amplitude.to_string()},
            {"amplitude_float", report.amplitude.to_double()},
            {"probability", probability_to_json(report.probability)},
            {"records", records},
            {"violations", violations}};
}

template <typename A> Json snapshot_to_json(const Snapshot<A> &snap) {
    return {{"checkpoint", snap.at.str()}, {"terms", state_to_json(snap.presented)}};
}
template Json snapshot_to_json(const Snapshot<ExactReal> &);
template Json snapshot_to_json(const Snapshot<double> &);

Json sample_report_to_json(const SampleReport &report) {
    Json freqs = Json::object();
    for (const auto &[key, count] : report.draw_counts) {
        freqs[key] = {{"draws", count},
                      {"frequency", static_cast<double>(count) /
                                        static_cast<double>(report.total_draws)}};
    }
    return {{"runs", report.runs},
            {"seed", report.seed},
            {"max_rounds", report.max_rounds},
            {"partial_runs", report.partial_runs},
            {"total_draws", report.total_draws},
            {"mean_halting_round", report.mean_halting_round},
            {"empirical", freqs},
            {"halting_rounds", report.halting_rounds}};
}

ExpectedState expected_state_from_json(const Json &j) {
    ExpectedState e;
    e.at = TimeStamp::parse(j.at("checkpoint").get<std::string>());
    for (const auto &r : j.at("registers")) {
        e.registers.push_back(r.get<std::string>());
    }
    for (const auto &term : j.at("terms")) {
        std::map<std::string, std::string> labels;
        for (const auto &[reg, tok] : term.at("labels").items()) {
            labels[reg] = tok.get<std::string>();
        }
        e.terms.emplace_back(std::move(labels),
                             ExactReal::parse(term.at("amplitude_exact").get<std::string>()));
    }
    return e;
}

Json expected_state_to_json(const ExpectedState &e) {
    Json regs = Json::array();
    for (const auto &r : e.registers) {
        regs.push_back(r);
    }
    Json terms = Json::array();
    for (const auto &[labels, amp] : e.terms) {
        Json labels_json = Json::object();
        for (const auto &[reg, tok] : labels) {
            labels_json[reg] = tok;
        }
        terms.push_back({{"labels", labels_json},
                         {"amplitude_exact", amp.to_string()},
                         {"amplitude_float", amp.to_double()}});
    }
    return {{"checkpoint", e.at.str()}, {"registers", regs}, {"terms", terms}};
}

ExpectedState expected_state_from_snapshot(const Snapshot<ExactReal> &snap) {
    ExpectedState e;
    e.at = snap.at;
    for (const auto &r : snap.presented.space()->registers()) {
        e.registers.push_back(r.name);
    }
    for (const auto &[key, amp] : snap.presented.terms()) {
        std::map<std::string, std::string> labels;
        for (size_t i = 0; i < snap.presented.space()->size(); ++i) {
            labels[snap.presented.space()->reg(i).name] =
                snap.presented.space()->token_name(i, key[i]);
        }
        e.terms.emplace_back(std::move(labels), amp);
    }
    return e;
}

CheckResult compare_snapshot(const ExpectedState &expected,
                             const StateVector<ExactReal> &presented) {
    CheckResult result;
    result.at = expected.at;

    auto label_str = [](const std::map<std::string, std::string> &labels) {
        std::string s = "(";
        bool first = true;
        for (const auto &[reg, tok] : labels) {
            if (!first) {
                s += ", ";
            }
            first = false;
            s += reg + "=" + tok;
        }
        return s + ")";
    };

    std::map<std::map<std::string, std::string>, ExactReal> actual;
    for (const auto &[key, amp] : presented.terms()) {
        std::map<std::string, std::string> labels;
        for (size_t i = 0; i < presented.space()->size(); ++i) {
            labels[presented.space()->reg(i).name] = presented.space()->token_name(i, key[i]);
        }
        actual[labels] = amp;
    }

    std::map<std::map<std::string, std::string>, ExactReal> wanted;
    for (const auto &[labels, amp] : expected.terms) {
        wanted[labels] = amp;
    }

    for (const auto &[labels, amp] : wanted) {
        auto it = actual.find(labels);
        if (it == actual.end()) {
            result.diffs.push_back("missing term " + label_str(labels) + ", expected " +
                                   amp.to_short_string());
        } else if (it->second != amp) {
            result.diffs.push_back("term " + label_str(labels) + ": expected " +
                                   amp.to_short_string() + ", got " +
                                   it->second.to_short_string());
        }
    }
    for (const auto &[labels, amp] : actual) {
        if (!wanted.count(labels)) {
            result.diffs.push_back("unexpected term " + label_str(labels) + " with amplitude " +
                                   amp.to_short_string());
        }
    }
    result.pass = result.diffs.empty();
    return result;
}

} // namespace wignerbox
