#include "wignerbox/agents.hpp"

#include <set>
#include <sstream>

namespace wignerbox {

std::string rule_tag_name(RuleTag tag) {
    switch (tag) {
    case RuleTag::Q: return "Q";
    case RuleTag::Qii: return "Qii";
    case RuleTag::C: return "C";
    }
    return "?";
}

RuleTag rule_tag_from_name(const std::string &name) {
    if (name == "Q") {
        return RuleTag::Q;
    }
    if (name == "Qii") {
        return RuleTag::Qii;
    }
    if (name == "C") {
        return RuleTag::C;
    }
    throw std::invalid_argument("unknown rule tag: " + name);
}

std::string CertaintyStatement::str() const {
    std::ostringstream out;
    out << agent << ": certain " << variable << " = " << value << " at " << time.str() << " ["
        << rule_tag_name(rule) << "]";
    return out.str();
}

bool operator==(const CertaintyStatement &a, const CertaintyStatement &b) {
    if (a.agent != b.agent || a.variable != b.variable || a.value != b.value || a.time != b.time ||
        a.rule != b.rule || a.premises.size() != b.premises.size()) {
        return false;
    }
    for (size_t i = 0; i < a.premises.size(); ++i) {
        if (!(*a.premises[i] == *b.premises[i])) {
            return false;
        }
    }
    return true;
}

StatementPtr make_statement(std::string agent, std::string variable, std::string value,
                            TimeStamp time, RuleTag rule, std::vector<StatementPtr> premises) {
    auto s = std::make_shared<CertaintyStatement>();
    s->agent = std::move(agent);
    s->variable = std::move(variable);
    s->value = std::move(value);
    s->time = time;
    s->rule = rule;
    s->premises = std::move(premises);
    return s;
}

template <typename A>
std::optional<StatementPtr> rule_q_certify(const StateVector<A> &prepared,
                                           const MeasurementBasis<A> &basis,
                                           const std::string &agent, const std::string &variable,
                                           TimeStamp time) {
    auto probs = born_distribution(prepared, basis);
    for (const auto &[outcome, p] : probs) {
        if (amp_traits<A>::close(p, amp_traits<A>::one())) {
            return make_statement(agent, variable, outcome, time, RuleTag::Q);
        }
    }
    return std::nullopt;
}

StatementPtr rule_q_observed(const std::string &agent, const std::string &variable,
                             const std::string &outcome, TimeStamp time) {
    return make_statement(agent, variable, outcome, time, RuleTag::Qii);
}

StatementPtr rule_c_lift(const std::string &outer_agent, const StatementPtr &inner) {
    return make_statement(outer_agent, inner->variable, inner->value, inner->time, RuleTag::C,
                          {inner});
}

std::vector<std::pair<StatementPtr, StatementPtr>>
rule_s_check(const std::vector<StatementPtr> &records) {
    std::vector<std::pair<StatementPtr, StatementPtr>> violations;
    for (size_t i = 0; i < records.size(); ++i) {
        for (size_t j = i + 1; j < records.size(); ++j) {
            const auto &a = records[i];
            const auto &b = records[j];
            if (a->agent == b->agent && a->variable == b->variable && a->time == b->time &&
                a->value != b->value) {
                violations.emplace_back(a, b);
            }
        }
    }
    return violations;
}

bool operator==(const InferenceRow &a, const InferenceRow &b) {
    if (a.trigger != b.trigger || a.write != b.write ||
        a.statements.size() != b.statements.size()) {
        return false;
    }
    for (size_t i = 0; i < a.statements.size(); ++i) {
        if (!(*a.statements[i] == *b.statements[i])) {
            return false;
        }
    }
    return true;
}

bool operator==(const InferenceTable &a, const InferenceTable &b) {
    return a.agent == b.agent && a.source == b.source && a.dest == b.dest && a.rows == b.rows;
}

template <typename A>
BasisMapOperator<A> compile_inference_unitary(const InferenceTable &table,
                                              const RegisterSpace &space) {
    size_t src = space.index_of(table.source);
    size_t dst = space.index_of(table.dest);
    BasisMapOperator<A> op;

    std::set<std::string> triggers;
    std::set<std::string> writes;
    for (const auto &row : table.rows) {
        if (!triggers.insert(row.trigger).second) {
            throw NonInjectiveTable(table.agent + ": duplicate trigger " + row.trigger);
        }
        if (src == dst && !writes.insert(row.write).second) {
            throw NonInjectiveTable(table.agent + ": two rows write token " + row.write);
        }
    }

    if (src == dst) {
        op.domain = {dst};
        for (const auto &row : table.rows) {
            uint16_t in = space.token_index(dst, row.trigger);
            uint16_t out = space.token_index(dst, row.write);
            op.rows.push_back({{in}, {{{out}, amp_traits<A>::one()}}});
        }
    } else {
        op.domain = {src, dst};
        uint16_t ready = space.reg(dst).init;
        for (const auto &row : table.rows) {
            uint16_t in = space.token_index(src, row.trigger);
            uint16_t out = space.token_index(dst, row.write);
            op.rows.push_back({{in, ready}, {{{in, out}, amp_traits<A>::one()}}});
        }
    }
    op.check_isometry();
    return op;
}

template std::optional<StatementPtr> rule_q_certify(const StateVector<ExactReal> &,
                                                    const MeasurementBasis<ExactReal> &,
                                                    const std::string &, const std::string &,
                                                    TimeStamp);
template std::optional<StatementPtr> rule_q_certify(const StateVector<double> &,
                                                    const MeasurementBasis<double> &,
                                                    const std::string &, const std::string &,
                                                    TimeStamp);
template BasisMapOperator<ExactReal> compile_inference_unitary(const InferenceTable &,
                                                               const RegisterSpace &);
template BasisMapOperator<double> compile_inference_unitary(const InferenceTable &,
                                                            const RegisterSpace &);

} // namespace wignerbox
