#include "wignerbox/protocol.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace wignerbox {

const RegisterDecl *Schedule::find_register(const std::string &name) const {
    for (const auto &r : registers) {
        if (r.name == name) {
            return &r;
        }
    }
    return nullptr;
}

const NamedState *Schedule::find_state(const std::string &name) const {
    for (const auto &s : states) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

const NamedBasis *Schedule::find_basis(const std::string &name) const {
    for (const auto &b : bases) {
        if (b.name == name) {
            return &b;
        }
    }
    return nullptr;
}

namespace {

// Inner product of two string-level expressions over the same register list.
ExactReal expr_dot(const LinearExpr &a, const LinearExpr &b) {
    ExactReal total;
    for (const auto &ta : a) {
        for (const auto &tb : b) {
            if (ta.tokens == tb.tokens) {
                total += ta.coeff * tb.coeff;
            }
        }
    }
    return total;
}

class Validator {
  public:
    explicit Validator(const Schedule &s) : s_(s) {}

    std::vector<Diagnostic> run() {
        declarations();
        steps();
        return std::move(out_);
    }

  private:
    void add(int step, std::string msg) { out_.push_back({step, std::move(msg)}); }

    bool token_ok(const std::string &reg, const std::string &token) const {
        const RegisterDecl *r = s_.find_register(reg);
        if (!r) {
            return false;
        }
        return std::find(r->tokens.begin(), r->tokens.end(), token) != r->tokens.end();
    }

    void check_expr(int step, const LinearExpr &expr, const std::vector<std::string> &regs,
                    const std::string &what, bool need_normalized) {
        if (expr.empty()) {
            add(step, what + ": empty expression");
            return;
        }
        for (const auto &term : expr) {
            if (term.tokens.size() != regs.size()) {
                add(step, what + ": term arity does not match register list");
                return;
            }
            for (size_t i = 0; i < regs.size(); ++i) {
                if (!token_ok(regs[i], term.tokens[i])) {
                    add(step, what + ": token " + term.tokens[i] + " not in alphabet of " +
                                  regs[i]);
                    return;
                }
            }
        }
        if (need_normalized && expr_dot(expr, expr) != ExactReal(1)) {
            add(step, what + ": not normalized");
        }
    }

    void check_registers_exist(int step, const std::vector<std::string> &regs,
                               const std::string &what) {
        for (const auto &r : regs) {
            if (!s_.find_register(r)) {
                add(step, what + ": undeclared register " + r);
            }
        }
    }

    void declarations() {
        std::set<std::string> names;
        for (const auto &r : s_.registers) {
            if (!names.insert(r.name).second) {
                add(-1, "duplicate register " + r.name);
            }
            if (r.tokens.empty()) {
                add(-1, "register " + r.name + ": empty alphabet");
                continue;
            }
            std::set<std::string> toks(r.tokens.begin(), r.tokens.end());
            if (toks.size() != r.tokens.size()) {
                add(-1, "register " + r.name + ": repeated token");
            }
            if (!toks.count(r.init)) {
                add(-1, "register " + r.name + ": init token not in alphabet");
            }
            for (const auto &[tok, text] : r.displays) {
                if (!toks.count(tok)) {
                    add(-1, "register " + r.name + ": display for unknown token " + tok);
                }
            }
        }
        std::set<std::string> state_names;
        for (const auto &st : s_.states) {
            if (!state_names.insert(st.name).second) {
                add(-1, "duplicate state " + st.name);
            }
            check_registers_exist(-1, st.registers, "state " + st.name);
            check_expr(-1, st.expr, st.registers, "state " + st.name, true);
        }
        std::set<std::string> basis_names;
        for (const auto &b : s_.bases) {
            if (!basis_names.insert(b.name).second) {
                add(-1, "duplicate basis " + b.name);
            }
            if (names.count(b.name)) {
                add(-1, "basis " + b.name + " shadows a register name");
            }
            check_registers_exist(-1, b.registers, "basis " + b.name);
            std::set<std::string> outs;
            for (const auto &[tok, expr] : b.outcomes) {
                if (!outs.insert(tok).second) {
                    add(-1, "basis " + b.name + ": duplicate outcome " + tok);
                }
                check_expr(-1, expr, b.registers, "basis " + b.name + " outcome " + tok, true);
            }
            for (size_t i = 0; i < b.outcomes.size(); ++i) {
                for (size_t j = i + 1; j < b.outcomes.size(); ++j) {
                    if (expr_dot(b.outcomes[i].second, b.outcomes[j].second) != ExactReal(0)) {
                        add(-1, "basis " + b.name + ": outcomes " + b.outcomes[i].first + " and " +
                                    b.outcomes[j].first + " not orthogonal");
                    }
                }
            }
        }
    }

    void check_table(int step, const InferenceTable &t) {
        const RegisterDecl *src = s_.find_register(t.source);
        const RegisterDecl *dst = s_.find_register(t.dest);
        if (!src || !dst) {
            add(step, "inference table references undeclared register");
            return;
        }
        std::set<std::string> triggers, writes;
        for (const auto &row : t.rows) {
            if (!token_ok(t.source, row.trigger)) {
                add(step, "trigger " + row.trigger + " not in alphabet of " + t.source);
            }
            if (!token_ok(t.dest, row.write)) {
                add(step, "written token " + row.write + " not in alphabet of " + t.dest);
            }
            if (!triggers.insert(row.trigger).second) {
                add(step, "duplicate trigger " + row.trigger);
            }
            if (t.source == t.dest && !writes.insert(row.write).second) {
                add(step, "two rows write token " + row.write);
            }
        }
    }

    void steps() {
        int halt_count = 0;
        for (size_t i = 0; i < s_.steps.size(); ++i) {
            const Step &step = s_.steps[i];
            int si = static_cast<int>(i);
            if (i > 0) {
                const Step &prev = s_.steps[i - 1];
                bool prepare_pair = std::holds_alternative<PrepareRandom>(prev.action) &&
                                    std::holds_alternative<ConditionalPrepare>(step.action);
                if (step.at < prev.at || (step.at == prev.at && !prepare_pair)) {
                    add(si, "timestamp " + step.at.str() + " does not advance past " +
                                prev.at.str());
                }
            }
            std::visit([&](const auto &a) { check_action(si, step, a); }, step.action);
            if (std::holds_alternative<HaltCheck>(step.action)) {
                ++halt_count;
                if (i + 1 != s_.steps.size()) {
                    add(si, "halt check must be the last step");
                }
            }
        }
        if (halt_count != 1) {
            add(-1, "schedule must contain exactly one halt check, found " +
                        std::to_string(halt_count));
        }
    }

    void check_action(int si, const Step &, const PrepareRandom &p) {
        check_registers_exist(si, {p.reg}, "prepare");
        const NamedState *st = s_.find_state(p.state);
        if (!st) {
            add(si, "prepare: undeclared state " + p.state);
        } else if (st->registers != std::vector<std::string>{p.reg}) {
            add(si, "prepare: state " + p.state + " is not a state of register " + p.reg);
        }
    }

    void check_action(int si, const Step &, const ConditionalPrepare &c) {
        check_registers_exist(si, {c.source, c.target}, "condprepare");
        if (c.source == c.target) {
            add(si, "condprepare: source and target must differ");
        }
        std::set<std::string> seen;
        for (const auto &[trigger, expr] : c.arms) {
            if (!token_ok(c.source, trigger)) {
                add(si, "condprepare: trigger " + trigger + " not in alphabet of " + c.source);
            }
            if (!seen.insert(trigger).second) {
                add(si, "condprepare: duplicate arm " + trigger);
            }
            check_expr(si, expr, {c.target}, "condprepare arm " + trigger, true);
        }
    }

    void check_action(int si, const Step &step, const MeasureStep &m) {
        check_registers_exist(si, m.targets, "measure");
        check_registers_exist(si, {m.dest}, "measure");
        if (std::find(m.targets.begin(), m.targets.end(), m.dest) != m.targets.end()) {
            add(si, "measure: dest register is among the measured registers");
        }
        if (m.variable.empty()) {
            add(si, "measure: missing variable name");
        }
        const NamedBasis *b = s_.find_basis(m.basis);
        if (!b) {
            add(si, "measure: undeclared basis " + m.basis);
            return;
        }
        if (b->registers != m.targets) {
            add(si, "measure: basis " + m.basis + " is not over the measured registers");
        }
        if (m.compare_at && *m.compare_at < step.at) {
            add(si, "measure: comparison time precedes the measurement");
        }
        std::set<std::string> outcome_names;
        for (const auto &[tok, expr] : b->outcomes) {
            outcome_names.insert(tok);
        }
        if (m.records.empty()) {
            // Default map: outcomes recorded under their own names.
            for (const auto &name : outcome_names) {
                if (!token_ok(m.dest, name)) {
                    add(si, "measure: outcome " + name + " not in alphabet of " + m.dest +
                                " (default record map)");
                }
            }
            return;
        }
        std::set<std::pair<std::string, std::string>> pres;
        std::set<std::string> posts;
        for (const auto &r : m.records) {
            if (!token_ok(m.dest, r.pre) || !token_ok(m.dest, r.post)) {
                add(si, "measure: record rule uses token outside " + m.dest + "'s alphabet");
            }
            if (!outcome_names.count(r.outcome)) {
                add(si, "measure: record rule references unknown outcome " + r.outcome);
            }
            if (!pres.insert({r.pre, r.outcome}).second) {
                add(si, "measure: duplicate record rule for (" + r.pre + ", " + r.outcome + ")");
            }
            if (!posts.insert(r.post).second) {
                add(si, "measure: record map writes token " + r.post + " twice");
            }
        }
    }

    void check_action(int si, const Step &step, const InferStep &inf) {
        if (inf.stages.empty()) {
            add(si, "infer: no stages");
            return;
        }
        TimeStamp prev = step.at;
        bool first = true;
        for (const auto &stage : inf.stages) {
            if (stage.done < step.at || (!first && stage.done <= prev)) {
                add(si, "infer: stage completion ticks must advance");
            }
            prev = stage.done;
            first = false;
            if (stage.table.agent != inf.agent) {
                add(si, "infer: stage table agent differs from step agent");
            }
            check_table(si, stage.table);
        }
    }

    void check_action(int si, const Step &, const AccessMemoryStep &a) {
        if (a.table.source == a.table.dest) {
            add(si, "access: source and dest must differ");
        }
        check_table(si, a.table);
    }

    void check_action(int si, const Step &, const HaltCheck &h) {
        if (h.conditions.empty()) {
            add(si, "halt: empty condition");
        }
        for (const auto &[reg, value] : h.conditions) {
            if (!s_.find_register(reg)) {
                add(si, "halt: undeclared register " + reg);
                continue;
            }
            // The value must be an outcome some measure step records into reg.
            bool found = false;
            for (const auto &step : s_.steps) {
                const auto *m = std::get_if<MeasureStep>(&step.action);
                if (!m || m->dest != reg) {
                    continue;
                }
                const NamedBasis *b = s_.find_basis(m->basis);
                if (!b) {
                    continue;
                }
                for (const auto &[tok, expr] : b->outcomes) {
                    if (tok == value) {
                        found = true;
                    }
                }
            }
            if (!found) {
                add(si, "halt: no measurement records outcome " + value + " into " + reg);
            }
        }
    }

    const Schedule &s_;
    std::vector<Diagnostic> out_;
};

} // namespace

std::vector<Diagnostic> validate(const Schedule &schedule) { return Validator(schedule).run(); }

// ---- The canonical Frauchiger-Renner protocol ---------------------------

namespace {

LinearExpr ket(const std::vector<std::string> &tokens) {
    return {{ExactReal(1), tokens}};
}

LinearTerm term(const Rational &radicand, std::vector<std::string> tokens, bool negative = false) {
    ExactReal c = ExactReal::from_sqrt(radicand);
    return {negative ? -c : c, std::move(tokens)};
}

} // namespace

Schedule canonical_fr_schedule() {
    Schedule s;

    s.registers.push_back(
        {"R", {"heads", "tails"}, "heads", {}});
    s.registers.push_back({"FbarMem",
                           {"ready", "cert-w-fail", "no-concl"},
                           "ready",
                           {{"cert-w-fail", "r = tails, so I am certain that w = fail at n:31"},
                            {"no-concl", "r = heads, so no conclusion drawn"}}});
    s.registers.push_back({"S", {"down", "up"}, "up", {}});
    s.registers.push_back(
        {"FMem",
         {"ready", "obs-z-plus", "obs-z-minus", "cert-r-tails", "no-concl", "cert-w-fail"},
         "ready",
         {{"obs-z-plus", "I observed z = +1/2"},
          {"obs-z-minus", "I observed z = -1/2"},
          {"cert-r-tails", "z = +1/2, so I am certain that r = tails"},
          {"no-concl", "z = -1/2; no conclusion drawn"},
          {"cert-w-fail", "z = +1/2, so I am certain that w = fail at n:31"}}});
    s.registers.push_back(
        {"WbarMem",
         {"ready", "obs-okbar", "obs-failbar", "cert-w-fail", "no-concl"},
         "ready",
         {{"obs-okbar", "I observed wbar = okbar"},
          {"obs-failbar", "I observed wbar = failbar"},
          {"cert-w-fail", "wbar = okbar, so I am certain that w = fail at n:31"},
          {"no-concl", "wbar = failbar; no conclusion drawn"}}});
    s.registers.push_back(
        {"WMem",
         {"ready", "cert-w-fail", "no-concl", "cert-w-fail-obs-ok", "cert-w-fail-obs-fail",
          "no-concl-obs-ok", "no-concl-obs-fail"},
         "ready",
         {{"cert-w-fail", "I am certain that w = fail at n:31"},
          {"no-concl", "no conclusion drawn"},
          {"cert-w-fail-obs-ok", "I am certain that w = fail at n:31; now I observe w = ok"},
          {"cert-w-fail-obs-fail", "I am certain that w = fail at n:31; now I observe w = fail"},
          {"no-concl-obs-ok", "no conclusion drawn previously; now I observe w = ok"},
          {"no-concl-obs-fail", "no conclusion drawn previously; now I observe w = fail"}}});

    s.states.push_back(
        {"init_R", {"R"}, {term({1, 3}, {"heads"}), term({2, 3}, {"tails"})}});

    // Lab basis states, written over the underlying registers:
    //   hbar      = |heads, no-concl>          tbar      = |tails, cert-w-fail>
    //   plus-half = |up, cert-w-fail>          minus-half = |down, no-concl>
    s.bases.push_back({"zbasis",
                       {"S"},
                       {{"z-minus", ket({"down"})}, {"z-plus", ket({"up"})}}});
    s.bases.push_back({"lbar",
                       {"R", "FbarMem"},
                       {{"okbar",
                         {term({1, 2}, {"heads", "no-concl"}),
                          term({1, 2}, {"tails", "cert-w-fail"}, true)}},
                        {"failbar",
                         {term({1, 2}, {"heads", "no-concl"}),
                          term({1, 2}, {"tails", "cert-w-fail"})}}}});
    s.bases.push_back({"l",
                       {"S", "FMem"},
                       {{"ok",
                         {term({1, 2}, {"down", "no-concl"}),
                          term({1, 2}, {"up", "cert-w-fail"}, true)}},
                        {"fail",
                         {term({1, 2}, {"down", "no-concl"}),
                          term({1, 2}, {"up", "cert-w-fail"})}}}});

    // Certainty statements, with their derivation chains.
    StatementPtr fbar_w = make_statement("Fbar", "w", "fail", {0, 31}, RuleTag::Q);
    StatementPtr f_r = make_statement("F", "r", "tails", {0, 10}, RuleTag::Q);
    StatementPtr f_w = make_statement("F", "w", "fail", {0, 31}, RuleTag::C, {fbar_w});
    StatementPtr wbar_z = make_statement("Wbar", "z", "z-plus", {0, 10}, RuleTag::Q);
    StatementPtr wbar_w = make_statement("Wbar", "w", "fail", {0, 31}, RuleTag::C, {f_w});
    StatementPtr w_w = make_statement("W", "w", "fail", {0, 31}, RuleTag::C, {wbar_w});

    // n:00 -- the randomness generator and the conditional spin preparation.
    s.steps.push_back({{0, 0}, PrepareRandom{"R", "init_R"}});
    s.steps.push_back({{0, 0},
                       ConditionalPrepare{"R",
                                          "S",
                                          {{"heads", ket({"down"})},
                                           {"tails", {term({1, 2}, {"down"}), term({1, 2}, {"up"})}}}}});

    // n:01 -- Fbar measures R and infers w = fail on the tails branch.
    s.steps.push_back({{0, 1},
                       InferStep{"Fbar",
                                 {{{0, 2},
                                   InferenceTable{"Fbar",
                                                  "R",
                                                  "FbarMem",
                                                  {{"tails", "cert-w-fail", {fbar_w}},
                                                   {"heads", "no-concl", {}}}}}}}});

    // n:10 -- F measures the spin.
    s.steps.push_back({{0, 10},
                       MeasureStep{"F",
                                   {"S"},
                                   "zbasis",
                                   "FMem",
                                   "z",
                                   std::nullopt,
                                   {{"ready", "z-minus", "obs-z-minus"},
                                    {"ready", "z-plus", "obs-z-plus"}}}});

    // n:11 -- F reasons from z via rule Q, then lifts Fbar's certainty via
    // rule C. Two stages so the intermediate state exists at n:12.
    s.steps.push_back(
        {{0, 11},
         InferStep{"F",
                   {{{0, 12},
                     InferenceTable{"F",
                                    "FMem",
                                    "FMem",
                                    {{"obs-z-plus", "cert-r-tails", {f_r}},
                                     {"obs-z-minus", "no-concl", {}}}}},
                    {{0, 14},
                     InferenceTable{"F", "FMem", "FMem", {{"cert-r-tails", "cert-w-fail", {f_w}}}}}}}});

    // n:20 -- Wbar measures Fbar's laboratory in the {okbar, failbar} basis.
    s.steps.push_back({{0, 20},
                       MeasureStep{"Wbar",
                                   {"R", "FbarMem"},
                                   "lbar",
                                   "WbarMem",
                                   "wbar",
                                   std::nullopt,
                                   {{"ready", "okbar", "obs-okbar"},
                                    {"ready", "failbar", "obs-failbar"}}}});

    // n:21 -- Wbar infers z = +1/2 and then w = fail on the okbar branch.
    s.steps.push_back({{0, 21},
                       InferStep{"Wbar",
                                 {{{0, 24},
                                   InferenceTable{"Wbar",
                                                  "WbarMem",
                                                  "WbarMem",
                                                  {{"obs-okbar", "cert-w-fail", {wbar_z, wbar_w}},
                                                   {"obs-failbar", "no-concl", {}}}}}}}});

    // n:26 -- W reads Wbar's announced record.
    s.steps.push_back({{0, 26},
                       AccessMemoryStep{InferenceTable{"W",
                                                       "WbarMem",
                                                       "WMem",
                                                       {{"cert-w-fail", "cert-w-fail", {w_w}},
                                                        {"no-concl", "no-concl", {}}}}}});

    // n:30 -- W measures F's laboratory; the record is compared at n:31.
    s.steps.push_back({{0, 30},
                       MeasureStep{"W",
                                   {"S", "FMem"},
                                   "l",
                                   "WMem",
                                   "w",
                                   TimeStamp{0, 31},
                                   {{"cert-w-fail", "ok", "cert-w-fail-obs-ok"},
                                    {"cert-w-fail", "fail", "cert-w-fail-obs-fail"},
                                    {"no-concl", "ok", "no-concl-obs-ok"},
                                    {"no-concl", "fail", "no-concl-obs-fail"}}}});

    // n:40 -- halt when both super-observers saw "ok".
    s.steps.push_back({{0, 40}, HaltCheck{{{"WbarMem", "okbar"}, {"WMem", "ok"}}}});

    return s;
}

// ---- Serialization -------------------------------------------------------

namespace {

bool plain_identifier(const std::string &s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            return false;
        }
    }
    return true;
}

std::string quote_token(const std::string &s) {
    if (plain_identifier(s)) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string coeff_str(const ExactReal &c, bool &negative) {
    // Expression coefficients are sqrt(p/q) literals or plain rationals.
    negative = false;
    ExactReal a = c;
    double d = c.to_double();
    if (d < 0) {
        negative = true;
        a = -a;
    }
    ExactReal square = a * a;
    if (a.is_rational()) {
        const Rational &r = a.as_rational();
        return numerator(r).str() + "/" + denominator(r).str();
    }
    if (square.is_rational()) {
        const Rational &r = square.as_rational();
        return "sqrt(" + numerator(r).str() + "/" + denominator(r).str() + ")";
    }
    throw std::invalid_argument("coefficient " + c.to_short_string() +
                                " cannot be written as sqrt(p/q)");
}

std::string expr_str(const LinearExpr &expr) {
    std::ostringstream out;
    bool first = true;
    for (const auto &t : expr) {
        bool neg = false;
        std::string c = coeff_str(t.coeff, neg);
        if (first) {
            if (neg) {
                out << "-";
            }
        } else {
            out << (neg ? " - " : " + ");
        }
        first = false;
        if (c != "1/1") {
            out << c;
        }
        out << "|";
        for (size_t i = 0; i < t.tokens.size(); ++i) {
            out << (i ? ", " : "") << quote_token(t.tokens[i]);
        }
        out << ">";
    }
    return out.str();
}

std::string reg_list(const std::vector<std::string> &regs) {
    std::ostringstream out;
    out << "(";
    for (size_t i = 0; i < regs.size(); ++i) {
        out << (i ? ", " : "") << regs[i];
    }
    out << ")";
    return out.str();
}

std::string statement_clause(const CertaintyStatement &st) {
    std::ostringstream out;
    out << "certain " << st.variable << " = " << quote_token(st.value) << " at " << st.time.str()
        << " rule " << rule_tag_name(st.rule);
    if (!st.premises.empty()) {
        out << " via " << st.premises.front()->agent;
    }
    return out.str();
}

std::string row_str(const InferenceRow &row) {
    std::ostringstream out;
    out << quote_token(row.trigger) << " -> ";
    if (row.statements.empty()) {
        out << "noconclusion";
    } else {
        for (size_t i = 0; i < row.statements.size(); ++i) {
            if (i) {
                out << " ; ";
            }
            out << statement_clause(*row.statements[i]);
        }
    }
    out << " write " << quote_token(row.write);
    return out.str();
}

std::string rows_block(const std::vector<InferenceRow> &rows, const std::string &indent) {
    std::ostringstream out;
    out << "{\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        out << indent << "  " << row_str(rows[i]) << (i + 1 < rows.size() ? "," : "") << "\n";
    }
    out << indent << "}";
    return out.str();
}

struct StepWriter {
    std::ostringstream &out;
    const Step &step;

    void operator()(const PrepareRandom &p) const {
        out << "prepare " << p.reg << " as " << p.state << "\n";
    }
    void operator()(const ConditionalPrepare &c) const {
        out << "condprepare " << c.target << " from " << c.source << " {\n";
        for (size_t i = 0; i < c.arms.size(); ++i) {
            out << "  " << quote_token(c.arms[i].first) << " -> " << expr_str(c.arms[i].second)
                << (i + 1 < c.arms.size() ? "," : "") << "\n";
        }
        out << "}\n";
    }
    void operator()(const MeasureStep &m) const {
        out << "measure " << m.agent << " on " << reg_list(m.targets) << " basis " << m.basis
            << " into " << m.dest << " as " << m.variable;
        if (m.compare_at) {
            out << " compare at " << m.compare_at->str();
        }
        if (!m.records.empty()) {
            out << " {\n";
            for (size_t i = 0; i < m.records.size(); ++i) {
                const auto &r = m.records[i];
                out << "  " << quote_token(r.pre) << " + " << quote_token(r.outcome) << " -> "
                    << quote_token(r.post) << (i + 1 < m.records.size() ? "," : "") << "\n";
            }
            out << "}";
        }
        out << "\n";
    }
    void operator()(const InferStep &inf) const {
        out << "infer " << inf.agent;
        const InferenceTable &head = inf.stages[0].table;
        if (head.source == head.dest) {
            out << " on " << head.source;
        } else {
            out << " from " << head.source << " into " << head.dest;
        }
        if (inf.stages.size() == 1 && inf.stages[0].done == step.at) {
            out << " " << rows_block(head.rows, "") << "\n";
            return;
        }
        out << " {\n";
        for (const auto &stage : inf.stages) {
            out << "  stage done " << stage.done.str() << " " << rows_block(stage.table.rows, "  ")
                << "\n";
        }
        out << "}\n";
    }
    void operator()(const AccessMemoryStep &a) const {
        out << "access " << a.table.agent << " from " << a.table.source << " into " << a.table.dest
            << " " << rows_block(a.table.rows, "") << "\n";
    }
    void operator()(const HaltCheck &h) const {
        out << "halt when ";
        for (size_t i = 0; i < h.conditions.size(); ++i) {
            if (i) {
                out << " and ";
            }
            out << h.conditions[i].first << " = " << quote_token(h.conditions[i].second);
        }
        out << "\n";
    }
};

} // namespace

std::string serialize_schedule(const Schedule &s) {
    std::ostringstream out;
    for (const auto &r : s.registers) {
        out << "register " << r.name << " alphabet {";
        for (size_t i = 0; i < r.tokens.size(); ++i) {
            out << (i ? ", " : "") << quote_token(r.tokens[i]);
        }
        out << "} init " << quote_token(r.init) << "\n";
        for (const auto &[tok, text] : r.displays) {
            out << "display " << r.name << "." << quote_token(tok) << " = \"" << text << "\"\n";
        }
    }
    for (const auto &st : s.states) {
        out << "state " << st.name << " = " << expr_str(st.expr) << " on " << reg_list(st.registers)
            << "\n";
    }
    for (const auto &b : s.bases) {
        out << "basis " << b.name << " on " << reg_list(b.registers) << " {\n";
        for (size_t i = 0; i < b.outcomes.size(); ++i) {
            out << "  " << quote_token(b.outcomes[i].first) << " = " << expr_str(b.outcomes[i].second)
                << (i + 1 < b.outcomes.size() ? "," : "") << "\n";
        }
        out << "}\n";
    }
    for (const auto &step : s.steps) {
        out << "at " << step.at.str() << " ";
        std::visit(StepWriter{out, step}, step.action);
    }
    return out.str();
}

} // namespace wignerbox
