#include "wignerbox/dsl.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace wignerbox {

namespace {

enum class Tok { Ident, String, Number, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 0;
    int col = 0;

    std::string describe() const {
        switch (kind) {
        case Tok::Ident: return "identifier '" + text + "'";
        case Tok::String: return "string \"" + text + "\"";
        case Tok::Number: return "number " + text;
        case Tok::Punct: return "'" + text + "'";
        case Tok::End: return "end of input";
        }
        return "?";
    }
};

class Lexer {
  public:
    explicit Lexer(const std::string &text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (pos_ >= text_.size()) {
                out.push_back({Tok::End, "", line_, col_});
                return out;
            }
            out.push_back(next());
        }
    }

  private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    advance();
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_cont(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    Token next() {
        int line = line_, col = col_;
        char c = text_[pos_];
        if (ident_start(c)) {
            std::string s;
            while (pos_ < text_.size()) {
                char cur = text_[pos_];
                if (ident_cont(cur)) {
                    s += cur;
                    advance();
                } else if (cur == '-' && pos_ + 1 < text_.size() && ident_cont(text_[pos_ + 1])) {
                    // Kebab-case token names; a '-' before '>' is an arrow.
                    s += cur;
                    advance();
                } else {
                    break;
                }
            }
            return {Tok::Ident, s, line, col};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string s;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                s += text_[pos_];
                advance();
            }
            return {Tok::Number, s, line, col};
        }
        if (c == '"') {
            advance();
            std::string s;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                    advance();
                }
                s += text_[pos_];
                advance();
            }
            if (pos_ >= text_.size()) {
                throw SyntaxError(line, col, "closing '\"'", "end of input");
            }
            advance();
            return {Tok::String, s, line, col};
        }
        if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            advance();
            advance();
            return {Tok::Punct, "->", line, col};
        }
        static const std::string punct = "{}()|>,;=+-/:.*";
        if (punct.find(c) != std::string::npos) {
            advance();
            return {Tok::Punct, std::string(1, c), line, col};
        }
        throw SyntaxError(line, col, "a token", "character '" + std::string(1, c) + "'");
    }

    const std::string &text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct NamedLabel {
    std::vector<std::string> registers;
    LinearExpr expr;
};

class Parser {
  public:
    explicit Parser(const std::string &text) : toks_(Lexer(text).run()) {}

    Schedule run() {
        while (!at_end()) {
            statement();
        }
        return std::move(schedule_);
    }

  private:
    // ---- token plumbing ----
    bool at_end() const { return toks_[i_].kind == Tok::End; }
    const Token &peek(size_t ahead = 0) const {
        return toks_[std::min(i_ + ahead, toks_.size() - 1)];
    }
    Token take() { return toks_[at_end() ? i_ : i_++]; }

    [[noreturn]] void fail(const std::string &expected) const {
        const Token &t = peek();
        throw SyntaxError(t.line, t.col, expected, t.describe());
    }

    bool is_punct(const std::string &p, size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Punct && peek(ahead).text == p;
    }
    bool is_ident(const std::string &word, size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Ident && peek(ahead).text == word;
    }

    void expect_punct(const std::string &p) {
        if (!is_punct(p)) {
            fail("'" + p + "'");
        }
        take();
    }
    void expect_keyword(const std::string &word) {
        if (!is_ident(word)) {
            fail("'" + word + "'");
        }
        take();
    }
    std::string expect_name(const std::string &what) {
        if (peek().kind != Tok::Ident) {
            fail(what);
        }
        return take().text;
    }
    /// A register/basis token: bare identifier or quoted string.
    std::string expect_token_name() {
        if (peek().kind == Tok::Ident || peek().kind == Tok::String) {
            return take().text;
        }
        fail("a token name");
    }

    uint64_t expect_number(const std::string &what) {
        if (peek().kind != Tok::Number) {
            fail(what);
        }
        return std::stoull(take().text);
    }

    TimeStamp expect_time() {
        int line = peek().line, col = peek().col;
        uint64_t round = expect_number("a timestamp");
        expect_punct(":");
        if (peek().kind != Tok::Number) {
            fail("tick digits");
        }
        uint64_t tick = std::stoull(take().text);
        if (tick > 59) {
            throw SyntaxError(line, col, "tick in 0..59", std::to_string(tick));
        }
        return {static_cast<uint32_t>(round), static_cast<uint32_t>(tick)};
    }

    // ---- expressions ----

    Rational expect_rational() {
        if (peek().kind != Tok::Number) {
            fail("a rational p/q");
        }
        BigInt num(take().text);
        BigInt den(1);
        if (is_punct("/")) {
            take();
            if (peek().kind != Tok::Number) {
                fail("a denominator");
            }
            den = BigInt(take().text);
        }
        return Rational(num, den);
    }

    // term := [sign] [coeff] ket;  coeff := sqrt '(' rat ')' | rat
    LinearExpr expect_expr(const std::vector<std::string> &regs) {
        LinearExpr expr;
        bool first = true;
        while (true) {
            bool negative = false;
            if (first) {
                if (is_punct("-")) {
                    take();
                    negative = true;
                }
            } else if (is_punct("+") || is_punct("-")) {
                negative = take().text == "-";
            } else {
                break;
            }
            first = false;
            ExactReal coeff(1);
            if (is_ident("sqrt")) {
                take();
                expect_punct("(");
                coeff = ExactReal::from_sqrt(expect_rational());
                expect_punct(")");
            } else if (peek().kind == Tok::Number) {
                coeff = ExactReal(expect_rational());
            }
            if (is_punct("*")) {
                take();
            }
            if (negative) {
                coeff = -coeff;
            }
            int line = peek().line;
            expect_punct("|");
            std::vector<std::string> tokens;
            tokens.push_back(expect_token_name());
            while (is_punct(",")) {
                take();
                tokens.push_back(expect_token_name());
            }
            expect_punct(">");
            append_ket(expr, coeff, tokens, regs, line);
        }
        if (expr.empty()) {
            fail("a state expression");
        }
        return expr;
    }

    void append_ket(LinearExpr &expr, const ExactReal &coeff, const std::vector<std::string> &toks,
                    const std::vector<std::string> &regs, int line) {
        if (toks.size() == regs.size()) {
            expr.push_back({coeff, toks});
            return;
        }
        if (toks.size() == 1) {
            auto it = labels_.find(toks[0]);
            if (it != labels_.end()) {
                if (it->second.registers != regs) {
                    throw SemanticError("label " + toks[0] +
                                            " is declared over different registers",
                                        line);
                }
                for (const auto &t : it->second.expr) {
                    expr.push_back({coeff * t.coeff, t.tokens});
                }
                return;
            }
        }
        throw SemanticError("ket arity does not match the register list and is not a known label",
                            line);
    }

    std::vector<std::string> expect_reg_list() {
        std::vector<std::string> regs;
        if (is_punct("(")) {
            take();
            regs.push_back(expect_name("a register name"));
            while (is_punct(",")) {
                take();
                regs.push_back(expect_name("a register name"));
            }
            expect_punct(")");
        } else {
            regs.push_back(expect_name("a register name"));
        }
        return regs;
    }

    // ---- statements ----

    void statement() {
        if (is_ident("register")) {
            register_decl();
        } else if (is_ident("display")) {
            display_decl();
        } else if (is_ident("state")) {
            state_decl();
        } else if (is_ident("label")) {
            label_decl();
        } else if (is_ident("basis")) {
            basis_decl();
        } else if (is_ident("at")) {
            step();
        } else {
            fail("'register', 'display', 'state', 'label', 'basis' or 'at'");
        }
    }

    void register_decl() {
        take();
        RegisterDecl r;
        r.name = expect_name("a register name");
        expect_keyword("alphabet");
        expect_punct("{");
        r.tokens.push_back(expect_token_name());
        while (is_punct(",")) {
            take();
            r.tokens.push_back(expect_token_name());
        }
        expect_punct("}");
        expect_keyword("init");
        r.init = expect_token_name();
        schedule_.registers.push_back(std::move(r));
    }

    void display_decl() {
        Token at = take();
        std::string reg = expect_name("a register name");
        expect_punct(".");
        std::string tok = expect_token_name();
        expect_punct("=");
        if (peek().kind != Tok::String) {
            fail("a display string");
        }
        std::string text = take().text;
        for (auto &r : schedule_.registers) {
            if (r.name == reg) {
                r.displays.emplace_back(tok, text);
                return;
            }
        }
        throw SemanticError("display for undeclared register " + reg, at.line);
    }

    void state_decl() {
        take();
        NamedState st;
        st.name = expect_name("a state name");
        expect_punct("=");
        // The register list follows the expression, so scan ahead for it.
        size_t expr_start = i_;
        skip_expr_tokens();
        expect_keyword("on");
        st.registers = expect_reg_list();
        size_t after = i_;
        i_ = expr_start;
        st.expr = expect_expr(st.registers);
        i_ = after;
        schedule_.states.push_back(std::move(st));
    }

    void label_decl() {
        take();
        std::string name = expect_name("a label name");
        expect_keyword("on");
        std::vector<std::string> regs = expect_reg_list();
        expect_punct("=");
        NamedLabel label{regs, expect_expr(regs)};
        labels_[name] = std::move(label);
    }

    void skip_expr_tokens() {
        // Everything up to the 'on' keyword belongs to the expression.
        while (!at_end() && !is_ident("on")) {
            take();
        }
    }

    void basis_decl() {
        take();
        NamedBasis b;
        b.name = expect_name("a basis name");
        expect_keyword("on");
        b.registers = expect_reg_list();
        expect_punct("{");
        while (true) {
            std::string outcome = expect_token_name();
            expect_punct("=");
            b.outcomes.emplace_back(outcome, expect_expr(b.registers));
            if (is_punct(",")) {
                take();
                continue;
            }
            break;
        }
        expect_punct("}");
        schedule_.bases.push_back(std::move(b));
    }

    void step() {
        take(); // 'at'
        TimeStamp at = expect_time();
        if (is_ident("prepare")) {
            take();
            PrepareRandom p;
            p.reg = expect_name("a register name");
            expect_keyword("as");
            p.state = expect_name("a state name");
            schedule_.steps.push_back({at, std::move(p)});
        } else if (is_ident("condprepare")) {
            take();
            ConditionalPrepare c;
            c.target = expect_name("a register name");
            expect_keyword("from");
            c.source = expect_name("a register name");
            expect_punct("{");
            while (true) {
                std::string trigger = expect_token_name();
                expect_punct("->");
                c.arms.emplace_back(trigger, expect_expr({c.target}));
                if (is_punct(",")) {
                    take();
                    continue;
                }
                break;
            }
            expect_punct("}");
            schedule_.steps.push_back({at, std::move(c)});
        } else if (is_ident("measure")) {
            take();
            measure_step(at);
        } else if (is_ident("infer")) {
            take();
            infer_step(at);
        } else if (is_ident("access")) {
            take();
            access_step(at);
        } else if (is_ident("halt")) {
            take();
            expect_keyword("when");
            HaltCheck h;
            while (true) {
                std::string reg = expect_name("a register name");
                expect_punct("=");
                h.conditions.emplace_back(reg, expect_token_name());
                if (is_ident("and")) {
                    take();
                    continue;
                }
                break;
            }
            schedule_.steps.push_back({at, std::move(h)});
        } else {
            fail("'prepare', 'condprepare', 'measure', 'infer', 'access' or 'halt'");
        }
    }

    void measure_step(TimeStamp at) {
        MeasureStep m;
        m.agent = expect_name("an agent name");
        expect_keyword("on");
        m.targets = expect_reg_list();
        expect_keyword("basis");
        m.basis = expect_name("a basis name");
        expect_keyword("into");
        m.dest = expect_name("a register name");
        if (is_ident("as")) {
            take();
            m.variable = expect_name("a variable name");
        } else {
            m.variable = m.basis;
        }
        if (is_ident("compare")) {
            take();
            expect_keyword("at");
            m.compare_at = expect_time();
        }
        if (is_punct("{")) {
            take();
            while (true) {
                RecordRule r;
                r.pre = expect_token_name();
                expect_punct("+");
                r.outcome = expect_token_name();
                expect_punct("->");
                r.post = expect_token_name();
                m.records.push_back(std::move(r));
                if (is_punct(",")) {
                    take();
                    continue;
                }
                break;
            }
            expect_punct("}");
        }
        schedule_.steps.push_back({at, std::move(m)});
    }

    void infer_step(TimeStamp at) {
        InferStep inf;
        inf.agent = expect_name("an agent name");
        current_agent_ = inf.agent;
        std::string source, dest;
        if (is_ident("on")) {
            take();
            source = dest = expect_name("a register name");
        } else if (is_ident("from")) {
            take();
            source = expect_name("a register name");
            expect_keyword("into");
            dest = expect_name("a register name");
        } else {
            // The agent's own memory register by naming convention.
            source = dest = inf.agent + "Mem";
        }
        expect_punct("{");
        if (is_ident("stage")) {
            while (is_ident("stage")) {
                take();
                expect_keyword("done");
                TimeStamp done = expect_time();
                expect_punct("{");
                InferenceTable table{inf.agent, source, dest, rows()};
                expect_punct("}");
                inf.stages.push_back({done, std::move(table)});
            }
        } else {
            InferenceTable table{inf.agent, source, dest, rows()};
            inf.stages.push_back({at, std::move(table)});
        }
        expect_punct("}");
        schedule_.steps.push_back({at, std::move(inf)});
    }

    void access_step(TimeStamp at) {
        std::string agent = expect_name("an agent name");
        current_agent_ = agent;
        expect_keyword("from");
        std::string source = expect_name("a register name");
        expect_keyword("into");
        std::string dest = expect_name("a register name");
        expect_punct("{");
        AccessMemoryStep a{InferenceTable{agent, source, dest, rows()}};
        expect_punct("}");
        schedule_.steps.push_back({at, std::move(a)});
    }

    std::vector<InferenceRow> rows() {
        // Rows are parsed for the innermost step's agent; the caller fills in
        // the table identity. Statements are owned by the row.
        std::vector<InferenceRow> out;
        while (true) {
            InferenceRow row;
            row.trigger = expect_token_name();
            expect_punct("->");
            if (is_ident("noconclusion")) {
                take();
            } else {
                row.statements.push_back(statement_clause());
                while (is_punct(";")) {
                    take();
                    row.statements.push_back(statement_clause());
                }
            }
            if (is_ident("write")) {
                take();
                row.write = expect_token_name();
            } else {
                row.write = row.trigger;
            }
            for (auto &st : row.statements) {
                all_statements_.push_back(st);
            }
            out.push_back(std::move(row));
            if (is_punct(",")) {
                take();
                continue;
            }
            break;
        }
        return out;
    }

    StatementPtr statement_clause() {
        int line = peek().line;
        expect_keyword("certain");
        std::string variable = expect_name("a variable name");
        expect_punct("=");
        std::string value = expect_token_name();
        expect_keyword("at");
        TimeStamp time = expect_time();
        expect_keyword("rule");
        std::string tag_name = expect_name("a rule tag (Q, Qii, C)");
        RuleTag tag;
        try {
            tag = rule_tag_from_name(tag_name);
        } catch (const std::invalid_argument &) {
            throw SyntaxError(peek().line, peek().col, "rule tag Q, Qii or C", tag_name);
        }
        std::vector<StatementPtr> premises;
        if (is_ident("via")) {
            take();
            std::string inner_agent = expect_name("an agent name");
            premises.push_back(resolve_premise(inner_agent, variable, value, time, line));
        }
        return make_statement(current_agent_, variable, value, time, tag, std::move(premises));
    }

    StatementPtr resolve_premise(const std::string &agent, const std::string &variable,
                                 const std::string &value, TimeStamp time, int line) {
        // Rule C cites another agent's statement of the same content; it must
        // already have been declared.
        for (auto it = all_statements_.rbegin(); it != all_statements_.rend(); ++it) {
            const auto &st = *it;
            if (st->agent == agent && st->variable == variable && st->value == value &&
                st->time == time) {
                return st;
            }
        }
        throw SemanticError("rule C cites agent " + agent + " but no prior statement \"" +
                                variable + " = " + value + " at " + time.str() +
                                "\" by that agent exists",
                            line);
    }

    std::vector<Token> toks_;
    size_t i_ = 0;
    Schedule schedule_;
    std::map<std::string, NamedLabel> labels_;
    std::vector<StatementPtr> all_statements_;
    std::string current_agent_; // owner of statements in the rows being parsed
};

} // namespace

Schedule parse_schedule_unchecked(const std::string &text) {
    Parser p(text);
    return p.run();
}

Schedule parse_schedule(const std::string &text) {
    Schedule s = parse_schedule_unchecked(text);
    auto diagnostics = validate(s);
    if (!diagnostics.empty()) {
        std::ostringstream msg;
        for (size_t i = 0; i < diagnostics.size(); ++i) {
            if (i) {
                msg << "; ";
            }
            if (diagnostics[i].step >= 0) {
                msg << "step " << diagnostics[i].step << ": ";
            }
            msg << diagnostics[i].message;
        }
        throw SemanticError(msg.str());
    }
    return s;
}

} // namespace wignerbox
