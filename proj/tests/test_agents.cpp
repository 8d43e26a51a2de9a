#include <doctest.h>

#include "test_support.hpp"
#include "wignerbox/agents.hpp"

using namespace wignerbox;
using wignerbox::testing::rt;

namespace {

SpacePtr lab_space() {
    auto space = std::make_shared<RegisterSpace>();
    space->add_register("S", {"down", "up"}, "up");
    space->add_register("FMem",
                        {"ready", "obs-z-plus", "obs-z-minus", "cert-r-tails", "no-concl",
                         "cert-w-fail"},
                        "ready");
    return space;
}

MeasurementBasis<ExactReal> z_basis() {
    MeasurementBasis<ExactReal> basis;
    basis.name = "zbasis";
    basis.targets = {0};
    basis.outcomes.push_back({"z-minus", {{{0}, ExactReal(1)}}});
    basis.outcomes.push_back({"z-plus", {{{1}, ExactReal(1)}}});
    return basis;
}

// {ok, fail} over (S, FMem) with the lab states |down, no-concl>, |up, cert-w-fail>.
MeasurementBasis<ExactReal> l_basis() {
    MeasurementBasis<ExactReal> basis;
    basis.name = "l";
    basis.targets = {0, 1};
    basis.outcomes.push_back({"ok", {{{0, 4}, rt(1, 2)}, {{1, 5}, -rt(1, 2)}}});
    basis.outcomes.push_back({"fail", {{{0, 4}, rt(1, 2)}, {{1, 5}, rt(1, 2)}}});
    return basis;
}

} // namespace

TEST_CASE("rule Q certifies exactly the Born-probability-1 outcomes") {
    auto space = lab_space();

    StateVector<ExactReal> down(space);
    down.add_term({0, 0}, ExactReal(1));
    auto certain = rule_q_certify(down, z_basis(), "F", "z", {0, 10});
    REQUIRE(certain.has_value());
    CHECK((*certain)->value == "z-minus");
    CHECK((*certain)->rule == RuleTag::Q);

    StateVector<ExactReal> right(space);
    right.add_term({0, 0}, rt(1, 2));
    right.add_term({1, 0}, rt(1, 2));
    CHECK(!rule_q_certify(right, z_basis(), "F", "z", {0, 10}).has_value());
}

TEST_CASE("the evolved |right> state is certainly 'fail' in the lab basis") {
    auto space = lab_space();
    // U maps |right> (x) |ready> to sqrt(1/2)(|down,no-concl> + |up,cert-w-fail>).
    StateVector<ExactReal> evolved(space);
    evolved.add_term({0, 4}, rt(1, 2));
    evolved.add_term({1, 5}, rt(1, 2));
    auto certain = rule_q_certify(evolved, l_basis(), "Fbar", "w", {0, 31});
    REQUIRE(certain.has_value());
    CHECK((*certain)->value == "fail");
    CHECK((*certain)->time == TimeStamp{0, 31});
}

TEST_CASE("rule Qii records observed outcomes directly") {
    auto st = rule_q_observed("W", "w", "ok", {0, 31});
    CHECK(st->agent == "W");
    CHECK(st->rule == RuleTag::Qii);
    CHECK(st->premises.empty());
}

TEST_CASE("rule C lifts certainty through a chain of agents") {
    auto fbar = make_statement("Fbar", "w", "fail", {0, 31}, RuleTag::Q);
    auto f = rule_c_lift("F", fbar);
    auto wbar = rule_c_lift("Wbar", f);
    auto w = rule_c_lift("W", wbar);
    CHECK(w->agent == "W");
    CHECK(w->value == "fail");
    CHECK(w->rule == RuleTag::C);
    // The provenance chain terminates in the rule-Q statement.
    const CertaintyStatement *cursor = w.get();
    int depth = 0;
    while (!cursor->premises.empty()) {
        cursor = cursor->premises.front().get();
        ++depth;
    }
    CHECK(depth == 3);
    CHECK(cursor->rule == RuleTag::Q);
    CHECK(cursor->agent == "Fbar");
}

TEST_CASE("rule S flags exactly the conflicting same-agent records") {
    auto fail_pred = make_statement("W", "w", "fail", {0, 31}, RuleTag::C);
    auto ok_obs = rule_q_observed("W", "w", "ok", {0, 31});
    auto other_var = make_statement("W", "wbar", "okbar", {0, 20}, RuleTag::Qii);
    auto other_agent = make_statement("Wbar", "w", "ok", {0, 31}, RuleTag::Q);

    auto conflicts = rule_s_check({fail_pred, ok_obs});
    REQUIRE(conflicts.size() == 1);
    CHECK(*conflicts[0].first == *fail_pred);
    CHECK(*conflicts[0].second == *ok_obs);

    CHECK(rule_s_check({fail_pred}).empty());
    CHECK(rule_s_check({fail_pred, other_var}).empty());
    // Rule S binds one agent's records; cross-agent disagreement is not a violation.
    CHECK(rule_s_check({fail_pred, other_agent}).empty());
}

TEST_CASE("inference tables compile to token-rewrite isometries") {
    auto space = lab_space();
    InferenceTable table{"F",
                         "FMem",
                         "FMem",
                         {{"obs-z-plus", "cert-r-tails", {}}, {"obs-z-minus", "no-concl", {}}}};
    auto op = compile_inference_unitary<ExactReal>(table, *space);
    CHECK(op.rows.size() == 2);

    StateVector<ExactReal> psi(space);
    psi.add_term({1, 1}, rt(1, 3)); // up, obs-z-plus
    psi.add_term({0, 2}, rt(2, 3)); // down, obs-z-minus
    auto out = apply(op, psi);
    StateVector<ExactReal> expected(space);
    expected.add_term({1, 3}, rt(1, 3));
    expected.add_term({0, 4}, rt(2, 3));
    CHECK(out == expected);
}

TEST_CASE("the rule-C stage maps the intermediate token to the final one") {
    auto space = lab_space();
    InferenceTable table{"F", "FMem", "FMem", {{"cert-r-tails", "cert-w-fail", {}}}};
    auto op = compile_inference_unitary<ExactReal>(table, *space);

    StateVector<ExactReal> psi(space);
    psi.add_term({1, 3}, rt(1, 3)); // cert-r-tails
    psi.add_term({0, 4}, rt(2, 3)); // no-concl passes through unlisted
    auto out = apply(op, psi);
    StateVector<ExactReal> expected(space);
    expected.add_term({1, 5}, rt(1, 3));
    expected.add_term({0, 4}, rt(2, 3));
    CHECK(out == expected);
}

TEST_CASE("an empty table compiles to the identity") {
    auto space = lab_space();
    InferenceTable table{"F", "FMem", "FMem", {}};
    auto op = compile_inference_unitary<ExactReal>(table, *space);
    StateVector<ExactReal> psi(space);
    psi.add_term({1, 1}, rt(1, 2));
    psi.add_term({0, 2}, rt(1, 2));
    CHECK(apply(op, psi) == psi);
}

TEST_CASE("colliding writes are rejected") {
    auto space = lab_space();
    InferenceTable table{"F",
                         "FMem",
                         "FMem",
                         {{"obs-z-plus", "cert-w-fail", {}}, {"obs-z-minus", "cert-w-fail", {}}}};
    CHECK_THROWS_AS(compile_inference_unitary<ExactReal>(table, *space), NonInjectiveTable);

    InferenceTable dup{"F", "FMem", "FMem", {{"obs-z-plus", "no-concl", {}},
                                             {"obs-z-plus", "cert-w-fail", {}}}};
    CHECK_THROWS_AS(compile_inference_unitary<ExactReal>(dup, *space), NonInjectiveTable);
}

TEST_CASE("random injective tables always pass the isometry check") {
    auto space = lab_space();
    SplitMix64 rng(0xfeed);
    const auto &tokens = space->reg(1).tokens;
    for (int trial = 0; trial < 100; ++trial) {
        // A random permutation of the token alphabet, partially listed.
        std::vector<size_t> perm(tokens.size());
        for (size_t i = 0; i < perm.size(); ++i) {
            perm[i] = i;
        }
        for (size_t i = perm.size(); i-- > 1;) {
            std::swap(perm[i], perm[rng.next() % (i + 1)]);
        }
        InferenceTable table{"F", "FMem", "FMem", {}};
        size_t listed = rng.next() % (tokens.size() + 1);
        for (size_t i = 0; i < listed; ++i) {
            table.rows.push_back({tokens[i], tokens[perm[i]], {}});
        }
        // Compilation runs the isometry check; it must accept every injective table.
        auto op = compile_inference_unitary<ExactReal>(table, *space);
        CHECK(op.rows.size() == listed);
    }
}

TEST_CASE("cross-register tables record against the dest ready token") {
    auto space = std::make_shared<RegisterSpace>();
    space->add_register("R", {"heads", "tails"}, "heads");
    space->add_register("FbarMem", {"ready", "cert-w-fail", "no-concl"}, "ready");
    InferenceTable table{"Fbar",
                         "R",
                         "FbarMem",
                         {{"tails", "cert-w-fail", {}}, {"heads", "no-concl", {}}}};
    auto op = compile_inference_unitary<ExactReal>(table, *space);

    StateVector<ExactReal> psi(space);
    psi.add_term({0, 0}, rt(1, 3));
    psi.add_term({1, 0}, rt(2, 3));
    auto out = apply(op, psi);
    StateVector<ExactReal> expected(space);
    expected.add_term({0, 2}, rt(1, 3));
    expected.add_term({1, 1}, rt(2, 3));
    CHECK(out == expected);
}
