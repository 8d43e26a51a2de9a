#include <doctest.h>

#include <cmath>

#include "dense_oracle.hpp"
#include "test_support.hpp"
#include "wignerbox/engine.hpp"
#include "wignerbox/json_io.hpp"

using namespace wignerbox;
using wignerbox::testing::rt;
namespace wt = wignerbox::testing;

namespace {

const std::vector<TimeStamp> kCheckpoints = {{0, 2}, {0, 12}, {0, 14}, {0, 24}, {0, 28}, {0, 31}};

Scenario canonical_scenario() { return Scenario::compile(canonical_fr_schedule()); }

ExactReal amp_at(const StateVector<ExactReal> &state,
                 const std::map<std::string, std::string> &labels) {
    LabelKey key(state.space()->size(), 0);
    for (const auto &[reg, tok] : labels) {
        size_t i = state.space()->index_of(reg);
        key[i] = state.space()->token_index(i, tok);
    }
    return state.amplitude(key);
}

} // namespace

TEST_CASE("the six printed checkpoints are reproduced exactly") {
    auto result = evolve_round<ExactReal>(canonical_scenario(), kCheckpoints);
    REQUIRE(result.snapshots.size() == 6);

    const ExactReal third = rt(1, 3);

    SUBCASE("n:02") {
        const auto &s = result.snapshots[0].presented;
        CHECK(s.term_count() == 3);
        CHECK(amp_at(s, {{"R", "tails"}, {"FbarMem", "cert-w-fail"}, {"S", "down"}}) == third);
        CHECK(amp_at(s, {{"R", "tails"}, {"FbarMem", "cert-w-fail"}, {"S", "up"}}) == third);
        CHECK(amp_at(s, {{"R", "heads"}, {"FbarMem", "no-concl"}, {"S", "down"}}) == third);
    }
    SUBCASE("n:12") {
        const auto &s = result.snapshots[1].presented;
        CHECK(s.term_count() == 3);
        CHECK(amp_at(s, {{"R", "tails"}, {"S", "up"}, {"FMem", "cert-r-tails"}}) == third);
        CHECK(amp_at(s, {{"R", "tails"}, {"S", "down"}, {"FMem", "no-concl"}}) == third);
        CHECK(amp_at(s, {{"R", "heads"}, {"S", "down"}, {"FMem", "no-concl"}}) == third);
    }
    SUBCASE("n:14") {
        const auto &s = result.snapshots[2].presented;
        CHECK(s.term_count() == 3);
        CHECK(amp_at(s, {{"R", "tails"}, {"S", "up"}, {"FMem", "cert-w-fail"}}) == third);
    }
    SUBCASE("n:24") {
        const auto &s = result.snapshots[3].presented;
        CHECK(s.term_count() == 3);
        CHECK(amp_at(s, {{"lbar", "failbar"}, {"S", "up"}, {"WbarMem", "no-concl"}}) == rt(1, 6));
        CHECK(amp_at(s, {{"lbar", "okbar"}, {"S", "up"}, {"WbarMem", "cert-w-fail"}}) ==
              -rt(1, 6));
        CHECK(amp_at(s, {{"lbar", "failbar"}, {"S", "down"}, {"WbarMem", "no-concl"}}) ==
              rt(2, 3));
    }
    SUBCASE("n:28 merges the repeated labels") {
        const auto &s = result.snapshots[4].presented;
        CHECK(s.term_count() == 4);
        // sqrt(1/12) + sqrt(1/3) and sqrt(1/3) - sqrt(1/12)
        CHECK(amp_at(s, {{"lbar", "failbar"}, {"l", "fail"}, {"WMem", "no-concl"}}) ==
              rt(1, 12) + rt(1, 3));
        CHECK(amp_at(s, {{"lbar", "failbar"}, {"l", "ok"}, {"WMem", "no-concl"}}) ==
              rt(1, 3) - rt(1, 12));
        CHECK(amp_at(s, {{"lbar", "okbar"}, {"l", "fail"}, {"WMem", "cert-w-fail"}}) ==
              -rt(1, 12));
        CHECK(amp_at(s, {{"lbar", "okbar"}, {"l", "ok"}, {"WMem", "cert-w-fail"}}) == rt(1, 12));
    }
    SUBCASE("n:31") {
        const auto &s = result.snapshots[5].presented;
        CHECK(s.term_count() == 4);
        CHECK(amp_at(s, {{"lbar", "okbar"}, {"l", "ok"}, {"WMem", "cert-w-fail-obs-ok"}}) ==
              rt(1, 12));
        CHECK(amp_at(s, {{"lbar", "failbar"}, {"l", "fail"}, {"WMem", "no-concl-obs-fail"}}) ==
              rt(1, 12) + rt(1, 3));
    }
}

TEST_CASE("checkpoints equal the shipped expected-state files") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, kCheckpoints);
    const char *files[] = {"n02", "n12", "n14", "n24", "n28", "n31"};
    for (size_t i = 0; i < 6; ++i) {
        auto doc = Json::parse(
            wt::read_file(wt::project_root() + "/data/expected/fr/" + files[i] + ".json"));
        ExpectedState expected = expected_state_from_json(doc);
        CHECK(expected.at == kCheckpoints[i]);
        CheckResult check = compare_snapshot(expected, result.snapshots[i].presented);
        INFO(files[i], ": ", check.diffs.empty() ? "" : check.diffs[0]);
        CHECK(check.pass);
    }
}

TEST_CASE("a corrupted inference table fails first at n:14") {
    Schedule s = canonical_fr_schedule();
    auto &stages = std::get<InferStep>(s.steps[4].action).stages;
    stages[1].table.rows.clear(); // drop F's rule-C rewrite
    auto result = evolve_round<ExactReal>(Scenario::compile(s), kCheckpoints);

    const char *files[] = {"n02", "n12", "n14"};
    std::vector<bool> passes;
    for (size_t i = 0; i < 3; ++i) {
        auto doc = Json::parse(
            wt::read_file(wt::project_root() + "/data/expected/fr/" + files[i] + ".json"));
        passes.push_back(
            compare_snapshot(expected_state_from_json(doc), result.snapshots[i].presented).pass);
    }
    CHECK(passes[0]);
    CHECK(passes[1]);
    CHECK(!passes[2]);
}

TEST_CASE("the final joint distribution is {3/4, 1/12, 1/12, 1/12}") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, {});
    auto dist = outcome_distribution(scenario, result.final_state);
    REQUIRE(dist.size() == 4);
    CHECK(dist[{"failbar", "fail"}] == ExactReal(Rational(3, 4)));
    CHECK(dist[{"failbar", "ok"}] == ExactReal(Rational(1, 12)));
    CHECK(dist[{"okbar", "fail"}] == ExactReal(Rational(1, 12)));
    CHECK(dist[{"okbar", "ok"}] == ExactReal(Rational(1, 12)));

    ExactReal total;
    for (const auto &[key, p] : dist) {
        total += p;
    }
    CHECK(total == ExactReal(1));
}

TEST_CASE("exactly one branch violates rule S, with probability 1/12") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, {});
    auto violations =
        detect_violations(scenario, result.final_state, ComparisonTimePolicy::Declared);
    REQUIRE(violations.size() == 1);
    const BranchReport &branch = violations[0];
    CHECK(branch.probability == ExactReal(Rational(1, 12)));
    REQUIRE(branch.violations.size() == 1);
    const auto &[a, b] = branch.violations[0];
    CHECK(a->agent == "W");
    CHECK(b->agent == "W");
    CHECK(a->variable == "w");
    CHECK(a->value == "fail");
    CHECK(b->value == "ok");
    CHECK(a->time == TimeStamp{0, 31});
    CHECK(b->time == TimeStamp{0, 31});
    CHECK(a->rule == RuleTag::C);
    CHECK(b->rule == RuleTag::Qii);

    // The branch carries the okbar labels.
    std::map<std::string, std::string> labels(branch.labels.begin(), branch.labels.end());
    CHECK(labels["lbar"] == "okbar");
    CHECK(labels["l"] == "ok");
    CHECK(labels["WMem"] == "cert-w-fail-obs-ok");

    // The prediction chain runs W <- Wbar <- F <- Fbar and ends in rule Q.
    const CertaintyStatement *cursor = a.get();
    std::vector<std::string> chain{cursor->agent};
    while (!cursor->premises.empty()) {
        cursor = cursor->premises.front().get();
        chain.push_back(cursor->agent);
    }
    CHECK(chain == std::vector<std::string>{"W", "Wbar", "F", "Fbar"});
    CHECK(cursor->rule == RuleTag::Q);
}

TEST_CASE("without W's measurement there is no violation") {
    Schedule s = canonical_fr_schedule();
    s.steps.erase(s.steps.begin() + 8); // the n:30 measure step
    auto scenario = Scenario::compile(s);
    auto result = evolve_round<ExactReal>(scenario, {});
    CHECK(detect_violations(scenario, result.final_state, ComparisonTimePolicy::Declared)
              .empty());
}

TEST_CASE("a state early in the round has no violations") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, {{0, 2}});
    CHECK(detect_violations(scenario, result.snapshots[0].raw, ComparisonTimePolicy::Declared)
              .empty());
}

TEST_CASE("the observation-tick policy separates the comparison times") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, {});
    // Under the strict policy W's record reads w = ok at 0:30, the prediction
    // speaks about 0:31, and rule S no longer pairs them.
    CHECK(detect_violations(scenario, result.final_state, ComparisonTimePolicy::ObservationTick)
              .empty());
}

TEST_CASE("conditioning on Fbar's record makes the later 'fail' certain") {
    auto scenario = canonical_scenario();
    const Schedule &schedule = scenario.schedule();
    auto result = evolve_round<ExactReal>(scenario, {{0, 2}});
    const auto &at02 = result.snapshots[0].raw;

    // Project onto Fbar's cert-w-fail record.
    size_t fbar = scenario.space()->index_of("FbarMem");
    MeasurementBasis<ExactReal> fbar_tokens;
    fbar_tokens.name = "fbar-record";
    fbar_tokens.targets = {fbar};
    for (uint16_t t = 0; t < scenario.space()->reg(fbar).tokens.size(); ++t) {
        fbar_tokens.outcomes.push_back(
            {scenario.space()->reg(fbar).tokens[t], {{{t}, ExactReal(1)}}});
    }
    auto [p, conditioned] = project(at02, fbar_tokens, "cert-w-fail");
    CHECK(p == ExactReal(Rational(2, 3)));

    // Evolve S forward through F's measurement and inferences (the isometry
    // U from the spin to the laboratory).
    const auto *measure_f = std::get_if<MeasureStep>(&schedule.steps[3].action);
    REQUIRE(measure_f != nullptr);
    auto stages = scenario.compile_stages<ExactReal>();
    StateVector<ExactReal> evolved = conditioned;
    for (const auto &stage : stages) {
        if (stage.done >= TimeStamp{0, 10} && stage.done <= TimeStamp{0, 14}) {
            if (const auto *op = std::get_if<BasisMapOperator<ExactReal>>(&stage.action)) {
                evolved = apply(*op, evolved);
            } else {
                const auto &m = std::get<MeasureAction<ExactReal>>(stage.action);
                evolved = record_measurement(evolved, m.basis, m.dest, m.records);
            }
        }
    }

    // All support lies on the 'fail' lab state.
    auto l_basis = scenario.resolve_basis<ExactReal>(*schedule.find_basis("l"));
    auto probs = born_distribution(evolved, l_basis);
    CHECK(probs["fail"] == ExactReal(1));
    CHECK(probs["ok"] == ExactReal(0));
}

TEST_CASE("F's memory marginal is untouched by Wbar's measurement") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, {{0, 14}, {0, 20}});
    size_t fmem = scenario.space()->index_of("FMem");
    auto before = marginal_distribution(result.snapshots[0].raw, fmem);
    auto after = marginal_distribution(result.snapshots[1].raw, fmem);
    CHECK(before == after);
    CHECK(before.at("cert-w-fail") == ExactReal(Rational(1, 3)));
    CHECK(before.at("no-concl") == ExactReal(Rational(2, 3)));
}

TEST_CASE("float mode tracks the exact run within 1e-9") {
    auto scenario = canonical_scenario();
    auto exact = evolve_round<ExactReal>(scenario, kCheckpoints);
    auto approx = evolve_round<double>(scenario, kCheckpoints);
    REQUIRE(exact.snapshots.size() == approx.snapshots.size());
    for (size_t i = 0; i < exact.snapshots.size(); ++i) {
        const auto &e = exact.snapshots[i].presented;
        const auto &f = approx.snapshots[i].presented;
        CHECK(e.term_count() == f.term_count());
        for (const auto &[key, amp] : e.terms()) {
            CHECK(std::fabs(f.amplitude(key) - amp.to_double()) <= 1e-9);
        }
    }
    auto fdist = outcome_distribution(scenario, approx.final_state);
    CHECK(std::fabs(fdist[{"okbar", "ok"}] - 1.0 / 12.0) <= 1e-9);
}

TEST_CASE("the dense float oracle agrees with the sparse engine within 1e-12") {
    Schedule schedule = canonical_fr_schedule();
    auto scenario = Scenario::compile(schedule);
    oracle::DenseOracle oracle(schedule);
    CHECK(oracle.dim() == 2520);

    auto result = evolve_round<ExactReal>(scenario, kCheckpoints);

    // Raw product-basis amplitudes at every checkpoint.
    for (const auto &snap : result.snapshots) {
        auto dense = oracle.state_at(snap.at);
        double captured = 0;
        for (const auto &[key, amp] : snap.raw.terms()) {
            std::map<std::string, std::string> labels;
            for (size_t i = 0; i < scenario.space()->size(); ++i) {
                labels[scenario.space()->reg(i).name] = scenario.space()->token_name(i, key[i]);
            }
            double oracle_amp = dense[oracle.index_of(labels)];
            CHECK(std::fabs(oracle_amp - amp.to_double()) <= 1e-12);
            captured += oracle_amp * oracle_amp;
        }
        // The oracle has no support outside the engine's sparse terms.
        double total = 0;
        for (double v : dense) {
            total += v * v;
        }
        CHECK(std::fabs(total - 1.0) <= 1e-12);
        CHECK(std::fabs(total - captured) <= 1e-12);
    }

    // Joint outcome probabilities, decoded from the oracle's own indices with
    // a hand-written token map.
    auto dense = oracle.final_state();
    std::map<std::string, double> oracle_dist;
    auto wbar_outcome = [](const std::string &tok) {
        return (tok == "obs-okbar" || tok == "cert-w-fail") ? "okbar" : "failbar";
    };
    auto w_outcome = [](const std::string &tok) {
        return tok.find("obs-ok") != std::string::npos ? "ok" : "fail";
    };
    for (size_t i = 0; i < dense.size(); ++i) {
        if (dense[i] == 0.0) {
            continue;
        }
        std::string key = std::string(wbar_outcome(oracle.token_at(i, "WbarMem"))) + "," +
                          w_outcome(oracle.token_at(i, "WMem"));
        oracle_dist[key] += dense[i] * dense[i];
    }
    auto exact_dist = outcome_distribution(scenario, result.final_state);
    for (const auto &[key, p] : exact_dist) {
        CHECK(std::fabs(oracle_dist[outcome_key(key)] - p.to_double()) <= 1e-12);
    }
}

TEST_CASE("norm stays exactly one after every stage") {
    // evolve_round checks this internally; a distorted stage must throw.
    Schedule s = canonical_fr_schedule();
    std::get<ConditionalPrepare>(s.steps[1].action).arms[1].second = {
        {rt(1, 2), {"down"}}, {rt(1, 3), {"up"}}};
    CHECK_THROWS(evolve_round<ExactReal>(Scenario::compile(s), {}));
}

TEST_CASE("sampling is deterministic and respects the halt condition") {
    auto scenario = canonical_scenario();
    RunConfig config;
    config.seed = 7;
    config.max_rounds = 1000;

    SampleReport a = sample_runs(scenario, config, 50);
    SampleReport b = sample_runs(scenario, config, 50);
    CHECK(a.halting_rounds == b.halting_rounds);
    CHECK(a.draw_counts == b.draw_counts);
    CHECK(a.partial_runs == 0);
    // Each run ends with exactly one okbar,ok draw.
    CHECK(a.draw_counts["okbar,ok"] == 50);

    config.seed = 8;
    SampleReport c = sample_runs(scenario, config, 50);
    CHECK(a.halting_rounds != c.halting_rounds);
}

TEST_CASE("exhausted runs are reported as partial") {
    auto scenario = canonical_scenario();
    RunConfig config;
    config.seed = 3;
    config.max_rounds = 1;
    SampleReport report = sample_runs(scenario, config, 64);
    CHECK(report.partial_runs > 0);
    CHECK(report.halting_rounds.size() == 64);
    // Expected halts in one round: 64/12 ~ 5.
    CHECK(report.partial_runs < 64);
}

TEST_CASE("collapse mode yields the uniform 1/4 distribution") {
    auto scenario = canonical_scenario();
    auto dist = collapse_distribution(scenario);
    REQUIRE(dist.size() == 4);
    for (const auto &[key, p] : dist) {
        CHECK(p == ExactReal(Rational(1, 4)));
    }

    auto result = evolve_round<ExactReal>(scenario, {});
    auto unitary = outcome_distribution(scenario, result.final_state);
    CHECK(dist[{"okbar", "ok"}] != unitary[{"okbar", "ok"}]);
}

TEST_CASE("collapsing a probability-1 record changes nothing") {
    // With the coin pinned to heads, every record in the round is
    // deterministic, so the collapse ensemble stays a single member and
    // matches the unitary distribution exactly.
    Schedule s = canonical_fr_schedule();
    s.states[0].expr = {{ExactReal(1), {"heads"}}};
    auto scenario = Scenario::compile(s);
    auto collapse = collapse_distribution(scenario);
    auto result = evolve_round<ExactReal>(scenario, {});
    auto unitary = outcome_distribution(scenario, result.final_state);
    for (const auto &[key, p] : unitary) {
        CHECK(collapse[key] == p);
    }
}

TEST_CASE("run reports serialize against the documented dump format") {
    auto scenario = canonical_scenario();
    auto result = evolve_round<ExactReal>(scenario, {{0, 31}});
    Json dump = state_to_json(result.snapshots[0].presented);
    REQUIRE(dump.is_array());
    CHECK(dump.size() == 4);
    // Terms sorted by register name, then token.
    CHECK(dump[0]["labels"].begin().key() == "WMem");
    std::string prev;
    for (const auto &term : dump) {
        std::string sig = term["labels"].dump();
        CHECK(prev <= sig);
        prev = sig;
        ExactReal parsed = ExactReal::parse(term["amplitude_exact"].get<std::string>());
        CHECK(std::fabs(parsed.to_double() - term["amplitude_float"].get<double>()) <= 1e-12);
    }
}
