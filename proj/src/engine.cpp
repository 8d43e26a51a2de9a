#include "wignerbox/engine.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace wignerbox {

namespace {

void merge_meta(TokenMeta &into, const TokenMeta &from) {
    for (const auto &obs : from.observations) {
        if (std::find(into.observations.begin(), into.observations.end(), obs) ==
            into.observations.end()) {
            into.observations.push_back(obs);
        }
    }
    for (const auto &st : from.statements) {
        bool known = false;
        for (const auto &have : into.statements) {
            if (*have == *st) {
                known = true;
            }
        }
        if (!known) {
            into.statements.push_back(st);
        }
    }
}

} // namespace

Scenario Scenario::compile(const Schedule &schedule) {
    auto diagnostics = validate(schedule);
    if (!diagnostics.empty()) {
        std::ostringstream msg;
        msg << "schedule is not valid:";
        for (const auto &d : diagnostics) {
            msg << " [";
            if (d.step >= 0) {
                msg << "step " << d.step << ": ";
            }
            msg << d.message << "]";
        }
        throw SemanticError(msg.str());
    }

    Scenario sc;
    sc.schedule_ = schedule;
    auto space = std::make_shared<RegisterSpace>();
    for (const auto &r : schedule.registers) {
        space->add_register(r.name, r.tokens, r.init);
    }
    sc.space_ = space;

    for (const auto &r : schedule.registers) {
        size_t reg = space->index_of(r.name);
        for (const auto &[tok, text] : r.displays) {
            sc.meta_[{reg, space->token_index(reg, tok)}].display = text;
        }
    }

    TimeStamp last_done{0, 0};
    for (const auto &step : schedule.steps) {
        if (const auto *m = std::get_if<MeasureStep>(&step.action)) {
            size_t dest = space->index_of(m->dest);
            sc.variable_of_[dest] = m->variable;
            TimeStamp asserted = m->compare_at.value_or(step.at);
            auto rules = m->records;
            if (rules.empty()) {
                const NamedBasis *b = schedule.find_basis(m->basis);
                for (const auto &[outcome, expr] : b->outcomes) {
                    rules.push_back({schedule.find_register(m->dest)->init, outcome, outcome});
                }
            }
            for (const auto &rule : rules) {
                uint16_t pre = space->token_index(dest, rule.pre);
                uint16_t post = space->token_index(dest, rule.post);
                TokenMeta derived = sc.meta_[{dest, pre}];
                derived.observations.push_back(
                    Observation{m->agent, m->variable, rule.outcome, step.at, asserted});
                merge_meta(sc.meta_[{dest, post}], derived);
            }
            // The measured group is inert from the moment of its last write,
            // so its measurement basis is the natural presentation from then
            // on (strictly after last_done).
            sc.views_.push_back({last_done, m->basis});
            last_done = step.at;
        } else if (const auto *inf = std::get_if<InferStep>(&step.action)) {
            for (const auto &stage : inf->stages) {
                size_t src = space->index_of(stage.table.source);
                size_t dst = space->index_of(stage.table.dest);
                for (const auto &row : stage.table.rows) {
                    uint16_t write = space->token_index(dst, row.write);
                    TokenMeta derived;
                    if (src == dst) {
                        // In-place rewrite: the new token carries the history
                        // of the one it replaces.
                        derived = sc.meta_[{src, space->token_index(src, row.trigger)}];
                        derived.display.clear();
                    }
                    derived.statements.insert(derived.statements.end(), row.statements.begin(),
                                              row.statements.end());
                    merge_meta(sc.meta_[{dst, write}], derived);
                }
                last_done = stage.done;
            }
        } else if (const auto *acc = std::get_if<AccessMemoryStep>(&step.action)) {
            size_t dst = space->index_of(acc->table.dest);
            for (const auto &row : acc->table.rows) {
                TokenMeta derived;
                derived.statements = row.statements;
                merge_meta(sc.meta_[{dst, space->token_index(dst, row.write)}], derived);
            }
            last_done = step.at;
        } else if (const auto *halt = std::get_if<HaltCheck>(&step.action)) {
            for (const auto &[reg, outcome] : halt->conditions) {
                sc.halt_.emplace_back(space->index_of(reg), outcome);
            }
        } else {
            last_done = step.at; // prepare / condprepare
        }
    }
    return sc;
}

const TokenMeta &Scenario::meta(size_t reg, uint16_t tok) const {
    static const TokenMeta empty;
    auto it = meta_.find({reg, tok});
    return it == meta_.end() ? empty : it->second;
}

std::optional<std::string> Scenario::decode_outcome(size_t reg, uint16_t tok) const {
    auto var = variable_of_.find(reg);
    if (var == variable_of_.end()) {
        return std::nullopt;
    }
    for (const auto &obs : meta(reg, tok).observations) {
        if (obs.variable == var->second) {
            return obs.outcome;
        }
    }
    return std::nullopt;
}

std::vector<const NamedBasis *> Scenario::views_at(TimeStamp t) const {
    std::vector<const NamedBasis *> active;
    for (const auto &entry : views_) {
        if (!(t > entry.active_from)) {
            continue;
        }
        const NamedBasis *basis = schedule_.find_basis(entry.basis);
        // A later measurement over an overlapping register group supersedes
        // the earlier view.
        std::erase_if(active, [&](const NamedBasis *old) {
            for (const auto &r : old->registers) {
                if (std::find(basis->registers.begin(), basis->registers.end(), r) !=
                    basis->registers.end()) {
                    return true;
                }
            }
            return false;
        });
        if (basis->registers.size() > 1) {
            active.push_back(basis);
        }
    }
    return active;
}

template <typename A>
MeasurementBasis<A> Scenario::resolve_basis(const NamedBasis &basis, const RegisterSpace &space) {
    MeasurementBasis<A> out;
    out.name = basis.name;
    for (const auto &r : basis.registers) {
        out.targets.push_back(space.index_of(r));
    }
    for (const auto &[token, expr] : basis.outcomes) {
        SubVector<A> vec;
        for (const auto &term : expr) {
            LabelKey label;
            for (size_t i = 0; i < basis.registers.size(); ++i) {
                label.push_back(space.token_index(out.targets[i], term.tokens[i]));
            }
            vec.emplace_back(std::move(label), amp_traits<A>::from_exact(term.coeff));
        }
        out.outcomes.push_back({token, std::move(vec)});
    }
    return out;
}

template <typename A> MeasurementBasis<A> Scenario::resolve_basis(const NamedBasis &basis) const {
    return resolve_basis<A>(basis, *space_);
}

template <typename A> std::vector<CompiledStage<A>> Scenario::compile_stages() const {
    std::vector<CompiledStage<A>> stages;
    const RegisterSpace &space = *space_;
    for (const auto &step : schedule_.steps) {
        if (const auto *p = std::get_if<PrepareRandom>(&step.action)) {
            const NamedState *st = schedule_.find_state(p->state);
            size_t reg = space.index_of(p->reg);
            BasisMapOperator<A> op;
            op.domain = {reg};
            typename BasisMapOperator<A>::Row row;
            row.input = {space.reg(reg).init};
            for (const auto &term : st->expr) {
                row.output.emplace_back(LabelKey{space.token_index(reg, term.tokens[0])},
                                        amp_traits<A>::from_exact(term.coeff));
            }
            op.rows.push_back(std::move(row));
            stages.push_back(
                {step.at, "prepare " + p->reg + " as " + p->state, std::move(op), std::nullopt});
        } else if (const auto *c = std::get_if<ConditionalPrepare>(&step.action)) {
            size_t src = space.index_of(c->source);
            size_t dst = space.index_of(c->target);
            BasisMapOperator<A> op;
            op.domain = {src, dst};
            for (const auto &[trigger, expr] : c->arms) {
                typename BasisMapOperator<A>::Row row;
                uint16_t t = space.token_index(src, trigger);
                row.input = {t, space.reg(dst).init};
                for (const auto &term : expr) {
                    row.output.emplace_back(LabelKey{t, space.token_index(dst, term.tokens[0])},
                                            amp_traits<A>::from_exact(term.coeff));
                }
                op.rows.push_back(std::move(row));
            }
            stages.push_back({step.at, "condprepare " + c->target + " from " + c->source,
                              std::move(op), std::nullopt});
        } else if (const auto *m = std::get_if<MeasureStep>(&step.action)) {
            MeasureAction<A> action;
            action.basis = resolve_basis<A>(*schedule_.find_basis(m->basis), space);
            action.dest = space.index_of(m->dest);
            auto rules = m->records;
            if (rules.empty()) {
                for (const auto &[outcome, expr] : schedule_.find_basis(m->basis)->outcomes) {
                    rules.push_back({schedule_.find_register(m->dest)->init, outcome, outcome});
                }
            }
            for (const auto &rule : rules) {
                size_t oi = 0;
                while (action.basis.outcomes[oi].token != rule.outcome) {
                    ++oi;
                }
                action.records[{space.token_index(action.dest, rule.pre), oi}] =
                    space.token_index(action.dest, rule.post);
            }
            size_t dest = action.dest;
            stages.push_back({step.at, "measure " + m->agent + " in basis " + m->basis,
                              std::move(action), dest});
        } else if (const auto *inf = std::get_if<InferStep>(&step.action)) {
            for (const auto &stage : inf->stages) {
                std::optional<size_t> record;
                if (stage.table.source != stage.table.dest) {
                    record = space.index_of(stage.table.dest);
                }
                stages.push_back({stage.done, "infer " + inf->agent,
                                  compile_inference_unitary<A>(stage.table, space), record});
            }
        } else if (const auto *acc = std::get_if<AccessMemoryStep>(&step.action)) {
            stages.push_back({step.at,
                              "access " + acc->table.agent + " from " + acc->table.source,
                              compile_inference_unitary<A>(acc->table, space),
                              space.index_of(acc->table.dest)});
        }
        // HaltCheck evolves nothing.
    }
    return stages;
}

template <typename A>
StateVector<A> Scenario::present(const StateVector<A> &state, TimeStamp t) const {
    auto views = views_at(t);
    // Rewriting a group never disturbs registers before it, so apply views
    // from the innermost anchor backwards.
    std::sort(views.begin(), views.end(), [&](const NamedBasis *a, const NamedBasis *b) {
        return space_->index_of(a->registers.front()) > space_->index_of(b->registers.front());
    });
    StateVector<A> out = state;
    for (const NamedBasis *view : views) {
        out = rewrite_in_basis(out, resolve_basis<A>(*view, *out.space()));
    }
    return out;
}

template <typename A> static void check_norm(const StateVector<A> &state, const std::string &at) {
    if (!state.is_normalized()) {
        throw EngineError("state is not normalized after " + at);
    }
}

template <typename A>
EvolveResult<A> evolve_round(const Scenario &scenario, const std::vector<TimeStamp> &checkpoints) {
    std::vector<TimeStamp> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());

    EvolveResult<A> result;
    StateVector<A> state = StateVector<A>::initial(scenario.space());
    size_t next_cp = 0;
    auto snapshot_until = [&](std::optional<TimeStamp> next_done) {
        while (next_cp < cps.size() && (!next_done || cps[next_cp] < *next_done)) {
            result.snapshots.push_back(
                {cps[next_cp], scenario.present(state, cps[next_cp]), state});
            ++next_cp;
        }
    };

    for (const auto &stage : scenario.compile_stages<A>()) {
        snapshot_until(stage.done);
        if (const auto *op = std::get_if<BasisMapOperator<A>>(&stage.action)) {
            state = apply(*op, state);
        } else {
            const auto &m = std::get<MeasureAction<A>>(stage.action);
            state = record_measurement(state, m.basis, m.dest, m.records);
        }
        check_norm(state, stage.description);
    }
    snapshot_until(std::nullopt);
    result.final_state = std::move(state);
    return result;
}

template <typename A>
std::map<std::vector<std::string>, A> outcome_distribution(const Scenario &scenario,
                                                           const StateVector<A> &final_state) {
    const auto &halt = scenario.halt_condition();
    if (halt.empty()) {
        throw EngineError("schedule has no halt condition to define outcomes");
    }
    std::map<std::vector<std::string>, A> dist;
    for (const auto &[key, amp] : final_state.terms()) {
        std::vector<std::string> outcomes;
        for (const auto &[reg, wanted] : halt) {
            auto outcome = scenario.decode_outcome(reg, key[reg]);
            if (!outcome) {
                throw EngineError("branch token '" +
                                  final_state.space()->token_name(reg, key[reg]) +
                                  "' of register " + final_state.space()->reg(reg).name +
                                  " records no outcome");
            }
            outcomes.push_back(*outcome);
        }
        auto [it, inserted] = dist.try_emplace(std::move(outcomes), amp * amp);
        if (!inserted) {
            it->second = it->second + amp * amp;
        }
    }
    return dist;
}

std::vector<BranchReport> branch_reports(const Scenario &scenario,
                                         const StateVector<ExactReal> &final_state,
                                         ComparisonTimePolicy policy) {
    StateVector<ExactReal> presented =
        scenario.present(final_state, TimeStamp{UINT32_MAX, 59});
    const RegisterSpace &pspace = *presented.space();

    std::vector<BranchReport> reports;
    for (const auto &[key, amp] : presented.terms()) {
        BranchReport report;
        report.amplitude = amp;
        report.probability = amp * amp;
        for (size_t i = 0; i < pspace.size(); ++i) {
            const std::string &reg_name = pspace.reg(i).name;
            const std::string &token = pspace.token_name(i, key[i]);
            report.labels.emplace_back(reg_name, token);
            if (!scenario.space()->has_register(reg_name)) {
                continue; // a view pseudo-register carries no records
            }
            size_t orig = scenario.space()->index_of(reg_name);
            const TokenMeta &meta = scenario.meta(orig, key[i]);
            for (const auto &st : meta.statements) {
                report.records.push_back(st);
            }
            for (const auto &obs : meta.observations) {
                TimeStamp when = policy == ComparisonTimePolicy::Declared ? obs.asserted_at
                                                                          : obs.observed_at;
                report.records.push_back(
                    rule_q_observed(obs.agent, obs.variable, obs.outcome, when));
            }
        }
        report.violations = rule_s_check(report.records);
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<BranchReport> detect_violations(const Scenario &scenario,
                                            const StateVector<ExactReal> &final_state,
                                            ComparisonTimePolicy policy) {
    std::vector<BranchReport> out;
    for (auto &report : branch_reports(scenario, final_state, policy)) {
        if (!report.violations.empty()) {
            out.push_back(std::move(report));
        }
    }
    return out;
}

std::string outcome_key(const std::vector<std::string> &outcomes) {
    std::string key;
    for (size_t i = 0; i < outcomes.size(); ++i) {
        if (i) {
            key += ",";
        }
        key += outcomes[i];
    }
    return key;
}

SampleReport sample_runs(const Scenario &scenario, const RunConfig &config, uint32_t runs) {
    if (runs < 1) {
        throw EngineError("sample: need at least one run");
    }
    if (config.mode == Mode::Collapse) {
        throw EngineError("sample: collapse mode has no unitary final state to draw from");
    }

    // Rounds are independent and identically distributed: the global state
    // resets each round, so one evolution fixes the per-round distribution.
    std::vector<std::pair<std::vector<std::string>, double>> outcomes;
    if (config.mode == Mode::Exact) {
        auto result = evolve_round<ExactReal>(scenario, {});
        auto dist = outcome_distribution(scenario, result.final_state);
        ExactReal cum;
        for (const auto &[key, p] : dist) {
            cum += p;
            outcomes.emplace_back(key, cum.to_double());
        }
    } else {
        auto result = evolve_round<double>(scenario, {});
        auto dist = outcome_distribution(scenario, result.final_state);
        double cum = 0;
        for (const auto &[key, p] : dist) {
            cum += p;
            outcomes.emplace_back(key, cum);
        }
    }
    if (!outcomes.empty()) {
        outcomes.back().second = 1.0; // guard against rounding at the top end
    }

    std::vector<std::string> halt_target;
    for (const auto &[reg, outcome] : scenario.halt_condition()) {
        halt_target.push_back(outcome);
    }

    SampleReport report;
    report.seed = config.seed;
    report.runs = runs;
    report.max_rounds = config.max_rounds;
    double mean_acc = 0;
    uint64_t completed = 0;
    for (uint32_t run = 0; run < runs; ++run) {
        SplitMix64 rng = SplitMix64::for_run(config.seed, run);
        bool halted = false;
        uint32_t round = 0;
        while (round < config.max_rounds && !halted) {
            ++round;
            double u = rng.next_unit();
            const auto &drawn = *std::find_if(outcomes.begin(), outcomes.end(),
                                              [&](const auto &o) { return u < o.second; });
            ++report.draw_counts[outcome_key(drawn.first)];
            ++report.total_draws;
            halted = drawn.first == halt_target;
        }
        report.halting_rounds.push_back(round);
        if (halted) {
            mean_acc += round;
            ++completed;
        } else {
            ++report.partial_runs;
        }
    }
    report.mean_halting_round = completed ? mean_acc / static_cast<double>(completed) : 0.0;
    return report;
}

std::map<std::vector<std::string>, ExactReal> collapse_distribution(const Scenario &scenario) {
    using Member = std::pair<ExactReal, StateVector<ExactReal>>;
    std::vector<Member> ensemble;
    ensemble.emplace_back(ExactReal(1), StateVector<ExactReal>::initial(scenario.space()));

    for (const auto &stage : scenario.compile_stages<ExactReal>()) {
        std::vector<Member> next;
        for (auto &[weight, state] : ensemble) {
            StateVector<ExactReal> evolved;
            if (const auto *op = std::get_if<BasisMapOperator<ExactReal>>(&stage.action)) {
                evolved = apply(*op, state);
            } else {
                const auto &m = std::get<MeasureAction<ExactReal>>(stage.action);
                evolved = record_measurement(state, m.basis, m.dest, m.records);
            }
            if (!stage.record_register) {
                next.emplace_back(weight, std::move(evolved));
                continue;
            }
            // Assumption (H) for everyone: whenever a record is written, the
            // member is reduced to a definite value of that record.
            size_t reg = *stage.record_register;
            MeasurementBasis<ExactReal> token_basis;
            token_basis.name = scenario.space()->reg(reg).name + "-record";
            token_basis.targets = {reg};
            for (uint16_t tok = 0; tok < scenario.space()->reg(reg).tokens.size(); ++tok) {
                token_basis.outcomes.push_back(
                    {scenario.space()->token_name(reg, tok), {{{tok}, ExactReal(1)}}});
            }
            auto probs = born_distribution(evolved, token_basis);
            for (const auto &o : token_basis.outcomes) {
                if (probs[o.token].is_zero()) {
                    continue;
                }
                auto [p, collapsed] = project(evolved, token_basis, o.token);
                next.emplace_back(weight * p, std::move(collapsed));
            }
        }
        ensemble = std::move(next);
    }

    std::map<std::vector<std::string>, ExactReal> dist;
    ExactReal total;
    for (const auto &[weight, state] : ensemble) {
        const LabelKey &key = state.terms().begin()->first;
        std::vector<std::string> outcomes;
        for (const auto &[reg, wanted] : scenario.halt_condition()) {
            auto outcome = scenario.decode_outcome(reg, key[reg]);
            if (!outcome) {
                throw EngineError("collapse member records no outcome for register " +
                                  scenario.space()->reg(reg).name);
            }
            outcomes.push_back(*outcome);
        }
        auto [it, inserted] = dist.try_emplace(std::move(outcomes), weight);
        if (!inserted) {
            it->second = it->second + weight;
        }
        total += weight;
    }
    if (total != ExactReal(1)) {
        throw EngineError("collapse ensemble weights sum to " + total.to_short_string());
    }
    return dist;
}

template MeasurementBasis<ExactReal> Scenario::resolve_basis(const NamedBasis &) const;
template MeasurementBasis<double> Scenario::resolve_basis(const NamedBasis &) const;
template MeasurementBasis<ExactReal> Scenario::resolve_basis(const NamedBasis &,
                                                             const RegisterSpace &);
template MeasurementBasis<double> Scenario::resolve_basis(const NamedBasis &,
                                                          const RegisterSpace &);
template std::vector<CompiledStage<ExactReal>> Scenario::compile_stages() const;
template std::vector<CompiledStage<double>> Scenario::compile_stages() const;
template StateVector<ExactReal> Scenario::present(const StateVector<ExactReal> &,
                                                  TimeStamp) const;
template StateVector<double> Scenario::present(const StateVector<double> &, TimeStamp) const;
template EvolveResult<ExactReal> evolve_round(const Scenario &, const std::vector<TimeStamp> &);
template EvolveResult<double> evolve_round(const Scenario &, const std::vector<TimeStamp> &);
template std::map<std::vector<std::string>, ExactReal>
outcome_distribution(const Scenario &, const StateVector<ExactReal> &);
template std::map<std::vector<std::string>, double>
outcome_distribution(const Scenario &, const StateVector<double> &);

} // namespace wignerbox
