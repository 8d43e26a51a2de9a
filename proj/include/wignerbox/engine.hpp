#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wignerbox/dsl.hpp"
#include "wignerbox/hilbert.hpp"
#include "wignerbox/protocol.hpp"

namespace wignerbox {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { Exact, Float, Collapse };

/// When a measurement declares a comparison time, its recorded outcome is
/// asserted (via rule Qii) to hold at that time. ObservationTick ignores the
/// declaration and asserts at the measurement tick itself.
enum class ComparisonTimePolicy { Declared, ObservationTick };

struct RunConfig {
    Mode mode = Mode::Exact;
    uint32_t max_rounds = 1000;
    uint64_t seed = 0;
    std::vector<TimeStamp> checkpoints;
    ComparisonTimePolicy policy = ComparisonTimePolicy::Declared;
};

/// Everything the engine knows about one memory token: its display text,
/// the outcomes whose observation it records, and the certainty statements
/// attached to it by inference rows.
struct TokenMeta {
    std::string display;
    std::vector<Observation> observations;
    std::vector<StatementPtr> statements;
};

template <typename A> struct MeasureAction {
    MeasurementBasis<A> basis;
    size_t dest;
    RecordTokenMap records;
};

template <typename A> struct CompiledStage {
    TimeStamp done;
    std::string description;
    std::variant<BasisMapOperator<A>, MeasureAction<A>> action;
    /// Register whose record this stage writes (a measurement or a read of
    /// another register). Collapse mode splits the ensemble on it.
    std::optional<size_t> record_register;
};

/// A validated schedule compiled against its register space: stages in
/// execution order, token metadata, measurement views, halt condition.
class Scenario {
  public:
    static Scenario compile(const Schedule &schedule);

    const Schedule &schedule() const { return schedule_; }
    const SpacePtr &space() const { return space_; }

    const TokenMeta &meta(size_t reg, uint16_t tok) const;
    /// The outcome this token records for the register's measured variable,
    /// if any.
    std::optional<std::string> decode_outcome(size_t reg, uint16_t tok) const;

    /// Halt condition as (register index, required outcome) pairs.
    const std::vector<std::pair<size_t, std::string>> &halt_condition() const { return halt_; }

    /// Measurement bases over more than one register re-express the final
    /// state; these are the ones active at time t, anchored outermost-first.
    std::vector<const NamedBasis *> views_at(TimeStamp t) const;

    template <typename A> MeasurementBasis<A> resolve_basis(const NamedBasis &basis) const;
    template <typename A>
    static MeasurementBasis<A> resolve_basis(const NamedBasis &basis, const RegisterSpace &space);

    template <typename A> std::vector<CompiledStage<A>> compile_stages() const;

    /// Applies every view active at time t, outermost anchor last.
    template <typename A> StateVector<A> present(const StateVector<A> &state, TimeStamp t) const;

  private:
    Schedule schedule_;
    SpacePtr space_;
    std::map<std::pair<size_t, uint16_t>, TokenMeta> meta_;
    std::map<size_t, std::string> variable_of_; // dest register -> measured variable
    std::vector<std::pair<size_t, std::string>> halt_;
    struct ViewEntry {
        TimeStamp active_from;
        std::string basis;
    };
    std::vector<ViewEntry> views_;
};

template <typename A> struct Snapshot {
    TimeStamp at;
    StateVector<A> presented;
    StateVector<A> raw;
};

template <typename A> struct EvolveResult {
    StateVector<A> final_state; // in the underlying product basis
    std::vector<Snapshot<A>> snapshots;
};

/// Runs one round of the schedule from the initial product state, purely
/// unitarily, snapshotting at the requested ticks. The squared norm is
/// checked after every stage (exactly in exact mode).
template <typename A>
EvolveResult<A> evolve_round(const Scenario &scenario, const std::vector<TimeStamp> &checkpoints);

/// Joint distribution of the halt registers' recorded outcomes, keyed in
/// halt-condition order.
template <typename A>
std::map<std::vector<std::string>, A> outcome_distribution(const Scenario &scenario,
                                                           const StateVector<A> &final_state);

struct BranchReport {
    std::vector<std::pair<std::string, std::string>> labels; // (register, token)
    ExactReal amplitude;
    ExactReal probability;
    std::vector<StatementPtr> records;
    std::vector<std::pair<StatementPtr, StatementPtr>> violations;
};

/// One report per component of the final state, presented in the active
/// measurement views, with the certainty records decoded from memory tokens
/// (observations materialized as rule-Qii statements under `policy`).
std::vector<BranchReport> branch_reports(const Scenario &scenario,
                                         const StateVector<ExactReal> &final_state,
                                         ComparisonTimePolicy policy);

/// The branches whose records violate rule S.
std::vector<BranchReport> detect_violations(const Scenario &scenario,
                                            const StateVector<ExactReal> &final_state,
                                            ComparisonTimePolicy policy);

// ---- Seeded sampling ------------------------------------------------------
//
// The generator is pinned so independent implementations produce identical
// streams: 64-bit splitmix ("state += 0x9E3779B97F4A7C15; z = state;
// z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
// z *= 0x94D049BB133111EB; z ^= z >> 31"), uniform doubles from the top 53
// bits, and categorical draws by comparing against the exact cumulative
// probabilities converted to double, outcomes in lexicographic order. Run i
// of a multi-run sample starts from the state produced by one splitmix step
// of seed + (i+1)*0x9E3779B97F4A7C15; the extra step keeps run streams from
// overlapping on the shared counter.

struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static SplitMix64 for_run(uint64_t seed, uint64_t run_index) {
        SplitMix64 derive(seed + (run_index + 1) * 0x9E3779B97F4A7C15ULL);
        return SplitMix64(derive.next());
    }
};

struct SampleReport {
    uint64_t seed = 0;
    uint32_t runs = 0;
    uint32_t max_rounds = 0;
    /// Rounds executed per run, 1-indexed; capped at max_rounds for runs
    /// that never halted.
    std::vector<uint32_t> halting_rounds;
    uint32_t partial_runs = 0; // runs that hit max_rounds without halting
    uint64_t total_draws = 0;
    std::map<std::string, uint64_t> draw_counts; // outcome key -> draws
    double mean_halting_round = 0.0;             // over completed runs
};

/// Draws one joint outcome per round from the exact final distribution and
/// repeats rounds until the halt condition fires, `runs` times. Identical
/// (seed, runs) always produce an identical report.
SampleReport sample_runs(const Scenario &scenario, const RunConfig &config, uint32_t runs);

/// The collapse-contrast mode: a classical ensemble of pure states is split
/// at every measurement (projective collapse for everyone). Returns the
/// mixed outcome distribution over the halt registers.
std::map<std::vector<std::string>, ExactReal> collapse_distribution(const Scenario &scenario);

/// "okbar,ok"-style key for JSON maps and reports.
std::string outcome_key(const std::vector<std::string> &outcomes);

} // namespace wignerbox
