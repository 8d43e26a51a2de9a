#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wignerbox/agents.hpp"
#include "wignerbox/exact.hpp"
#include "wignerbox/timestamp.hpp"

namespace wignerbox {

/// A linear combination of product labels, written at the string level.
/// `tokens` has one entry per register of the expression's register list.
struct LinearTerm {
    ExactReal coeff;
    std::vector<std::string> tokens;

    bool operator==(const LinearTerm &) const = default;
};
using LinearExpr = std::vector<LinearTerm>;

struct RegisterDecl {
    std::string name;
    std::vector<std::string> tokens;
    std::string init;
    /// Optional human-readable text per token, used in reports only.
    std::vector<std::pair<std::string, std::string>> displays;

    bool operator==(const RegisterDecl &) const = default;
};

struct NamedState {
    std::string name;
    std::vector<std::string> registers;
    LinearExpr expr;

    bool operator==(const NamedState &) const = default;
};

struct NamedBasis {
    std::string name;
    std::vector<std::string> registers;
    std::vector<std::pair<std::string, LinearExpr>> outcomes;

    bool operator==(const NamedBasis &) const = default;
};

// ---- Step actions -------------------------------------------------------

struct PrepareRandom {
    std::string reg;
    std::string state; // named state

    bool operator==(const PrepareRandom &) const = default;
};

struct ConditionalPrepare {
    std::string source;
    std::string target;
    std::vector<std::pair<std::string, LinearExpr>> arms; // source token -> target state

    bool operator==(const ConditionalPrepare &) const = default;
};

/// One record rule of a measurement: when dest holds `pre` and the outcome
/// is `outcome`, write `post`.
struct RecordRule {
    std::string pre;
    std::string outcome;
    std::string post;

    bool operator==(const RecordRule &) const = default;
};

struct MeasureStep {
    std::string agent;
    std::vector<std::string> targets;
    std::string basis;
    std::string dest;
    std::string variable; // the observed variable name (z, wbar, w, ...)
    /// Time the recorded value is asserted to hold for rule-S comparison;
    /// defaults to the step's own tick.
    std::optional<TimeStamp> compare_at;
    /// Empty means the default map: (dest init, outcome) -> outcome token.
    std::vector<RecordRule> records;

    bool operator==(const MeasureStep &) const = default;
};

struct InferStage {
    TimeStamp done; // completion tick, for checkpoint resolution
    InferenceTable table;

    bool operator==(const InferStage &o) const { return done == o.done && table == o.table; }
};

struct InferStep {
    std::string agent;
    std::vector<InferStage> stages;

    bool operator==(const InferStep &) const = default;
};

/// The reader copies/derives its memory token from another register.
struct AccessMemoryStep {
    InferenceTable table;

    bool operator==(const AccessMemoryStep &o) const { return table == o.table; }
};

struct HaltCheck {
    /// Conjunction over decoded outcomes: register's recorded outcome == value.
    std::vector<std::pair<std::string, std::string>> conditions;

    bool operator==(const HaltCheck &) const = default;
};

using StepAction =
    std::variant<PrepareRandom, ConditionalPrepare, MeasureStep, InferStep, AccessMemoryStep,
                 HaltCheck>;

struct Step {
    TimeStamp at;
    StepAction action;

    bool operator==(const Step &) const = default;
};

struct Schedule {
    std::vector<RegisterDecl> registers;
    std::vector<NamedState> states;
    std::vector<NamedBasis> bases;
    std::vector<Step> steps;

    bool operator==(const Schedule &) const = default;

    const RegisterDecl *find_register(const std::string &name) const;
    const NamedState *find_state(const std::string &name) const;
    const NamedBasis *find_basis(const std::string &name) const;
};

struct Diagnostic {
    int step = -1; // index into steps, -1 for declaration-level issues
    std::string message;

    bool operator==(const Diagnostic &) const = default;
};

/// Structural validation: declarations resolve, bases are orthonormal,
/// timestamps are ordered, exactly one halt check and it comes last.
/// Empty result means the schedule is well-formed.
std::vector<Diagnostic> validate(const Schedule &schedule);

/// The ten-step Frauchiger-Renner protocol, rounds n:00 .. n:40.
Schedule canonical_fr_schedule();

/// Renders a schedule back to the text format parse_schedule accepts.
/// parse_schedule(serialize_schedule(s)) == s for every valid schedule.
std::string serialize_schedule(const Schedule &schedule);

} // namespace wignerbox
