#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wignerbox/hilbert.hpp"
#include "wignerbox/timestamp.hpp"

namespace wignerbox {

struct NonInjectiveTable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Q = certainty from a Born-probability-1 prediction, Qii = certainty from
/// a directly observed outcome, C = certainty inherited from another
/// conforming agent's certainty.
enum class RuleTag { Q, Qii, C };

std::string rule_tag_name(RuleTag tag);
RuleTag rule_tag_from_name(const std::string &name);

struct CertaintyStatement;
using StatementPtr = std::shared_ptr<const CertaintyStatement>;

/// "I am certain that <variable> = <value> at time <time>", held by <agent>,
/// with the premise statements it was derived from.
struct CertaintyStatement {
    std::string agent;
    std::string variable;
    std::string value;
    TimeStamp time;
    RuleTag rule = RuleTag::Q;
    std::vector<StatementPtr> premises;

    std::string str() const;
};

bool operator==(const CertaintyStatement &a, const CertaintyStatement &b);
inline bool operator!=(const CertaintyStatement &a, const CertaintyStatement &b) {
    return !(a == b);
}

StatementPtr make_statement(std::string agent, std::string variable, std::string value,
                            TimeStamp time, RuleTag rule, std::vector<StatementPtr> premises = {});

/// A recorded measurement outcome. asserted_at is the time the derived Qii
/// certainty refers to; it may trail the observation tick when the recorded
/// value is compared against a prediction about a later time.
struct Observation {
    std::string agent;
    std::string variable;
    std::string outcome;
    TimeStamp observed_at;
    TimeStamp asserted_at;

    bool operator==(const Observation &) const = default;
};

/// Rule Q(i): if exactly one outcome of the basis has Born probability 1 in
/// the given state, the agent may record certainty in it. Returns nullopt
/// when no outcome is certain.
template <typename A>
std::optional<StatementPtr> rule_q_certify(const StateVector<A> &prepared,
                                           const MeasurementBasis<A> &basis,
                                           const std::string &agent, const std::string &variable,
                                           TimeStamp time);

/// Rule Q(ii): certainty from having observed the outcome directly.
StatementPtr rule_q_observed(const std::string &agent, const std::string &variable,
                             const std::string &outcome, TimeStamp time);

/// Rule C: certainty about a conforming agent's certainty lifts to certainty
/// in the same statement.
StatementPtr rule_c_lift(const std::string &outer_agent, const StatementPtr &inner);

/// Rule S: returns every pair of statements held by the same agent that
/// assert different values for the same (variable, time).
std::vector<std::pair<StatementPtr, StatementPtr>>
rule_s_check(const std::vector<StatementPtr> &records);

/// One row of an agent's inference program: when the source register holds
/// `trigger`, write `write` into the dest register and attach `statements`
/// to it. "No conclusion drawn" is an ordinary row whose statement list is
/// empty; it still writes a real token, since the compiled operator must be
/// injective on the trigger alphabet.
struct InferenceRow {
    std::string trigger;
    std::string write;
    std::vector<StatementPtr> statements;
};

bool operator==(const InferenceRow &a, const InferenceRow &b);

/// source == dest is an in-place memory rewrite (the agent reasoning from
/// its own records); source != dest reads one register and writes another
/// (a measurement-style record or a memory access).
struct InferenceTable {
    std::string agent;
    std::string source;
    std::string dest;
    std::vector<InferenceRow> rows;
};

bool operator==(const InferenceTable &a, const InferenceTable &b);

/// Compiles the table into a basis-map operator on the underlying space.
/// In-place tables become token permutation rows on [dest]; cross-register
/// tables become (trigger, dest-ready) -> (trigger, write) rows.
template <typename A>
BasisMapOperator<A> compile_inference_unitary(const InferenceTable &table,
                                              const RegisterSpace &space);

} // namespace wignerbox
