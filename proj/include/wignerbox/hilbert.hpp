#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "wignerbox/exact.hpp"

namespace wignerbox {

struct HilbertError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IsometryViolation : HilbertError {
    using HilbertError::HilbertError;
};
struct SupportLeakage : HilbertError {
    using HilbertError::HilbertError;
};
struct ZeroProbabilityOutcome : HilbertError {
    using HilbertError::HilbertError;
};
struct DestNotReady : HilbertError {
    using HilbertError::HilbertError;
};

/// Amplitude backends. ExactReal gives exact arithmetic and exact equality;
/// double is the floating-point fallback with 1e-9 tolerances.
template <typename A> struct amp_traits;

template <> struct amp_traits<ExactReal> {
    static constexpr bool exact = true;
    static bool is_zero(const ExactReal &a) { return a.is_zero(); }
    static ExactReal from_exact(const ExactReal &a) { return a; }
    static double to_double(const ExactReal &a) { return a.to_double(); }
    static ExactReal sqrt(const ExactReal &a) { return a.sqrt(); }
    static bool close(const ExactReal &a, const ExactReal &b) { return a == b; }
    static ExactReal one() { return ExactReal(1); }
};

template <> struct amp_traits<double> {
    static constexpr bool exact = false;
    static constexpr double drop_eps = 1e-14;
    static constexpr double tol = 1e-9;
    static bool is_zero(double a) { return std::fabs(a) <= drop_eps; }
    static double from_exact(const ExactReal &a) { return a.to_double(); }
    static double to_double(double a) { return a; }
    static double sqrt(double a) { return std::sqrt(a); }
    static bool close(double a, double b) { return std::fabs(a - b) <= tol; }
    static double one() { return 1.0; }
};

struct Register {
    std::string name;
    std::vector<std::string> tokens;
    uint16_t init = 0;

    bool operator==(const Register &o) const = default;
};

/// An ordered list of named registers, each with a finite token alphabet.
/// Registers and tokens are referred to by index everywhere in the hot path.
class RegisterSpace {
  public:
    size_t add_register(const std::string &name, std::vector<std::string> tokens,
                        const std::string &init_token);

    size_t size() const { return regs_.size(); }
    const Register &reg(size_t i) const { return regs_.at(i); }
    const std::vector<Register> &registers() const { return regs_; }

    bool has_register(const std::string &name) const;
    size_t index_of(const std::string &name) const;
    uint16_t token_index(size_t reg, const std::string &token) const;
    bool has_token(size_t reg, const std::string &token) const;
    const std::string &token_name(size_t reg, uint16_t tok) const {
        return regs_.at(reg).tokens.at(tok);
    }

    bool operator==(const RegisterSpace &o) const { return regs_ == o.regs_; }

  private:
    std::vector<Register> regs_;
};

using SpacePtr = std::shared_ptr<const RegisterSpace>;

/// One token index per register, in register order.
using LabelKey = std::vector<uint16_t>;

/// A sparse state vector: map from full label tuples to amplitudes.
/// Kept canonical at all times (duplicate keys merged, zeros dropped).
template <typename A> class StateVector {
  public:
    StateVector() = default;
    explicit StateVector(SpacePtr space) : space_(std::move(space)) {}

    /// The product state of every register's declared init token, amplitude 1.
    static StateVector initial(SpacePtr space);

    const SpacePtr &space() const { return space_; }
    const std::map<LabelKey, A> &terms() const { return terms_; }
    size_t term_count() const { return terms_.size(); }

    void add_term(const LabelKey &key, const A &amp);
    A amplitude(const LabelKey &key) const;

    A squared_norm() const;
    bool is_normalized() const;

    StateVector scaled(const A &factor) const;

    bool operator==(const StateVector &o) const {
        return *space_ == *o.space_ && terms_ == o.terms_;
    }

  private:
    SpacePtr space_;
    std::map<LabelKey, A> terms_;
};

/// A linear combination of product labels over a subset of registers.
template <typename A> using SubVector = std::vector<std::pair<LabelKey, A>>;

/// An isometry/unitary given by its action on a finite set of orthogonal
/// product states over some domain registers. Labels not listed as row
/// inputs are mapped identically; applying the operator checks that this
/// identity completion does not interfere with the listed outputs.
template <typename A> struct BasisMapOperator {
    std::vector<size_t> domain; // register indices into the space
    struct Row {
        LabelKey input;      // one token index per domain register
        SubVector<A> output; // linear combination over the domain registers
    };
    std::vector<Row> rows;

    /// Verifies pairwise-distinct inputs and orthonormal outputs.
    /// Exact check for ExactReal, 1e-9 tolerance for double.
    void check_isometry() const;
};

/// A (possibly partial) orthonormal basis over the joint space of some
/// target registers, with named outcomes.
template <typename A> struct MeasurementBasis {
    std::string name;
    std::vector<size_t> targets;
    struct Outcome {
        std::string token;
        SubVector<A> vec;
    };
    std::vector<Outcome> outcomes;

    void check_orthonormal() const;
};

/// Maps (dest pre-measurement token, outcome index) to the recorded token.
/// The plain "dest ready" case has a single pre token.
using RecordTokenMap = std::map<std::pair<uint16_t, size_t>, uint16_t>;

template <typename A>
StateVector<A> apply(const BasisMapOperator<A> &op, const StateVector<A> &psi);

template <typename A>
std::map<std::string, A> born_distribution(const StateVector<A> &psi,
                                           const MeasurementBasis<A> &basis);

template <typename A>
std::pair<A, StateVector<A>> project(const StateVector<A> &psi, const MeasurementBasis<A> &basis,
                                     const std::string &outcome);

/// Measurement as a unitary: each outcome component of psi is tagged with
/// its outcome token in the dest register. Entangles, never collapses.
template <typename A>
StateVector<A> record_measurement(const StateVector<A> &psi, const MeasurementBasis<A> &basis,
                                  size_t dest, const RecordTokenMap &token_map);

/// Re-expresses psi with the basis's target registers replaced by a single
/// pseudo-register whose tokens are the basis outcome names. Invertible via
/// expand_from_basis. Errors with SupportLeakage if the basis does not span
/// the support.
template <typename A>
StateVector<A> rewrite_in_basis(const StateVector<A> &psi, const MeasurementBasis<A> &basis);

template <typename A>
StateVector<A> expand_from_basis(const StateVector<A> &presentation,
                                 const MeasurementBasis<A> &basis, const SpacePtr &original);

/// Probability of each token of one register (diagonal of the reduced state).
template <typename A>
std::map<std::string, A> marginal_distribution(const StateVector<A> &psi, size_t reg);

StateVector<double> to_float(const StateVector<ExactReal> &psi);

} // namespace wignerbox
