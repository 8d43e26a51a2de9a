#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "wignerbox/rational.hpp"

namespace wignerbox {

struct UnrepresentableRadical : std::runtime_error {
    explicit UnrepresentableRadical(const std::string &what) : std::runtime_error(what) {}
};

/// An element of Q[sqrt2, sqrt3], stored on the basis {1, sqrt2, sqrt3, sqrt6}:
///
///     value = c1 + c2*sqrt(2) + c3*sqrt(3) + c6*sqrt(6)
///
/// This field is closed under +, -, *, / and contains every coefficient that
/// occurs in the protocol (sqrt(1/2), sqrt(1/3), sqrt(1/6), sqrt(1/12), ...).
/// Equality is component-wise rational equality, hence exact and decidable.
class ExactReal {
  public:
    ExactReal() = default;
    ExactReal(const Rational &r) : c1_(r) {}
    ExactReal(long n) : c1_(n) {}
    ExactReal(const Rational &c1, const Rational &c2, const Rational &c3, const Rational &c6)
        : c1_(c1), c2_(c2), c3_(c3), c6_(c6) {}

    /// Exact square root of a non-negative rational, when the squarefree part
    /// of numerator*denominator is one of {1, 2, 3, 6}. Throws
    /// UnrepresentableRadical otherwise (e.g. sqrt(1/5)).
    static ExactReal from_sqrt(const Rational &r);

    /// Square root of a value that is itself a non-negative rational.
    /// Used to renormalize projected states; irrational inputs are rejected.
    ExactReal sqrt() const;

    const Rational &c1() const { return c1_; }
    const Rational &c2() const { return c2_; }
    const Rational &c3() const { return c3_; }
    const Rational &c6() const { return c6_; }

    bool is_zero() const { return c1_ == 0 && c2_ == 0 && c3_ == 0 && c6_ == 0; }
    bool is_rational() const { return c2_ == 0 && c3_ == 0 && c6_ == 0; }
    /// The rational part; only meaningful when is_rational().
    const Rational &as_rational() const { return c1_; }

    double to_double() const;

    ExactReal operator-() const { return ExactReal(-c1_, -c2_, -c3_, -c6_); }
    ExactReal operator+(const ExactReal &o) const {
        return ExactReal(c1_ + o.c1_, c2_ + o.c2_, c3_ + o.c3_, c6_ + o.c6_);
    }
    ExactReal operator-(const ExactReal &o) const { return *this + (-o); }
    ExactReal operator*(const ExactReal &o) const;
    ExactReal operator/(const ExactReal &o) const;
    ExactReal &operator+=(const ExactReal &o) { return *this = *this + o; }
    ExactReal &operator-=(const ExactReal &o) { return *this = *this - o; }
    ExactReal &operator*=(const ExactReal &o) { return *this = *this * o; }

    bool operator==(const ExactReal &o) const {
        return c1_ == o.c1_ && c2_ == o.c2_ && c3_ == o.c3_ && c6_ == o.c6_;
    }
    bool operator!=(const ExactReal &o) const { return !(*this == o); }

    /// Canonical serialization: "c1 + c2*sqrt2 + c3*sqrt3 + c6*sqrt6",
    /// each coefficient as "p/q". All four terms always present.
    std::string to_string() const;
    /// Compact form with zero terms dropped: "1/12", "-1/6*sqrt3", "0".
    std::string to_short_string() const;

    /// Parses both the canonical and the compact form.
    static ExactReal parse(const std::string &text);

  private:
    Rational c1_{0}, c2_{0}, c3_{0}, c6_{0};
};

inline ExactReal sqrt_of(const Rational &r) { return ExactReal::from_sqrt(r); }

} // namespace wignerbox
