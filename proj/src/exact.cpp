#include "wignerbox/exact.hpp"

#include <cmath>
#include <sstream>

namespace wignerbox {

namespace {

// Splits n >= 1 into (m, s) with n = m^2 * s and s squarefree over {2, 3}.
// Returns false if the leftover part of n is not a perfect square, i.e. the
// squarefree part of n contains a prime other than 2 or 3.
bool split_square(BigInt n, BigInt &m, BigInt &s) {
    m = 1;
    s = 1;
    for (BigInt p : {BigInt(2), BigInt(3)}) {
        unsigned exp = 0;
        while (n % p == 0) {
            n /= p;
            ++exp;
        }
        if (exp % 2 != 0) {
            s *= p;
        }
        for (unsigned i = 0; i < exp / 2; ++i) {
            m *= p;
        }
    }
    BigInt root = boost::multiprecision::sqrt(n);
    if (root * root != n) {
        return false;
    }
    m *= root;
    return true;
}

} // namespace

ExactReal ExactReal::from_sqrt(const Rational &r) {
    if (r < 0) {
        throw UnrepresentableRadical("from_sqrt: negative radicand");
    }
    if (r == 0) {
        return ExactReal();
    }
    // sqrt(p/q) = sqrt(p*q)/q; write p*q = m^2 * s with s squarefree.
    BigInt p = numerator(r);
    BigInt q = denominator(r);
    BigInt m, s;
    if (!split_square(p * q, m, s)) {
        throw UnrepresentableRadical("from_sqrt: squarefree part of " + r.str() +
                                     " is not in {1, 2, 3, 6}");
    }
    Rational coeff(m, q);
    if (s == 1) {
        return ExactReal(coeff);
    }
    if (s == 2) {
        return ExactReal(0, coeff, 0, 0);
    }
    if (s == 3) {
        return ExactReal(0, 0, coeff, 0);
    }
    return ExactReal(0, 0, 0, coeff); // s == 6
}

ExactReal ExactReal::sqrt() const {
    if (!is_rational()) {
        throw UnrepresentableRadical("sqrt: value " + to_short_string() + " is not rational");
    }
    return from_sqrt(c1_);
}

ExactReal ExactReal::operator*(const ExactReal &o) const {
    // Basis products: sqrt2*sqrt3 = sqrt6, sqrt2*sqrt6 = 2*sqrt3,
    // sqrt3*sqrt6 = 3*sqrt2, and squares are rational.
    return ExactReal(
        c1_ * o.c1_ + 2 * c2_ * o.c2_ + 3 * c3_ * o.c3_ + 6 * c6_ * o.c6_,
        c1_ * o.c2_ + c2_ * o.c1_ + 3 * (c3_ * o.c6_ + c6_ * o.c3_),
        c1_ * o.c3_ + c3_ * o.c1_ + 2 * (c2_ * o.c6_ + c6_ * o.c2_),
        c1_ * o.c6_ + c6_ * o.c1_ + c2_ * o.c3_ + c3_ * o.c2_);
}

ExactReal ExactReal::operator/(const ExactReal &o) const {
    if (o.is_zero()) {
        throw std::domain_error("ExactReal: division by zero");
    }
    // Rationalize with the two field automorphisms sqrt2 -> -sqrt2 and
    // sqrt3 -> -sqrt3: x * s2(x) * s3(x) * s23(x) is rational.
    ExactReal s2(o.c1_, -o.c2_, o.c3_, -o.c6_);
    ExactReal s3(o.c1_, o.c2_, -o.c3_, -o.c6_);
    ExactReal s23(o.c1_, -o.c2_, -o.c3_, o.c6_);
    ExactReal conj = s2 * s3 * s23;
    ExactReal norm = o * conj;
    // norm is invariant under both automorphisms, hence rational.
    const Rational &n = norm.c1_;
    ExactReal num = *this * conj;
    return ExactReal(num.c1_ / n, num.c2_ / n, num.c3_ / n, num.c6_ / n);
}

double ExactReal::to_double() const {
    static const double kSqrt2 = std::sqrt(2.0);
    static const double kSqrt3 = std::sqrt(3.0);
    static const double kSqrt6 = std::sqrt(6.0);
    return rational_to_double(c1_) + rational_to_double(c2_) * kSqrt2 +
           rational_to_double(c3_) * kSqrt3 + rational_to_double(c6_) * kSqrt6;
}

namespace {

std::string rat_str(const Rational &r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

} // namespace

std::string ExactReal::to_string() const {
    std::ostringstream out;
    out << rat_str(c1_) << " + " << rat_str(c2_) << "*sqrt2 + " << rat_str(c3_) << "*sqrt3 + "
        << rat_str(c6_) << "*sqrt6";
    return out.str();
}

std::string ExactReal::to_short_string() const {
    if (is_zero()) {
        return "0";
    }
    std::ostringstream out;
    bool first = true;
    auto emit = [&](const Rational &c, const char *radical) {
        if (c == 0) {
            return;
        }
        Rational a = c;
        if (first) {
            if (a < 0) {
                out << "-";
                a = -a;
            }
        } else {
            out << (a < 0 ? " - " : " + ");
            if (a < 0) {
                a = -a;
            }
        }
        first = false;
        bool unit = (a == 1) && radical[0] != '\0';
        if (!unit) {
            out << numerator(a).str();
            if (denominator(a) != 1) {
                out << "/" << denominator(a).str();
            }
        }
        if (radical[0] != '\0') {
            if (!unit) {
                out << "*";
            }
            out << radical;
        }
    };
    emit(c1_, "");
    emit(c2_, "sqrt2");
    emit(c3_, "sqrt3");
    emit(c6_, "sqrt6");
    return out.str();
}

ExactReal ExactReal::parse(const std::string &text) {
    // Term grammar, shared by the canonical and compact forms:
    //   value := term (('+'|'-') term)*
    //   term  := rational ['*' radical] | radical
    ExactReal result;
    size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
    };
    auto fail = [&](const std::string &why) -> ExactReal {
        throw std::invalid_argument("ExactReal::parse: " + why + " in \"" + text + "\"");
    };
    bool first = true;
    while (true) {
        skip_ws();
        if (i >= text.size()) {
            if (first) {
                fail("empty input");
            }
            break;
        }
        int sign = 1;
        if (text[i] == '+' || text[i] == '-') {
            if (first && text[i] == '+') {
                fail("leading plus");
            }
            sign = text[i] == '-' ? -1 : 1;
            ++i;
            skip_ws();
        } else if (!first) {
            fail("expected '+' or '-' between terms");
        }
        first = false;
        Rational coeff(1);
        bool have_coeff = false;
        if (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])))) {
            size_t start = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
            BigInt num(text.substr(start, i - start));
            BigInt den(1);
            if (i < text.size() && text[i] == '/') {
                ++i;
                size_t dstart = i;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                    ++i;
                }
                if (dstart == i) {
                    fail("missing denominator");
                }
                den = BigInt(text.substr(dstart, i - dstart));
            }
            coeff = Rational(num, den);
            have_coeff = true;
            skip_ws();
            if (i < text.size() && text[i] == '*') {
                ++i;
                skip_ws();
            }
        }
        int radical = 1;
        if (i + 4 < text.size() && text.compare(i, 4, "sqrt") == 0) {
            char which = text[i + 4];
            if (which != '2' && which != '3' && which != '6') {
                fail("unknown radical");
            }
            radical = which - '0';
            i += 5;
        } else if (!have_coeff) {
            fail("expected term");
        }
        coeff *= sign;
        switch (radical) {
        case 1: result += ExactReal(coeff); break;
        case 2: result += ExactReal(0, coeff, 0, 0); break;
        case 3: result += ExactReal(0, 0, coeff, 0); break;
        case 6: result += ExactReal(0, 0, 0, coeff); break;
        }
    }
    return result;
}

} // namespace wignerbox
