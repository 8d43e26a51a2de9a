#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace wignerbox {

// Arbitrary-precision integers and rationals. Repeated basis changes
// multiply denominators, so fixed-width types are not an option.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double rational_to_double(const Rational &r) {
    return r.convert_to<double>();
}

} // namespace wignerbox
