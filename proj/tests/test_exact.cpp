#include <doctest.h>

#include "test_support.hpp"
#include "wignerbox/exact.hpp"
#include "wignerbox/engine.hpp"

using namespace wignerbox;
using wignerbox::testing::rt;

namespace {

Rational random_rational(SplitMix64 &rng) {
    long num = static_cast<long>(rng.next() % 101) - 50;
    long den = static_cast<long>(rng.next() % 50) + 1;
    return Rational(num, den);
}

ExactReal random_value(SplitMix64 &rng) {
    return ExactReal(random_rational(rng), random_rational(rng), random_rational(rng),
                     random_rational(rng));
}

// A radicand whose square root stays in the field: s * (a/b)^2, s in {1,2,3,6}.
Rational random_representable(SplitMix64 &rng) {
    static const long squarefree[] = {1, 2, 3, 6};
    long s = squarefree[rng.next() % 4];
    long a = static_cast<long>(rng.next() % 20);
    long b = static_cast<long>(rng.next() % 20) + 1;
    return Rational(s * a * a, b * b);
}

} // namespace

TEST_CASE("from_sqrt of the protocol coefficients") {
    CHECK(rt(1, 2) == ExactReal(0, Rational(1, 2), 0, 0));
    CHECK(rt(1, 12) == ExactReal(0, 0, Rational(1, 6), 0));
    CHECK(rt(2, 3) == ExactReal(0, 0, 0, Rational(1, 3)));
    CHECK(rt(1, 3) == ExactReal(0, 0, Rational(1, 3), 0));
    CHECK(rt(1, 6) == ExactReal(0, 0, 0, Rational(1, 6)));
    CHECK(rt(3, 4) == ExactReal(0, 0, Rational(1, 2), 0));
    CHECK(rt(4, 9) == ExactReal(Rational(2, 3)));
    CHECK(rt(0, 1) == ExactReal(0));
}

TEST_CASE("from_sqrt rejects radicals outside the field") {
    CHECK_THROWS_AS(ExactReal::from_sqrt(Rational(1, 5)), UnrepresentableRadical);
    CHECK_THROWS_AS(ExactReal::from_sqrt(Rational(7, 1)), UnrepresentableRadical);
    CHECK_THROWS_AS(ExactReal::from_sqrt(Rational(-1, 2)), UnrepresentableRadical);
}

TEST_CASE("amplitude identities from the protocol") {
    // sqrt(1/12) + sqrt(1/3) = sqrt(3)/2 and sqrt(1/3) - sqrt(1/12) = sqrt(3)/6
    CHECK(rt(1, 12) + rt(1, 3) == ExactReal(0, 0, Rational(1, 2), 0));
    CHECK(-rt(1, 12) + rt(1, 3) == ExactReal(0, 0, Rational(1, 6), 0));
    CHECK(rt(1, 2) * rt(1, 2) == ExactReal(Rational(1, 2)));
    CHECK(rt(2, 3) * rt(1, 2) == rt(1, 3));
    CHECK(rt(1, 6) + rt(1, 6) == rt(2, 3));
}

TEST_CASE("squaring from_sqrt recovers the radicand exactly") {
    SplitMix64 rng(0x5eed);
    for (int i = 0; i < 500; ++i) {
        Rational r = random_representable(rng);
        ExactReal root = ExactReal::from_sqrt(r);
        CHECK(root * root == ExactReal(r));
        CHECK(!(root.to_double() < 0));
    }
}

TEST_CASE("ring axioms on random values") {
    SplitMix64 rng(0xabcdef);
    for (int i = 0; i < 200; ++i) {
        ExactReal a = random_value(rng), b = random_value(rng), c = random_value(rng);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a + (-a) == ExactReal(0));
        CHECK(a * ExactReal(1) == a);
    }
}

TEST_CASE("field division") {
    SplitMix64 rng(0x1234);
    for (int i = 0; i < 200; ++i) {
        ExactReal a = random_value(rng), b = random_value(rng);
        if (b.is_zero()) {
            continue;
        }
        CHECK(a / b * b == a);
        CHECK(b / b == ExactReal(1));
    }
    CHECK_THROWS_AS(ExactReal(1) / ExactReal(0), std::domain_error);
}

TEST_CASE("to_double is a homomorphism within 1e-12") {
    SplitMix64 rng(0x77);
    for (int i = 0; i < 200; ++i) {
        ExactReal a = random_value(rng), b = random_value(rng);
        double scale = std::max({1.0, std::fabs(a.to_double()), std::fabs(b.to_double())});
        CHECK(std::fabs((a + b).to_double() - (a.to_double() + b.to_double())) <= 1e-12 * scale);
        double prod_scale = std::max(1.0, std::fabs(a.to_double() * b.to_double()));
        CHECK(std::fabs((a * b).to_double() - a.to_double() * b.to_double()) <=
              1e-12 * prod_scale);
    }
}

TEST_CASE("serialization round-trips") {
    SplitMix64 rng(0x51);
    for (int i = 0; i < 200; ++i) {
        ExactReal a = random_value(rng);
        CHECK(ExactReal::parse(a.to_string()) == a);
        CHECK(ExactReal::parse(a.to_short_string()) == a);
    }
    CHECK(rt(1, 12).to_string() == "0/1 + 0/1*sqrt2 + 1/6*sqrt3 + 0/1*sqrt6");
    CHECK(rt(1, 12).to_short_string() == "1/6*sqrt3");
    CHECK((-rt(1, 12)).to_short_string() == "-1/6*sqrt3");
    CHECK(ExactReal(0).to_short_string() == "0");
    CHECK(ExactReal::parse("1/12") == ExactReal(Rational(1, 12)));
    CHECK(ExactReal::parse("sqrt3") == ExactReal(0, 0, 1, 0));
    CHECK_THROWS(ExactReal::parse("sqrt5"));
    CHECK_THROWS(ExactReal::parse(""));
}

TEST_CASE("sqrt of rational values in the field") {
    CHECK(ExactReal(Rational(1, 12)).sqrt() == rt(1, 12));
    CHECK(ExactReal(Rational(3, 4)).sqrt() == ExactReal(0, 0, Rational(1, 2), 0));
    CHECK_THROWS_AS(rt(1, 2).sqrt(), UnrepresentableRadical); // sqrt(sqrt(1/2)) leaves the field
}
