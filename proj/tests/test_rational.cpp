#include <doctest.h>

#include <cmath>

#include "dichotomy/rational.hpp"

using dichotomy::Rational;

TEST_CASE("construction and canonical form") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(-2, 4) == Rational(-1, 2));
    CHECK(Rational(3, -6) == Rational(-1, 2));
    CHECK(Rational(0, 7) == Rational(0));
    CHECK(Rational(1, 2).str() == "1/2");
    CHECK(Rational(4, 2).str() == "2");
    CHECK(Rational(-1, 3).str() == "-1/3");
}

TEST_CASE("parse accepts fractions, integers, and signs") {
    CHECK(Rational::parse("1/12") == Rational(1, 12));
    CHECK(Rational::parse("-7/3") == Rational(-7, 3));
    CHECK(Rational::parse("5") == Rational(5));
    CHECK(Rational::parse("0") == Rational(0));
    CHECK_THROWS(Rational::parse("abc"));
    CHECK_THROWS(Rational::parse("1/0"));
}

TEST_CASE("from_double is exact for dyadic values") {
    CHECK(Rational::from_double(0.5) == Rational(1, 2));
    CHECK(Rational::from_double(0.375) == Rational(3, 8));
    CHECK(Rational::from_double(-2.25) == Rational(-9, 4));
    // a non-dyadic double embeds exactly as its binary value
    const Rational third = Rational::from_double(1.0 / 3.0);
    CHECK(third.to_double() == 1.0 / 3.0);
    CHECK(third != Rational(1, 3));
}

TEST_CASE("approximate snaps to small denominators inside the window") {
    auto r = Rational::approximate(1.0 / 3.0, 1000000, 1e-9);
    REQUIRE(r.has_value());
    CHECK(*r == Rational(1, 3));

    auto half = Rational::approximate(0.5, 1000000, 1e-9);
    REQUIRE(half.has_value());
    CHECK(*half == Rational(1, 2));

    auto tiny = Rational::approximate(1.0 / 12.0 + 1e-13, 1000000, 1e-9);
    REQUIRE(tiny.has_value());
    CHECK(*tiny == Rational(1, 12));

    // no small-denominator rational within a tight window
    auto none = Rational::approximate(0.123456789012345, 1000, 1e-14);
    CHECK(!none.has_value());
}

TEST_CASE("arithmetic stays exact") {
    const Rational a(1, 6), b(1, 10);
    CHECK(a + b == Rational(4, 15));
    CHECK(a - b == Rational(1, 15));
    CHECK(a * b == Rational(1, 60));
    CHECK(a / b == Rational(5, 3));
    CHECK(-a == Rational(-1, 6));
    CHECK(abs(Rational(-3, 7)) == Rational(3, 7));
    CHECK_THROWS(a / Rational(0));

    Rational s(0);
    for (int i = 0; i < 12; ++i) s += Rational(1, 12);
    CHECK(s == Rational(1));
}

TEST_CASE("ordering") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(0));
    CHECK(Rational(2, 6) <= Rational(1, 3));
    CHECK(Rational(5, 4) > Rational(1));
    CHECK(Rational(1, 2).sign() == 1);
    CHECK(Rational(0).is_zero());
}

TEST_CASE("rational vectors and matrices multiply exactly") {
    dichotomy::RationalMatrix m(2, 2);
    m(0, 0) = Rational(1, 2);
    m(0, 1) = Rational(1, 3);
    m(1, 0) = Rational(1, 2);
    m(1, 1) = Rational(2, 3);
    dichotomy::RationalVector v(2);
    v[0] = Rational(3, 5);
    v[1] = Rational(2, 5);
    dichotomy::RationalVector out = m * v;
    CHECK(out[0] == Rational(3, 10) + Rational(2, 15));
    CHECK(out[1] == Rational(3, 10) + Rational(4, 15));
    CHECK(out[0] + out[1] == Rational(1));
}
