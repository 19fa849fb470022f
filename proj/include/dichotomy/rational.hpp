#pragma once

#include <gmpxx.h>

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "dichotomy/error.hpp"

namespace dichotomy {

// Arbitrary-precision rational, always in lowest terms with positive
// denominator. Thin value wrapper over GMP's mpq_class: arithmetic returns
// plain values so the type satisfies Eigen's scalar requirements (gmpxx
// expression templates do not).
class Rational {
public:
    Rational() : v_(0) {}
    Rational(int n) : v_(n) {}    // NOLINT: implicit by design, enables literals
    Rational(long n) : v_(static_cast<signed long>(n)) {}  // NOLINT
    Rational(long n, long d) {
        if (d == 0) throw Error("InvalidRational", "zero denominator");
        v_ = mpq_class(n, d);
        v_.canonicalize();
    }
    explicit Rational(const mpq_class& v) : v_(v) { v_.canonicalize(); }
    explicit Rational(const mpz_class& n) : v_(n) {}

    // Exact conversion: every finite double is a dyadic rational.
    static Rational from_double(double x) {
        Rational r;
        r.v_ = mpq_class(x);
        return r;
    }

    // Parses "num/den" or "num" (base 10).
    static Rational parse(const std::string& s) {
        try {
            mpq_class v(s, 10);
            if (v.get_den() == 0) throw Error("InvalidRational", "zero denominator: " + s);
            v.canonicalize();
            Rational r;
            r.v_ = v;
            return r;
        } catch (const std::invalid_argument&) {
            throw Error("InvalidRational", "not a rational: " + s);
        }
    }

    // Nearest rational with denominator <= max_den within window of x, via
    // continued fractions; nullopt when no convergent lands inside the window.
    static std::optional<Rational> approximate(double x, long max_den, double window);

    mpz_class num() const { return v_.get_num(); }
    mpz_class den() const { return v_.get_den(); }
    double to_double() const { return v_.get_d(); }
    const mpq_class& raw() const { return v_; }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sgn(v_) == 0; }

    std::string str() const {
        if (v_.get_den() == 1) return v_.get_num().get_str();
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    Rational operator-() const { return Rational(mpq_class(-v_)); }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw Error("InvalidRational", "division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ + b.v_)); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ - b.v_)); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.v_ * b.v_)); }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw Error("InvalidRational", "division by zero");
        return Rational(mpq_class(a.v_ / b.v_));
    }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
    friend bool operator!=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) != 0; }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) >= 0; }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    mpq_class v_;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

inline std::optional<Rational> Rational::approximate(double x, long max_den, double window) {
    // Continued-fraction convergents p_k/q_k of x; the first convergent with
    // q <= max_den that lands inside the window wins.
    double rem = x;
    long long p_prev = 0, q_prev = 1;
    long long p_cur = 1, q_cur = 0;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(rem);
        if (fl > 9e17 || fl < -9e17) break;
        long long a = static_cast<long long>(fl);
        if (std::abs(static_cast<double>(a)) * static_cast<double>(q_cur) > 9e17 ||
            std::abs(static_cast<double>(a)) * std::abs(static_cast<double>(p_cur)) > 9e17)
            break;
        long long p_next = a * p_cur + p_prev;
        long long q_next = a * q_cur + q_prev;
        if (q_next > max_den || q_next <= 0) break;
        p_prev = p_cur; q_prev = q_cur;
        p_cur = p_next; q_cur = q_next;
        double approx = static_cast<double>(p_cur) / static_cast<double>(q_cur);
        if (std::abs(approx - x) <= window)
            return Rational(static_cast<long>(p_cur), static_cast<long>(q_cur));
        double frac = rem - fl;
        if (frac <= 0) break;
        rem = 1.0 / frac;
    }
    return std::nullopt;
}

using RationalVector = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;
using RationalMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace dichotomy

namespace Eigen {

template <>
struct NumTraits<dichotomy::Rational> : GenericNumTraits<dichotomy::Rational> {
    typedef dichotomy::Rational Real;
    typedef dichotomy::Rational NonInteger;
    typedef dichotomy::Rational Nested;

    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }

    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 6,
        AddCost = 100,
        MulCost = 100,
    };
};

}  // namespace Eigen
