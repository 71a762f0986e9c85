#pragma once

#include "gw0/rational.hpp"

#include <iosfwd>
#include <ostream>

namespace gw0 {

// Rational dual numbers a + b*eps with eps^2 = 0. Scalar extension used
// to take exact first-order derivatives through any series pipeline:
// run the computation over Dual and read off the eps part.
struct Dual {
    Rational a; // value part
    Rational b; // eps part

    Dual() : a(0), b(0) {}
    Dual(const Rational& value) : a(value), b(0) {}
    Dual(long value) : a(value), b(0) {}
    Dual(int value) : a(value), b(0) {}
    Dual(const Rational& value, const Rational& eps) : a(value), b(eps) {}

    static Dual eps(const Rational& coeff) { return Dual(Rational(0), coeff); }

    friend Dual operator+(const Dual& x, const Dual& y) { return {x.a + y.a, x.b + y.b}; }
    friend Dual operator-(const Dual& x, const Dual& y) { return {x.a - y.a, x.b - y.b}; }
    friend Dual operator-(const Dual& x) { return {-x.a, -x.b}; }
    friend Dual operator*(const Dual& x, const Dual& y) {
        return {x.a * y.a, x.a * y.b + x.b * y.a};
    }
    // Division only by scalars with invertible value part; that is all
    // the series engine ever needs (factorials, rational constants).
    friend Dual operator/(const Dual& x, const Dual& y) {
        if (y.b != 0) throw precondition_error("dual division by non-scalar");
        if (y.a == 0) throw precondition_error("dual division by zero");
        return {x.a / y.a, x.b / y.a};
    }

    Dual& operator+=(const Dual& y) { a += y.a; b += y.b; return *this; }
    Dual& operator-=(const Dual& y) { a -= y.a; b -= y.b; return *this; }
    Dual& operator*=(const Dual& y) { *this = *this * y; return *this; }
    Dual& operator/=(const Dual& y) { *this = *this / y; return *this; }

    friend bool operator==(const Dual& x, const Dual& y) { return x.a == y.a && x.b == y.b; }
    friend bool operator!=(const Dual& x, const Dual& y) { return !(x == y); }

    friend std::ostream& operator<<(std::ostream& os, const Dual& x) {
        return os << x.a << "+" << x.b << "e";
    }
};

inline bool is_zero(const Rational& x) { return x == 0; }
inline bool is_zero(const Dual& x) { return x.a == 0 && x.b == 0; }

// Scalar conversions between the coefficient rings.
template <class K> inline K scalar_from_rational(const Rational& r);
template <> inline Rational scalar_from_rational<Rational>(const Rational& r) { return r; }
template <> inline Dual scalar_from_rational<Dual>(const Rational& r) { return Dual(r); }

} // namespace gw0

namespace Eigen {

template <> struct NumTraits<gw0::Dual> : GenericNumTraits<gw0::Dual> {
    typedef gw0::Dual Real;
    typedef gw0::Dual NonInteger;
    typedef gw0::Dual Nested;
    typedef gw0::Dual Literal;

    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }

    enum {
        IsInteger = 0,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 1,
        ReadCost = 12,
        AddCost = 300,
        MulCost = 400
    };
};

} // namespace Eigen
