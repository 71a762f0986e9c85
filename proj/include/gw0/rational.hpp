#pragma once

#include <Eigen/Core>
#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace gw0 {

// Exact arbitrary-precision rational scalar. Always canonical:
// lowest terms, denominator > 0 (mpq_class guarantees this after
// canonicalize(), which every constructor path below performs).
using Rational = mpq_class;

struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw precondition_error("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Parses "p/q" or "p" with optional leading '-'. Throws io_error on
// malformed input or zero denominator.
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw io_error("empty rational literal");
    for (char c : s)
        if (!(c == '-' || c == '/' || (c >= '0' && c <= '9')))
            throw io_error("bad rational literal: " + s);
    mpq_class r;
    if (r.set_str(s, 10) != 0) throw io_error("bad rational literal: " + s);
    if (r.get_den() == 0) throw io_error("zero denominator: " + s);
    r.canonicalize();
    return r;
}

// Canonical form used across all JSON files: always "p/q", q >= 1.
inline std::string format_rational(const Rational& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

// Generalized binomial coefficient C(e, j) for integer e (either sign)
// and j >= 0; exact.
inline Rational binomial(long e, long j) {
    if (j < 0) return Rational(0);
    Rational acc(1);
    for (long i = 0; i < j; ++i) {
        acc *= Rational(e - i);
        acc /= Rational(i + 1);
    }
    return acc;
}

} // namespace gw0

namespace Eigen {

template <> struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
    typedef mpq_class Real;
    typedef mpq_class NonInteger;
    typedef mpq_class Nested;
    typedef mpq_class Literal;

    static inline Real epsilon() { return Real(0); }
    static inline Real dummy_precision() { return Real(0); }
    static inline int digits10() { return 0; }

    enum {
        IsInteger = 0,
        IsSigned = 1,
        IsComplex = 0,
        RequireInitialization = 1,
        ReadCost = 6,
        AddCost = 150,
        MulCost = 100
    };
};

} // namespace Eigen
