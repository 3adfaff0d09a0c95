#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>
#include <utility>

#include <gmpxx.h>

#include "qmat/errors.hpp"

// Arithmetic contracts shared by every matrix algorithm in the library.
// All algorithms are generic over a commutative-domain element type; the
// concrete domains are arbitrary-precision integers (GMP), dense integer
// polynomials, residues mod p, reduced rationals, and machine doubles.
//
// Customization is by free-function overload: a new element type needs
// is_zero / ring_zero / ring_one / div_exact (and field_inverse if it is
// a field) visible to unqualified lookup inside namespace qmat.

namespace qmat {

using big_int = mpz_class;
using rational = mpq_class;

// Division exactness is verified by default; define QMAT_UNCHECKED_DIV to
// trade the remainder check for speed once a build is trusted. The A_ext
// recursion guarantees its interior divisions are exact, so a failed check
// there is a correctness alarm, not an input error.
#if !defined(QMAT_UNCHECKED_DIV)
#define QMAT_DIV_EXACT_VERIFY 1
#else
#define QMAT_DIV_EXACT_VERIFY 0
#endif

// ---------------------------------------------------------------------------
// big_int (arbitrary precision integers)
// ---------------------------------------------------------------------------

inline bool is_zero(const big_int& a) { return mpz_sgn(a.get_mpz_t()) == 0; }
inline big_int ring_zero(const big_int&) { return big_int(0); }
inline big_int ring_one(const big_int&) { return big_int(1); }

/// Exact division in Z. Pre: b != 0 and b | a.
inline big_int div_exact(const big_int& a, const big_int& b) {
    if (is_zero(b)) throw division_by_zero("integer division by zero");
#if QMAT_DIV_EXACT_VERIFY
    if (!mpz_divisible_p(a.get_mpz_t(), b.get_mpz_t()))
        throw inexact_division(a.get_str() + " not divisible by " + b.get_str());
#endif
    big_int q;
    mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline std::string to_string(const big_int& a) { return a.get_str(); }

// ---------------------------------------------------------------------------
// rational (always in lowest terms, denominator > 0; mpq keeps it canonical)
// ---------------------------------------------------------------------------

inline bool is_zero(const rational& a) { return mpq_sgn(a.get_mpq_t()) == 0; }
inline rational ring_zero(const rational&) { return rational(0); }
inline rational ring_one(const rational&) { return rational(1); }

inline rational make_rational(const big_int& num, const big_int& den) {
    if (is_zero(den)) throw division_by_zero("rational with zero denominator");
    rational r(num, den);
    r.canonicalize();
    return r;
}

inline rational div_exact(const rational& a, const rational& b) {
    if (is_zero(b)) throw division_by_zero("rational division by zero");
    return rational(a / b);
}

inline rational field_inverse(const rational& a) {
    if (is_zero(a)) throw division_by_zero("inverse of zero");
    return rational(1 / a);
}

inline std::string to_string(const rational& a) { return a.get_str(); }

// ---------------------------------------------------------------------------
// double (machine field; exactness checks do not apply)
// ---------------------------------------------------------------------------

inline bool is_zero(double a) { return a == 0.0; }
inline double ring_zero(double) { return 0.0; }
inline double ring_one(double) { return 1.0; }

inline double div_exact(double a, double b) {
    if (b == 0.0) throw division_by_zero("division by zero");
    return a / b;
}

inline double field_inverse(double a) {
    if (a == 0.0) throw division_by_zero("inverse of zero");
    return 1.0 / a;
}

// ---------------------------------------------------------------------------
// square roots and sign tests (Cholesky pivots)
// ---------------------------------------------------------------------------

inline bool is_positive(const rational& a) { return mpq_sgn(a.get_mpq_t()) > 0; }
inline bool is_positive(double a) { return a > 0.0; }
inline bool is_positive(const big_int& a) { return mpz_sgn(a.get_mpz_t()) > 0; }

/// Exact square root of a positive rational; the decomposition over Q only
/// exists when every recursive pivot is a perfect square.
inline rational exact_sqrt(const rational& a) {
    if (!is_positive(a)) throw not_positive_definite("square root of non-positive value");
    big_int num = a.get_num(), den = a.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
        throw irrational_pivot("pivot " + to_string(a) + " is not a rational square");
    big_int rn, rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    return make_rational(rn, rd);
}

inline double exact_sqrt(double a) {
    if (!(a > 0.0)) throw not_positive_definite("square root of non-positive value");
    return std::sqrt(a);
}

// ---------------------------------------------------------------------------
// concepts
// ---------------------------------------------------------------------------

template <typename R>
concept ring_element = requires(const R& a, const R& b) {
    { a + b } -> std::convertible_to<R>;
    { a - b } -> std::convertible_to<R>;
    { a * b } -> std::convertible_to<R>;
    { -a } -> std::convertible_to<R>;
    { a == b } -> std::convertible_to<bool>;
    { is_zero(a) } -> std::convertible_to<bool>;
    { ring_zero(a) } -> std::convertible_to<R>;
    { ring_one(a) } -> std::convertible_to<R>;
    { div_exact(a, b) } -> std::convertible_to<R>;
};

template <typename F>
concept field_element = ring_element<F> && requires(const F& a) {
    { field_inverse(a) } -> std::convertible_to<F>;
};

/// Ordered field with (possibly partial) square roots -- what Cholesky needs.
template <typename F>
concept sqrt_field = field_element<F> && requires(const F& a) {
    { is_positive(a) } -> std::convertible_to<bool>;
    { exact_sqrt(a) } -> std::convertible_to<F>;
};

} // namespace qmat
