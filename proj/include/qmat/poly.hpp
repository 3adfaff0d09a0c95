#pragma once

#include <string>
#include <vector>

#include "qmat/rings.hpp"

namespace qmat {

/// Dense univariate polynomial over Z, canonical form: no trailing zero
/// coefficients (the zero polynomial has an empty coefficient vector).
class int_poly {
public:
    int_poly() = default;
    explicit int_poly(big_int c) { coeffs_.push_back(std::move(c)); trim(); }
    explicit int_poly(std::vector<big_int> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

    static int_poly monomial(const big_int& c, std::size_t degree) {
        std::vector<big_int> v(degree + 1, big_int(0));
        v[degree] = c;
        return int_poly(std::move(v));
    }

    const std::vector<big_int>& coeffs() const { return coeffs_; }
    bool zero() const { return coeffs_.empty(); }
    // degree of the zero polynomial is -1 by convention
    long degree() const { return static_cast<long>(coeffs_.size()) - 1; }

    friend int_poly operator+(const int_poly& a, const int_poly& b) {
        std::vector<big_int> r(std::max(a.coeffs_.size(), b.coeffs_.size()), big_int(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) r[i] += a.coeffs_[i];
        for (std::size_t i = 0; i < b.coeffs_.size(); ++i) r[i] += b.coeffs_[i];
        return int_poly(std::move(r));
    }
    friend int_poly operator-(const int_poly& a, const int_poly& b) {
        std::vector<big_int> r(std::max(a.coeffs_.size(), b.coeffs_.size()), big_int(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) r[i] += a.coeffs_[i];
        for (std::size_t i = 0; i < b.coeffs_.size(); ++i) r[i] -= b.coeffs_[i];
        return int_poly(std::move(r));
    }
    friend int_poly operator-(const int_poly& a) {
        std::vector<big_int> r(a.coeffs_.size());
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) r[i] = -a.coeffs_[i];
        return int_poly(std::move(r));
    }
    friend int_poly operator*(const int_poly& a, const int_poly& b) {
        if (a.zero() || b.zero()) return int_poly();
        std::vector<big_int> r(a.coeffs_.size() + b.coeffs_.size() - 1, big_int(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                r[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return int_poly(std::move(r));
    }
    friend bool operator==(const int_poly& a, const int_poly& b) {
        return a.coeffs_ == b.coeffs_;
    }

private:
    void trim() {
        while (!coeffs_.empty() && mpz_sgn(coeffs_.back().get_mpz_t()) == 0)
            coeffs_.pop_back();
    }

    std::vector<big_int> coeffs_;
};

inline bool is_zero(const int_poly& a) { return a.zero(); }
inline int_poly ring_zero(const int_poly&) { return int_poly(); }
inline int_poly ring_one(const int_poly&) { return int_poly(big_int(1)); }

/// Exact division in Z[x]: classic long division where each quotient
/// coefficient must divide exactly and the remainder must vanish.
inline int_poly div_exact(const int_poly& a, const int_poly& b) {
    if (b.zero()) throw division_by_zero("polynomial division by zero");
    if (a.zero()) return int_poly();
    if (a.degree() < b.degree())
        throw inexact_division("divisor degree exceeds dividend degree");
    std::vector<big_int> rem = a.coeffs();
    const auto& d = b.coeffs();
    std::vector<big_int> q(rem.size() - d.size() + 1, big_int(0));
    for (std::size_t k = q.size(); k-- > 0;) {
        const big_int& lead = rem[k + d.size() - 1];
        if (is_zero(lead)) continue;
        q[k] = div_exact(lead, d.back());   // throws inexact_division if not
        for (std::size_t i = 0; i < d.size(); ++i)
            rem[k + i] -= q[k] * d[i];
    }
    for (const auto& c : rem)
        if (!is_zero(c)) throw inexact_division("nonzero polynomial remainder");
    return int_poly(std::move(q));
}

inline std::string to_string(const int_poly& a) {
    if (a.zero()) return "0";
    std::string s;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
        if (i) s += ' ';
        s += a.coeffs()[i].get_str();
    }
    return s;
}

} // namespace qmat
