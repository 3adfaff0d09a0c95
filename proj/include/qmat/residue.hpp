#pragma once

#include <cstdint>

#include "qmat/rings.hpp"

namespace qmat {

/// Element of Z/p for an odd prime p < 2^62. Each value carries its modulus
/// so matrices of residues can be moved freely between workers; arithmetic
/// between different moduli is a programming error.
class residue_mod_p {
public:
    residue_mod_p() : v_(0), p_(0) {}
    residue_mod_p(std::uint64_t value, std::uint64_t p) : v_(value % p), p_(p) {}

    static residue_mod_p zero(std::uint64_t p) { return residue_mod_p(0, p); }

    std::uint64_t value() const { return v_; }
    std::uint64_t modulus() const { return p_; }

    friend residue_mod_p operator+(const residue_mod_p& a, const residue_mod_p& b) {
        std::uint64_t p = a.common(b);
        std::uint64_t s = a.v_ + b.v_;   // p < 2^62, no overflow
        if (s >= p) s -= p;
        return residue_mod_p(s, p, raw_tag{});
    }
    friend residue_mod_p operator-(const residue_mod_p& a, const residue_mod_p& b) {
        std::uint64_t p = a.common(b);
        return residue_mod_p(a.v_ >= b.v_ ? a.v_ - b.v_ : a.v_ + p - b.v_, p, raw_tag{});
    }
    friend residue_mod_p operator*(const residue_mod_p& a, const residue_mod_p& b) {
        std::uint64_t p = a.common(b);
        if (p == 0) return residue_mod_p();   // both are modulus-less zeros
        auto prod = static_cast<unsigned __int128>(a.v_) * b.v_;
        return residue_mod_p(static_cast<std::uint64_t>(prod % p), p, raw_tag{});
    }
    friend residue_mod_p operator-(const residue_mod_p& a) {
        return residue_mod_p(a.v_ == 0 ? 0 : a.p_ - a.v_, a.p_, raw_tag{});
    }
    friend bool operator==(const residue_mod_p& a, const residue_mod_p& b) {
        return a.v_ == b.v_ && (a.v_ == 0 || a.p_ == b.p_);
    }

private:
    struct raw_tag {};
    residue_mod_p(std::uint64_t v, std::uint64_t p, raw_tag) : v_(v), p_(p) {}

    // A default-constructed zero has no modulus yet; adopt the other side's.
    std::uint64_t common(const residue_mod_p& b) const {
        if (p_ == 0) return b.p_;
        if (b.p_ != 0 && b.p_ != p_) throw invalid_spec("mixed residue moduli");
        return p_;
    }

    std::uint64_t v_;
    std::uint64_t p_;
};

inline bool is_zero(const residue_mod_p& a) { return a.value() == 0; }
inline residue_mod_p ring_zero(const residue_mod_p& like) {
    return residue_mod_p::zero(like.modulus());
}
inline residue_mod_p ring_one(const residue_mod_p& like) {
    return residue_mod_p(1, like.modulus());
}

inline residue_mod_p field_inverse(const residue_mod_p& a) {
    if (a.value() == 0) throw division_by_zero("inverse of zero residue");
    // extended Euclid; p < 2^62 keeps everything in int64 range
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(a.modulus());
    std::int64_t new_r = static_cast<std::int64_t>(a.value());
    while (new_r != 0) {
        std::int64_t q = r / new_r;
        t -= q * new_t; std::swap(t, new_t);
        r -= q * new_r; std::swap(r, new_r);
    }
    if (t < 0) t += static_cast<std::int64_t>(a.modulus());
    return residue_mod_p(static_cast<std::uint64_t>(t), a.modulus());
}

/// In Z/p every division by a nonzero element is exact. A zero divisor here
/// is the "unlucky prime" signal the CRT driver watches for.
inline residue_mod_p div_exact(const residue_mod_p& a, const residue_mod_p& b) {
    return a * field_inverse(b);
}

/// Canonical representative of a mod p in [0, p).
inline residue_mod_p reduce_mod(const big_int& a, std::uint64_t p) {
    big_int r = a % big_int(static_cast<unsigned long>(p));
    if (mpz_sgn(r.get_mpz_t()) < 0) r += big_int(static_cast<unsigned long>(p));
    return residue_mod_p(r.get_ui(), p);
}

inline std::string to_string(const residue_mod_p& a) { return std::to_string(a.value()); }

} // namespace qmat
