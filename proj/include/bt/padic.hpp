#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bt/errors.hpp"

namespace bt {

using i64 = long long;
using u64 = unsigned long long;
using i128 = __int128;
using u128 = unsigned __int128;

/// Valuation of an exact zero.
inline constexpr i64 kInfValuation = std::numeric_limits<i64>::max() / 4;

namespace detail {

/// Largest N with p^N < 2^62 (so unit residues and their sums fit in u64).
inline int max_digits(i64 p) {
    int n = 0;
    u64 acc = 1;
    const u64 cap = (u64(1) << 62);
    while (acc < cap / u64(p)) {
        acc *= u64(p);
        ++n;
    }
    return n;
}

inline u64 pow_u64(i64 p, i64 e) {
    if (e < 0) throw DomainViolation("pow_u64: negative exponent");
    u64 acc = 1;
    for (i64 i = 0; i < e; ++i) {
        if (acc > (u64(1) << 62) / u64(p)) throw DomainViolation("pow_u64: overflow, precision too large");
        acc *= u64(p);
    }
    return acc;
}

inline u64 mulmod(u64 a, u64 b, u64 m) { return u64((u128(a) * b) % m); }

inline u64 submod(u64 a, u64 b, u64 m) { return (a >= b) ? a - b : a + (m - b); }

/// Extended-Euclid inverse of a modulo m, gcd(a, m) = 1 required.
inline u64 invmod(u64 a, u64 m) {
    i64 t = 0, newt = 1;
    i64 r = i64(m), newr = i64(a % m);
    while (newr != 0) {
        i64 q = r / newr;
        i64 tmp = t - q * newt;
        t = newt;
        newt = tmp;
        tmp = r - q * newr;
        r = newr;
        newr = tmp;
    }
    if (r != 1) throw DomainViolation("invmod: not invertible");
    if (t < 0) t += i64(m);
    return u64(t);
}

inline int val_of_u64(u64 t, i64 p) {
    int v = 0;
    while (t % u64(p) == 0) {
        t /= u64(p);
        ++v;
    }
    return v;
}

inline bool is_prime_i64(i64 p) {
    if (p < 2) return false;
    for (i64 d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

} // namespace detail

/**
 * An element of Q_p at tracked finite precision: valuation plus a unit
 * residue modulo p^N. A value represents the exact rational u * p^v (the
 * canonical lift of its unit residue); arithmetic is exact on these
 * representatives, while N records how many base-p digits of the result are
 * guaranteed to agree with an untruncated computation. Multiplication and
 * division preserve N; addition of terms with equal valuation can cancel
 * leading digits and shrinks N accordingly. |x| is never materialized as a
 * float: valuation comparisons carry all metric content.
 */
class PAdic {
public:
    PAdic() : p_(2), v_(kInfValuation), u_(0), prec_(1) {}

    static PAdic zero(i64 p, int prec = 1) {
        check_prime(p);
        PAdic x;
        x.p_ = p;
        x.v_ = kInfValuation;
        x.u_ = 0;
        x.prec_ = prec;
        return x;
    }

    /// Raw (valuation, unit) constructor; reduces unit into [1, p^prec).
    static PAdic from_unit(i64 p, i64 v, i64 unit, int prec) {
        check_prime(p);
        if (prec < 1) throw DomainViolation("precision must be >= 1");
        if (prec > detail::max_digits(p)) throw DomainViolation("precision too large for 64-bit units");
        const u64 m = detail::pow_u64(p, prec);
        i64 r = unit % i64(m);
        if (r < 0) r += i64(m);
        if (r == 0) throw DomainViolation("from_unit: unit reduces to 0");
        if (r % p == 0) throw DomainViolation("from_unit: unit not coprime to p");
        PAdic x;
        x.p_ = p;
        x.v_ = v;
        x.u_ = u64(r);
        x.prec_ = prec;
        return x;
    }

    static PAdic from_int(i64 p, i64 value, int prec) {
        return from_rational(p, value, 1, prec);
    }

    /// Canonical (valuation, unit mod p^N) form of num/den; exact at the given
    /// precision. Zero numerator yields the exact zero (valuation INFINITE).
    static PAdic from_rational(i64 p, i64 num, i64 den, int prec) {
        check_prime(p);
        if (den == 0) throw DivisionByZero("from_rational: zero denominator");
        if (prec < 1) throw DomainViolation("precision must be >= 1");
        if (prec > detail::max_digits(p)) throw DomainViolation("precision too large for 64-bit units");
        if (num == 0) return zero(p, prec);
        i64 v = 0;
        bool neg = false;
        if (num < 0) { neg = !neg; num = -num; }
        if (den < 0) { neg = !neg; den = -den; }
        while (num % p == 0) { num /= p; ++v; }
        while (den % p == 0) { den /= p; --v; }
        const u64 m = detail::pow_u64(p, prec);
        u64 un = u64(num % i64(m));
        u64 ud = detail::invmod(u64(den % i64(m)), m);
        u64 u = detail::mulmod(un, ud, m);
        if (neg) u = m - u;
        PAdic x;
        x.p_ = p;
        x.v_ = v;
        x.u_ = u;
        x.prec_ = prec;
        return x;
    }

    i64 prime() const { return p_; }
    bool is_zero() const { return v_ == kInfValuation; }
    i64 val() const { return v_; }
    u64 unit() const { return u_; }
    int precision() const { return prec_; }
    bool is_integral() const { return is_zero() || v_ >= 0; }
    bool is_unit_elt() const { return !is_zero() && v_ == 0; }

    /// First k unit digits; k must not exceed the stored precision.
    u64 unit_mod(int k) const {
        if (is_zero()) return 0;
        if (k > prec_) throw PrecisionExhausted("unit_mod: requested digits beyond stored precision");
        return u_ % detail::pow_u64(p_, k);
    }

    /// Value modulo p^m as an integer in [0, p^m). Needs v >= 0 and v+N >= m.
    u64 residue_mod(i64 m) const {
        if (m < 0) throw DomainViolation("residue_mod: negative modulus exponent");
        if (is_zero()) return 0;
        if (v_ < 0) throw DomainViolation("residue_mod: value not integral");
        if (v_ >= m) return 0;
        if (v_ + prec_ < m) throw PrecisionExhausted("residue_mod: value known to fewer digits than requested");
        u64 mm = detail::pow_u64(p_, m);
        return detail::mulmod(u_ % detail::pow_u64(p_, int(m - v_)), detail::pow_u64(p_, v_), mm);
    }

    PAdic truncated(int k) const {
        if (k < 1) throw DomainViolation("truncated: precision must be >= 1");
        if (is_zero()) return zero(p_, k);
        if (k > prec_) throw PrecisionExhausted("truncated: cannot extend precision");
        PAdic x = *this;
        x.prec_ = k;
        x.u_ = u_ % detail::pow_u64(p_, k);
        return x;
    }

    PAdic shifted(i64 k) const { // multiply by p^k
        if (is_zero()) return *this;
        PAdic x = *this;
        x.v_ += k;
        return x;
    }

    PAdic neg() const {
        if (is_zero()) return *this;
        PAdic x = *this;
        x.u_ = detail::pow_u64(p_, prec_) - u_;
        return x;
    }

    PAdic mul(const PAdic& o) const {
        same_prime(o);
        if (is_zero() || o.is_zero()) return zero(p_, std::min(prec_, o.prec_));
        int k = std::min(prec_, o.prec_);
        u64 m = detail::pow_u64(p_, k);
        PAdic x;
        x.p_ = p_;
        x.v_ = v_ + o.v_;
        x.u_ = detail::mulmod(u_ % m, o.u_ % m, m);
        x.prec_ = k;
        return x;
    }

    PAdic inv() const {
        if (is_zero()) throw DivisionByZero("inv of zero");
        PAdic x = *this;
        x.v_ = -v_;
        x.u_ = detail::invmod(u_, detail::pow_u64(p_, prec_));
        return x;
    }

    PAdic div(const PAdic& o) const {
        same_prime(o);
        if (o.is_zero()) throw DivisionByZero();
        return mul(o.inv());
    }

    PAdic add(const PAdic& o) const {
        same_prime(o);
        if (is_zero()) return o;
        if (o.is_zero()) return *this;
        const i64 m = std::min(v_, o.v_);
        const i64 window_end = std::min(v_ + prec_, o.v_ + o.prec_);
        const i64 W = window_end - m;
        if (W <= 0) throw PrecisionExhausted("add: no overlapping digit window");
        // W <= max(N, N') <= max_digits(p), so the window always fits in u64.
        const u64 mm = detail::pow_u64(p_, int(W));
        u64 ta = (v_ - m >= W) ? 0 : detail::mulmod(u_ % mm, detail::pow_u64(p_, v_ - m), mm);
        u64 tb = (o.v_ - m >= W) ? 0 : detail::mulmod(o.u_ % mm, detail::pow_u64(p_, o.v_ - m), mm);
        u64 t = (ta + tb) % mm;
        if (t == 0) return zero(p_, std::min(prec_, o.prec_)); // representatives cancel exactly
        int e = detail::val_of_u64(t, p_);
        PAdic x;
        x.p_ = p_;
        x.v_ = m + e;
        x.u_ = t / detail::pow_u64(p_, e);
        x.prec_ = int(W - e);
        return x;
    }

    PAdic sub(const PAdic& o) const { return add(o.neg()); }

    /// Equality at the joint precision: same valuation, units agree mod p^min(N,N').
    bool operator==(const PAdic& o) const {
        if (p_ != o.p_) return false;
        if (is_zero() || o.is_zero()) return is_zero() && o.is_zero();
        if (v_ != o.v_) return false;
        int k = std::min(prec_, o.prec_);
        u64 m = detail::pow_u64(p_, k);
        return u_ % m == o.u_ % m;
    }
    bool operator!=(const PAdic& o) const { return !(*this == o); }

    std::string str() const {
        if (is_zero()) return "0";
        std::string s = std::to_string(u_);
        if (v_ != 0) s += "*" + std::to_string(p_) + "^" + std::to_string(v_);
        s += " + O(" + std::to_string(p_) + "^" + std::to_string(v_ + prec_) + ")";
        return s;
    }

private:
    static void check_prime(i64 p) {
        if (!detail::is_prime_i64(p)) throw DomainViolation("p must be prime");
    }
    void same_prime(const PAdic& o) const {
        if (p_ != o.p_) throw DomainViolation("mixed primes");
    }

    i64 p_;
    i64 v_;
    u64 u_;
    int prec_;
};

inline PAdic operator+(const PAdic& a, const PAdic& b) { return a.add(b); }
inline PAdic operator-(const PAdic& a, const PAdic& b) { return a.sub(b); }
inline PAdic operator*(const PAdic& a, const PAdic& b) { return a.mul(b); }
inline PAdic operator/(const PAdic& a, const PAdic& b) { return a.div(b); }
inline PAdic operator-(const PAdic& a) { return a.neg(); }

/// Valuation with the INFINITE convention for zero.
inline i64 valuation_of(const PAdic& a) { return a.val(); }

enum class FieldOp { add, sub, mul, div };

inline PAdic field_ops(const PAdic& a, const PAdic& b, FieldOp op) {
    switch (op) {
        case FieldOp::add: return a.add(b);
        case FieldOp::sub: return a.sub(b);
        case FieldOp::mul: return a.mul(b);
        case FieldOp::div: return a.div(b);
    }
    throw DomainViolation("unknown op");
}

/// The unit group of Z/p^m as an explicit finite set; m = 0 is the trivial
/// ring (single element), the u = 0 convention domain of the chi count.
struct ResidueUnitSet {
    i64 p;
    i64 m;

    ResidueUnitSet(i64 p_, i64 m_) : p(p_), m(m_) {
        if (m < 0) throw DomainViolation("modulus exponent must be >= 0");
    }

    u64 cardinality() const {
        if (m == 0) return 1;
        return detail::pow_u64(p, m) - detail::pow_u64(p, m - 1);
    }

    std::vector<u64> elements() const {
        std::vector<u64> out;
        if (m == 0) {
            out.push_back(0); // the single element of the trivial ring
            return out;
        }
        u64 mod = detail::pow_u64(p, m);
        for (u64 a = 1; a < mod; ++a)
            if (a % u64(p) != 0) out.push_back(a);
        return out;
    }
};

inline ResidueUnitSet residue_units(i64 p, i64 m) { return ResidueUnitSet(p, m); }

} // namespace bt
