#pragma once

#include <numeric>
#include <string>

#include "bt/orders.hpp"

namespace bt {

// ---------------------------------------------------------------------------
// Exact rationals (formula outputs are never rounded)
// ---------------------------------------------------------------------------

struct Rat {
    i64 num = 0;
    i64 den = 1;

    Rat() = default;
    Rat(i64 n) : num(n), den(1) {}
    Rat(i64 n, i64 d) : num(n), den(d) { reduce(); }

    void reduce() {
        if (den == 0) throw DivisionByZero("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        i64 g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }

    bool is_integer() const { return den == 1; }
    Rat operator+(const Rat& o) const { return Rat(num * o.den + o.num * den, den * o.den); }
    Rat operator-(const Rat& o) const { return Rat(num * o.den - o.num * den, den * o.den); }
    Rat operator*(const Rat& o) const { return Rat(num * o.num, den * o.den); }
    bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rat& o) const { return !(*this == o); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

/// The quadruple (e1,e2,e3,e4) with method metadata. Entries are exact
/// rationals; integrality flags mark entries a formula produced as
/// non-integers (the raw value is retained, never rounded).
struct EVector {
    Rat e[4];
    bool flag[4] = {false, false, false, false};
    std::string method;
    bool no_embedding = false; // the (0,0,0,0) sentinel, with a reason
    std::string reason;

    static EVector ints(i64 a, i64 b, i64 c, i64 d, const std::string& method) {
        EVector v;
        v.e[0] = a;
        v.e[1] = b;
        v.e[2] = c;
        v.e[3] = d;
        v.method = method;
        return v;
    }

    void set(int i, const Rat& r) {
        e[i] = r;
        flag[i] = !r.is_integer();
    }
    bool any_flag() const { return flag[0] || flag[1] || flag[2] || flag[3]; }
    bool integral_equal(const EVector& o) const {
        for (int i = 0; i < 4; ++i)
            if (e[i] != o.e[i]) return false;
        return true;
    }
    std::string str() const {
        std::string s = "(";
        for (int i = 0; i < 4; ++i) s += e[i].str() + (i < 3 ? "," : ")");
        return s;
    }
};

// ---------------------------------------------------------------------------
// chi(r, u, t) and Table 1
// ---------------------------------------------------------------------------

enum class U0Convention { one, two, automatic };

/// Cardinality of { a in (O/pi^(t-r+2u))^* : a^2 = 1, |a - 1| = |pi|^(t-r+u) },
/// by direct enumeration of residue units. At u = 0 the condition is empty of
/// content and the value is fixed by convention (the paper sets 1; see the
/// u0 discussion in the README).
inline i64 chi(i64 p, i64 r, i64 u, i64 t, U0Convention conv = U0Convention::one) {
    i64 v = std::max<i64>(0, r - t);
    if (u < v || 2 * u > r) throw DomainViolation("chi: u outside [max(0,r-t), r/2]");
    i64 me = t - r + 2 * u;
    if (me < 0) throw DomainViolation("chi: negative modulus exponent");
    if (u == 0) return conv == U0Convention::two ? 2 : 1;
    i64 target = t - r + u; // exact valuation of a - 1
    i64 count = 0;
    u64 mod = detail::pow_u64(p, me);
    for (u64 a : residue_units(p, me).elements()) {
        if (detail::mulmod(a, a, mod) != 1 % mod) continue;
        u64 d = (a + mod - 1) % mod;
        if (d == 0) continue; // v(a-1) >= modulus exponent, never == target < me
        if (detail::val_of_u64(d, p) == target) ++count;
    }
    return count;
}

/// One row of Table 1: the regime (by r against 2t) with its n, n' and the
/// chi-components. n' is kept rational: the r > 2t row degenerates at t = 0.
struct Table1Row {
    enum class Regime { odd_lt, even_lt, eq, gt } regime;
    Rat n, np;
    Rat chi2, chi3, chi4;
};

inline Table1Row table1_row(i64 p, i64 r, i64 t, U0Convention conv) {
    if (r <= 0) throw DomainViolation("table1_row: needs r > 0");
    Table1Row row;
    auto ppow = [&](i64 e) { // p^e as an exact rational (e may be negative)
        if (e >= 0) return Rat(i64(detail::pow_u64(p, e)));
        return Rat(1, i64(detail::pow_u64(p, -e)));
    };
    i64 v = std::max<i64>(0, r - t);
    auto chi_sum = [&](i64 hi) {
        Rat s(0);
        for (i64 u = v; u <= hi; ++u) s = s + Rat(chi(p, r, u, t, conv));
        return s;
    };
    if (r < 2 * t && r % 2 == 1) {
        i64 h = (r - 1) / 2;
        row.regime = Table1Row::Regime::odd_lt;
        row.n = ppow(h);
        row.np = Rat(0);
        row.chi2 = Rat(0);
        row.chi3 = chi_sum(h);
        row.chi4 = row.chi3 * Rat(1, 2);
    } else if (r < 2 * t) {
        i64 h = r / 2;
        row.regime = Table1Row::Regime::even_lt;
        row.n = ppow(h);
        row.np = Rat(p - 1) * ppow(h - 1);
        row.chi2 = Rat(chi(p, r, h, t, conv));
        row.chi3 = chi_sum(h);
        row.chi4 = (row.chi2 + row.chi3) * Rat(1, 2);
    } else if (r == 2 * t) {
        row.regime = Table1Row::Regime::eq;
        row.n = ppow(t);
        row.np = Rat(p - 2) * ppow(t - 1);
        row.chi2 = Rat(chi(p, r, t, t, conv));
        row.chi3 = row.chi2;
        row.chi4 = row.chi2;
    } else {
        row.regime = Table1Row::Regime::gt;
        row.n = Rat(2) * ppow(t);
        row.np = Rat(2) * Rat(p - 1) * ppow(t - 1);
        row.chi2 = Rat(0);
        row.chi3 = Rat(0);
        row.chi4 = Rat(0);
    }
    return row;
}

// ---------------------------------------------------------------------------
// Closed formulas (Theorems 1.2, 1.3, 1.4)
// ---------------------------------------------------------------------------

namespace detail {

inline EVector evector_nilpotent_formula(i64 p, i64 r) {
    EVector v;
    v.method = "formula";
    i64 pr2 = i64(pow_u64(p, r / 2));
    i64 pr12 = r >= 1 ? i64(pow_u64(p, (r - 1) / 2)) : 0;
    Rat e1 = (r == 0) ? Rat(1) : Rat(pr2 + pr12);
    // e2 = p^(r/2) if r even and 2 = 0 mod pi^(r/2), else e1/2
    bool cond = (r % 2 == 0) && (PAdic::from_int(p, 2, 4).val() >= r / 2);
    Rat e2 = cond ? Rat(pr2) : e1 * Rat(1, 2);
    v.set(0, e1);
    v.set(1, e2);
    v.set(2, Rat(r + 1));
    v.set(3, Rat((r + 2) / 2));
    return v;
}

inline EVector evector_triangular_formula(i64 p, i64 r, i64 t) {
    EVector v;
    v.method = "formula";
    if (r < 2 * t) {
        v.no_embedding = true;
        v.reason = "no optimal embedding: r < 2t";
        return v;
    }
    if (t == 0) {
        if (r == 0) return EVector::ints(1, 1, 1, 1, "formula");
        return EVector::ints(2, 1, 2, 1, "formula");
    }
    i64 base = (p - 1) * i64(pow_u64(p, 2 * t - 1));
    if (r == 2 * t) {
        v.set(0, Rat(base));
        v.set(1, Rat(base, 2));
        v.set(2, Rat(1));
        v.set(3, Rat(1));
    } else {
        v.set(0, Rat(2 * base));
        v.set(1, Rat(base));
        v.set(2, Rat(2));
        v.set(3, Rat(1));
    }
    return v;
}

inline EVector evector_split_formula(i64 p, i64 r, i64 t, U0Convention conv) {
    if (r == 0) return EVector::ints(1, 1, 1, 1, "formula");
    Table1Row row = table1_row(p, r, t, conv);
    EVector v;
    v.method = "formula";
    Rat half(1, 2);
    Rat chiv[4] = {Rat(0), row.chi2, row.chi3, row.chi4};
    Rat base[4] = {Rat(2), Rat(1), Rat(1), half};
    Rat sub[4] = {Rat(1), half, half, Rat(0)};
    for (int i = 0; i < 4; ++i) v.set(i, row.n * base[i] - row.np * sub[i] + half * chiv[i]);
    return v;
}

} // namespace detail

/// Closed-formula embedding numbers for the three proper sub-kinds. The
/// automatic u0 convention resolves per cell by integrality (the companion
/// oracle is the arbiter in crosscheck).
inline EVector evector_formula(const OrderSpec& spec, i64 r, U0Convention conv = U0Convention::one) {
    switch (spec.kind) {
        case OrderKind::Nilpotent:
            return detail::evector_nilpotent_formula(spec.p, r);
        case OrderKind::Triangular:
            return detail::evector_triangular_formula(spec.p, r, spec.t);
        case OrderKind::SplitCommutative: {
            if (conv != U0Convention::automatic) return detail::evector_split_formula(spec.p, r, spec.t, conv);
            EVector one = detail::evector_split_formula(spec.p, r, spec.t, U0Convention::one);
            if (!one.any_flag()) return one;
            EVector two = detail::evector_split_formula(spec.p, r, spec.t, U0Convention::two);
            if (!two.any_flag()) {
                two.method = "formula(u0=two)";
                return two;
            }
            return one;
        }
        default:
            throw UnsupportedKind("evector_formula: kind must be nilpotent, split, or triangular");
    }
}

} // namespace bt
