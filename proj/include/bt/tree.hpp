#pragma once

#include <array>
#include <functional>
#include <initializer_list>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "bt/padic.hpp"

namespace bt {

inline constexpr i64 kNegInfLevel = -(std::numeric_limits<i64>::max() / 4);

// ---------------------------------------------------------------------------
// 2x2 linear algebra over Q_p
// ---------------------------------------------------------------------------

struct Vec2 {
    PAdic x, y;
};

struct Mat2 {
    PAdic a, b, c, d; // [[a, b], [c, d]]

    Mat2 mul(const Mat2& o) const {
        return Mat2{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Vec2 apply(const Vec2& v) const { return Vec2{a * v.x + b * v.y, c * v.x + d * v.y}; }
    PAdic det() const { return a * d - b * c; }
    PAdic trace() const { return a + d; }
    Mat2 adjugate() const { return Mat2{d, -b, -c, a}; }
    Mat2 scaled(const PAdic& s) const { return Mat2{a * s, b * s, c * s, d * s}; }
    Mat2 add(const Mat2& o) const { return Mat2{a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 sub(const Mat2& o) const { return Mat2{a - o.a, b - o.b, c - o.c, d - o.d}; }
    bool is_zero() const { return a.is_zero() && b.is_zero() && c.is_zero() && d.is_zero(); }

    /// min valuation over entries (kInfValuation for the zero matrix).
    i64 min_val() const {
        i64 m = kInfValuation;
        for (const PAdic* e : {&a, &b, &c, &d}) m = std::min(m, e->val());
        return m;
    }

    static Mat2 identity(i64 p, int prec) {
        PAdic one = PAdic::from_int(p, 1, prec);
        PAdic z = PAdic::zero(p, prec);
        return Mat2{one, z, z, one};
    }
    static Mat2 from_ints(i64 p, i64 a, i64 b, i64 c, i64 d, int prec) {
        return Mat2{PAdic::from_int(p, a, prec), PAdic::from_int(p, b, prec),
                    PAdic::from_int(p, c, prec), PAdic::from_int(p, d, prec)};
    }
};

// ---------------------------------------------------------------------------
// Ball / vertex
// ---------------------------------------------------------------------------

/**
 * A ball B_z^[n] = z + p^n O_k, canonically reduced: the stored center keeps
 * exactly the digits of z below position n (an exact rational cu * p^cv), so
 * two balls are equal iff their reduced data agree. Radius is rho(pi)^n:
 * smaller n means a bigger ball. These are the vertices of the tree.
 */
struct Ball {
    i64 p = 2;
    i64 n = 0;      // level (radius exponent)
    bool cz = true; // center == 0 mod p^n
    i64 cv = 0;     // center = cu * p^cv when !cz
    u64 cu = 0;     // in [1, p^(n - cv)), coprime to p

    bool operator==(const Ball& o) const {
        return p == o.p && n == o.n && cz == o.cz && (cz || (cv == o.cv && cu == o.cu));
    }
    bool operator!=(const Ball& o) const { return !(*this == o); }
    bool operator<(const Ball& o) const {
        auto key = [](const Ball& b) { return std::tuple<i64, i64, int, i64, u64>(b.p, b.n, b.cz ? 0 : 1, b.cz ? 0 : b.cv, b.cz ? 0 : b.cu); };
        return key(*this) < key(o);
    }

    int center_digits() const { return cz ? 0 : int(n - cv); }

    PAdic center(int prec) const {
        if (cz) return PAdic::zero(p, prec);
        return PAdic::from_unit(p, cv, i64(cu), std::max(prec, center_digits()));
    }

    std::string label() const {
        std::string z;
        if (cz) {
            z = "0";
        } else if (cv >= 0) {
            z = std::to_string(cu * detail::pow_u64(p, cv));
        } else {
            z = std::to_string(cu) + "/" + std::to_string(detail::pow_u64(p, -cv));
        }
        return "B_" + z + "^[" + std::to_string(n) + "]";
    }
};

struct BallHash {
    size_t operator()(const Ball& b) const {
        size_t h = std::hash<i64>()(b.p * 1315423911LL + b.n);
        if (!b.cz) {
            h ^= std::hash<i64>()(b.cv) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= std::hash<u64>()(b.cu) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }
};

/// Reduce (z, n) to the canonical ball; equal inputs mod p^n give identical
/// Balls. Needs the digits of z in [v(z), n), else PrecisionExhausted.
inline Ball canonical_ball(i64 p, const PAdic& z, i64 n) {
    if (z.prime() != p) throw DomainViolation("canonical_ball: prime mismatch");
    Ball b;
    b.p = p;
    b.n = n;
    if (z.is_zero() || z.val() >= n) {
        b.cz = true;
        return b;
    }
    i64 digits = n - z.val();
    if (digits > z.precision()) throw PrecisionExhausted("canonical_ball: center digits beyond stored precision");
    if (digits > detail::max_digits(p)) throw DomainViolation("canonical_ball: too many center digits");
    b.cz = false;
    b.cv = z.val();
    b.cu = z.unit_mod(int(digits));
    if (b.cu == 0) { // all kept digits vanished
        b.cz = true;
        b.cv = 0;
    }
    return b;
}

inline Ball canonical_ball(i64 p, i64 num, i64 den, i64 n) {
    int prec = detail::max_digits(p) - 2;
    return canonical_ball(p, PAdic::from_rational(p, num, den, prec), n);
}

/// Valuation of the difference of two ball centers (exact; kInfValuation if equal).
inline i64 center_meet_val(const Ball& a, const Ball& b) {
    if (a.p != b.p) throw DomainViolation("mixed primes");
    if (a.cz && b.cz) return kInfValuation;
    if (a.cz) return b.cv;
    if (b.cz) return a.cv;
    if (a.cv != b.cv) return std::min(a.cv, b.cv);
    // Same leading valuation: compare exact integer units.
    u64 ua = a.cu, ub = b.cu;
    if (ua == ub) return kInfValuation; // identical stored digit strings
    u64 t = ua > ub ? ua - ub : ub - ua;
    return a.cv + detail::val_of_u64(t, a.p);
}

/// Tree distance between two vertices: |r - s| for nested balls, and
/// d(B,C) + d(C,D) through the smallest common ball otherwise.
inline i64 ball_distance(const Ball& a, const Ball& b) {
    i64 j = center_meet_val(a, b);
    i64 meet = std::min({a.n, b.n, j});
    return (a.n - meet) + (b.n - meet);
}

/// Ancestor of B at level l <= B.n (the ball of that radius containing B).
inline Ball ball_at_level(const Ball& b, i64 l) {
    if (l > b.n) throw DomainViolation("ball_at_level: not an ancestor level");
    Ball r;
    r.p = b.p;
    r.n = l;
    if (b.cz || b.cv >= l) {
        r.cz = true;
        return r;
    }
    r.cz = false;
    r.cv = b.cv;
    r.cu = b.cu % detail::pow_u64(b.p, int(l - b.cv));
    if (r.cu == 0) {
        r.cz = true;
        r.cv = 0;
    }
    return r;
}

inline Ball parent_ball(const Ball& b) { return ball_at_level(b, b.n - 1); }

/// Child with digit j at position n (j in [0, p)).
inline Ball child_ball(const Ball& b, i64 j) {
    if (j < 0 || j >= b.p) throw DomainViolation("child digit out of range");
    Ball r;
    r.p = b.p;
    r.n = b.n + 1;
    if (b.cz) {
        if (j == 0) {
            r.cz = true;
        } else {
            r.cz = false;
            r.cv = b.n;
            r.cu = u64(j);
        }
        return r;
    }
    r.cz = false;
    r.cv = b.cv;
    r.cu = b.cu + u64(j) * detail::pow_u64(b.p, b.center_digits());
    return r;
}

/// The p+1 neighbors: parent B_z^[n-1] plus the p children B_{z+j p^n}^[n+1].
inline std::vector<Ball> neighbors(const Ball& b) {
    std::vector<Ball> out;
    out.reserve(size_t(b.p) + 1);
    out.push_back(parent_ball(b));
    for (i64 j = 0; j < b.p; ++j) out.push_back(child_ball(b, j));
    return out;
}

// ---------------------------------------------------------------------------
// Ends (P_1(k) as ends of the tree)
// ---------------------------------------------------------------------------

/// An end of the tree: infinity (the ascending rays) or a finite point of k
/// carried at working precision. Operations that must separate two finite
/// ends state the modulus they used and raise IndistinguishableEnds past it.
struct End {
    bool inf = false;
    PAdic z;

    static End infinity() {
        End e;
        e.inf = true;
        return e;
    }
    static End at(const PAdic& v) {
        End e;
        e.inf = false;
        e.z = v;
        return e;
    }
    static End of_int(i64 p, i64 v, int prec) { return at(PAdic::from_int(p, v, prec)); }
    static End of_rational(i64 p, i64 num, i64 den, int prec) { return at(PAdic::from_rational(p, num, den, prec)); }

    bool operator==(const End& o) const {
        if (inf || o.inf) return inf == o.inf;
        return z == o.z;
    }
    bool operator!=(const End& o) const { return !(*this == o); }

    std::string label() const { return inf ? "inf" : z.str(); }
};

/// Valuation separating two ends; kNegInfLevel when one is infinity.
/// Equal-to-precision finite ends cannot be separated.
inline i64 end_separation(const End& a, const End& b) {
    if (a.inf && b.inf) throw IndistinguishableEnds("both ends are infinity");
    if (a.inf || b.inf) return kNegInfLevel;
    PAdic d = a.z - b.z;
    if (d.is_zero()) throw IndistinguishableEnds("finite ends equal to stored precision");
    return d.val();
}

inline bool ball_contains_end(const Ball& b, const End& e) {
    if (e.inf) return false;
    PAdic d = e.z - b.center(e.z.precision());
    if (d.is_zero()) return true;
    return d.val() >= b.n;
}

// ---------------------------------------------------------------------------
// Walks
// ---------------------------------------------------------------------------

/// An ordered repetition-free vertex list with consecutive vertices adjacent.
struct Walk {
    std::vector<Ball> v;

    i64 length() const { return i64(v.size()) - 1; }

    bool valid() const {
        for (size_t i = 0; i + 1 < v.size(); ++i)
            if (ball_distance(v[i], v[i + 1]) != 1) return false;
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = i + 1; j < v.size(); ++j)
                if (v[i] == v[j]) return false;
        return true;
    }
};

/// Exact geodesic between two vertices.
inline Walk geodesic(const Ball& a, const Ball& b) {
    if (a == b) throw DomainViolation("geodesic: endpoints equal");
    i64 j = center_meet_val(a, b);
    i64 meet = std::min({a.n, b.n, j});
    Walk w;
    for (i64 l = a.n; l >= meet; --l) w.v.push_back(ball_at_level(a, l));
    for (i64 l = meet + 1; l <= b.n; ++l) w.v.push_back(ball_at_level(b, l));
    return w;
}

/// One step from B toward the end e.
inline Ball step_toward_end(const Ball& b, const End& e) {
    if (e.inf) return parent_ball(b);
    if (!ball_contains_end(b, e)) return parent_ball(b);
    PAdic diff = e.z - b.center(e.z.precision());
    if (diff.is_zero() || diff.val() >= b.n + 1) return child_ball(b, 0);
    // digit of (e - center) at position n
    u64 digit = diff.unit_mod(1);
    if (diff.val() > b.n) throw Error("unreachable");
    if (diff.val() < b.n) throw IndistinguishableEnds("step_toward_end: inconsistent containment");
    return child_ball(b, i64(digit));
}

/// Geodesic from a vertex toward an end, truncated `extent` steps past the
/// junction with the end's ray (lazy stand-in for the infinite geodesic).
/// Toward infinity the whole ray is ascending, so `extent` parents are taken.
inline Walk geodesic(const Ball& a, const End& e, i64 extent = 3) {
    Walk w;
    Ball cur = a;
    w.v.push_back(cur);
    if (e.inf) {
        for (i64 k = 0; k < extent; ++k) {
            cur = parent_ball(cur);
            w.v.push_back(cur);
        }
        return w;
    }
    while (!ball_contains_end(cur, e)) {
        cur = parent_ball(cur);
        w.v.push_back(cur);
    }
    for (i64 k = 0; k < extent; ++k) {
        cur = step_toward_end(cur, e);
        w.v.push_back(cur);
    }
    return w;
}

/// Two-sided geodesic between distinct ends, truncated to `extent` vertices
/// beyond the meet on each side (for (inf, 0) this is the chain B_0^[n]).
inline Walk geodesic(const End& a, const End& b, i64 extent = 3) {
    if (a == b) throw DomainViolation("geodesic: ends equal");
    Walk w;
    if (a.inf || b.inf) {
        const End& fin = a.inf ? b : a;
        PAdic z = fin.inf ? PAdic() : fin.z;
        for (i64 l = -extent; l <= extent; ++l) w.v.push_back(canonical_ball(z.prime(), z, l));
        if (a.inf) return w; // from inf down toward b
        std::reverse(w.v.begin(), w.v.end());
        return w;
    }
    i64 m = end_separation(a, b);
    Walk w2;
    for (i64 l = m + extent; l >= m; --l) w2.v.push_back(canonical_ball(a.z.prime(), a.z, l));
    for (i64 l = m + 1; l <= m + extent; ++l) w2.v.push_back(canonical_ball(b.z.prime(), b.z, l));
    return w2;
}

// ---------------------------------------------------------------------------
// Region enumeration
// ---------------------------------------------------------------------------

/// All vertices at distance <= R from base, BFS order.
/// Cardinality 1 + (p+1)(p^R - 1)/(p - 1).
inline std::vector<Ball> enumerate_region(const Ball& base, i64 R) {
    if (R < 0) throw DomainViolation("enumerate_region: negative radius");
    std::vector<Ball> out{base};
    std::unordered_set<Ball, BallHash> seen{base};
    size_t head = 0;
    for (i64 depth = 0; depth < R; ++depth) {
        size_t end = out.size();
        for (; head < end; ++head) {
            for (const Ball& nb : neighbors(out[head])) {
                if (seen.insert(nb).second) out.push_back(nb);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lattices and the ball <-> lattice correspondence
// ---------------------------------------------------------------------------

/**
 * A rank-2 lattice given by two column generators. The vertex map is
 * B_z^[n] <-> class of O.(z,1)^T + O.(p^n,0)^T; this is the calibration under
 * which [[1,1],[0,1]] translates (fixing exactly the balls of radius >= 1)
 * and the partition action coincides with conjugation.
 */
struct Lattice2 {
    Vec2 c1, c2;

    struct CanonicalTag {
        Ball ball;
        i64 scale; // lattice = p^scale * Lambda_{z,n}
    };
};

inline Lattice2 ball_lattice_roundtrip(const Ball& b, int prec) {
    PAdic z = b.center(prec);
    PAdic one = PAdic::from_int(b.p, 1, prec);
    PAdic pn = one.shifted(b.n);
    return Lattice2{Vec2{z, one}, Vec2{pn, PAdic::zero(b.p, prec)}};
}

/// Column reduction to the (z,1),(p^n,0) shape; reads off (z, n) and the
/// homothety scale. Throws on singular bases; PrecisionExhausted propagates.
inline Lattice2::CanonicalTag lattice_to_ball_tag(const Lattice2& L) {
    Vec2 u = L.c1, w = L.c2;
    i64 vy1 = u.y.val(), vy2 = w.y.val();
    if (u.y.is_zero() && w.y.is_zero()) throw DomainViolation("lattice_to_ball: singular basis");
    if (u.y.is_zero() || (!w.y.is_zero() && vy2 < vy1)) std::swap(u, w);
    // u now has the y-entry of minimal valuation; clear the other.
    Vec2 r{w.x - (w.y / u.y) * u.x, w.y - (w.y / u.y) * u.y};
    if (!r.y.is_zero()) throw Error("lattice_to_ball: elimination failed");
    if (r.x.is_zero()) throw DomainViolation("lattice_to_ball: singular basis");
    PAdic z = u.x / u.y;
    i64 n = r.x.val() - u.y.val();
    i64 scale = u.y.val();
    Ball b = canonical_ball(u.x.prime(), z, n);
    return Lattice2::CanonicalTag{b, scale};
}

inline Ball lattice_to_ball(const Lattice2& L) { return lattice_to_ball_tag(L).ball; }

// ---------------------------------------------------------------------------
// Hulls
// ---------------------------------------------------------------------------

using TreeItem = std::variant<Ball, End>;

inline bool item_is_ball(const TreeItem& it) { return std::holds_alternative<Ball>(it); }
inline const Ball& item_ball(const TreeItem& it) { return std::get<Ball>(it); }
inline const End& item_end(const TreeItem& it) { return std::get<End>(it); }

inline bool items_equal(const TreeItem& a, const TreeItem& b) {
    if (item_is_ball(a) != item_is_ball(b)) return false;
    if (item_is_ball(a)) return item_ball(a) == item_ball(b);
    return item_end(a) == item_end(b);
}

/// Meet level of the rays/balls seen from two items: for ends v(x - y); ball
/// levels clip it. This is the level of the smallest common ball.
inline i64 item_meet_level(const TreeItem& a, const TreeItem& b) {
    if (item_is_ball(a) && item_is_ball(b)) {
        const Ball &x = item_ball(a), &y = item_ball(b);
        return std::min({x.n, y.n, center_meet_val(x, y)});
    }
    if (!item_is_ball(a) && !item_is_ball(b)) {
        const End &x = item_end(a), &y = item_end(b);
        return end_separation(x, y);
    }
    const Ball& x = item_is_ball(a) ? item_ball(a) : item_ball(b);
    const End& e = item_is_ball(a) ? item_end(b) : item_end(a);
    if (e.inf) return kNegInfLevel;
    PAdic d = e.z - x.center(e.z.precision());
    i64 j = d.is_zero() ? kInfValuation : d.val();
    return std::min(x.n, j);
}

/// A witness element contained in every ball of the item's direction.
inline std::optional<PAdic> item_witness(const TreeItem& it, int prec) {
    if (item_is_ball(it)) return item_ball(it).center(prec);
    if (item_end(it).inf) return std::nullopt;
    return item_end(it).z;
}

/// Median (Y-vertex) of three pairwise distinct items.
inline Ball median_vertex(const TreeItem& a, const TreeItem& b, const TreeItem& c, int prec) {
    i64 mab = item_meet_level(a, b);
    i64 mac = item_meet_level(a, c);
    i64 mbc = item_meet_level(b, c);
    i64 lvl = std::max({mab, mac, mbc});
    const TreeItem* w1 = &a;
    const TreeItem* w2 = &b;
    if (mac == lvl) { w1 = &a; w2 = &c; }
    if (mbc == lvl) { w1 = &b; w2 = &c; }
    auto wit = item_witness(*w1, prec);
    if (!wit) wit = item_witness(*w2, prec);
    if (!wit) throw DomainViolation("median_vertex: cannot take median through two infinite ends");
    i64 p = wit->prime();
    return canonical_ball(p, *wit, lvl);
}

/// Distance from an item to a vertex (kInfValuation for ends).
inline i64 item_vertex_distance(const TreeItem& it, const Ball& v) {
    if (!item_is_ball(it)) return kInfValuation;
    return ball_distance(item_ball(it), v);
}

/// Shape of a quartet hull in the two-pair disposition: legs (r,s) hang off
/// one branch vertex, (t,u) off the other, joined by the central edge of
/// length l. m = l + u is the congruence modulus exponent.
struct QuartetShape {
    i64 r = 0, s = 0, t = 0, u = 0;
    i64 l = 0;
    int pairing = 0; // index paired with item 0 (1, 2, or 3)

    i64 m() const { return l + u; }
    bool operator==(const QuartetShape& o) const {
        return r == o.r && s == o.s && t == o.t && u == o.u && l == o.l && pairing == o.pairing;
    }
};

struct Hull {
    std::vector<TreeItem> items;
    std::optional<Ball> center;        // triples: the central vertex U
    std::optional<Ball> center2;       // quartets: V
    std::optional<QuartetShape> shape; // quartets
};

inline void check_items_distinct(const std::vector<TreeItem>& items) {
    for (size_t i = 0; i < items.size(); ++i)
        for (size_t j = i + 1; j < items.size(); ++j) {
            if (items_equal(items[i], items[j])) throw DomainViolation("hull: items not pairwise distinct");
            if (!item_is_ball(items[i]) && !item_is_ball(items[j]))
                end_separation(item_end(items[i]), item_end(items[j])); // may raise IndistinguishableEnds
        }
}

/// Minimal connected subtree spanned by 2..4 items, with shape data.
inline Hull hull_of(const std::vector<TreeItem>& items, int prec) {
    if (items.size() < 2 || items.size() > 4) throw DomainViolation("hull_of: need 2..4 items");
    check_items_distinct(items);
    Hull h;
    h.items = items;
    if (items.size() == 3) {
        h.center = median_vertex(items[0], items[1], items[2], prec);
        return h;
    }
    if (items.size() == 4) {
        // Medians of the four triples; exactly one or two distinct vertices.
        std::vector<Ball> med;
        med.push_back(median_vertex(items[0], items[1], items[2], prec));
        med.push_back(median_vertex(items[0], items[1], items[3], prec));
        med.push_back(median_vertex(items[0], items[2], items[3], prec));
        med.push_back(median_vertex(items[1], items[2], items[3], prec));
        Ball U = med[0];
        std::optional<Ball> V;
        for (const Ball& m : med)
            if (m != U) V = m;
        if (!V) {
            // Star: all four legs meet at U.
            QuartetShape s;
            s.l = 0;
            s.pairing = 1;
            s.r = item_vertex_distance(items[0], U);
            s.s = item_vertex_distance(items[1], U);
            s.t = item_vertex_distance(items[2], U);
            s.u = item_vertex_distance(items[3], U);
            h.center = U;
            h.center2 = U;
            h.shape = s;
            return h;
        }
        // Each item attaches to the nearer of U, V: test via the median of
        // (item, U, V), which lands on U or V.
        // Each item attaches to the nearer of U, V: the median of (item, U, V)
        // lands on one of them. With two distinct medians the split is 2+2.
        auto side = [&](const TreeItem& it, const Ball& X, const Ball& Y) {
            Ball m = median_vertex(it, TreeItem(X), TreeItem(Y), prec);
            if (m == X) return true;
            if (m == Y) return false;
            throw Error("hull_of: quartet median off the central edge");
        };
        Ball Uu = U, Vv = *V;
        if (!side(items[0], Uu, Vv)) std::swap(Uu, Vv);
        std::array<bool, 4> atU{};
        for (size_t i = 0; i < 4; ++i) atU[i] = side(items[i], Uu, Vv);
        if (!atU[0] || int(atU[1]) + int(atU[2]) + int(atU[3]) != 1)
            throw Error("hull_of: unexpected quartet split");
        int partner = atU[1] ? 1 : (atU[2] ? 2 : 3);
        int o1 = -1, o2 = -1;
        for (int i = 1; i < 4; ++i)
            if (i != partner) (o1 < 0 ? o1 : o2) = i;
        QuartetShape s;
        s.l = ball_distance(Uu, Vv);
        s.pairing = partner;
        s.r = item_vertex_distance(items[0], Uu);
        s.s = item_vertex_distance(items[size_t(partner)], Uu);
        s.t = item_vertex_distance(items[size_t(o1)], Vv);
        s.u = item_vertex_distance(items[size_t(o2)], Vv);
        h.center = Uu;
        h.center2 = Vv;
        h.shape = s;
        return h;
    }
    return h;
}

inline Hull hull_of(std::initializer_list<TreeItem> items, int prec) {
    return hull_of(std::vector<TreeItem>(items), prec);
}

} // namespace bt
