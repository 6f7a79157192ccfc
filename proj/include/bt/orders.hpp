#pragma once

#include <algorithm>
#include <string>

#include "bt/moebius.hpp"

namespace bt {

// ---------------------------------------------------------------------------
// Order catalogue
// ---------------------------------------------------------------------------

enum class OrderKind { Trivial, Nilpotent, SplitCommutative, Triangular, EichlerThick };

/// Symbolic kind + parameters of a suborder of M_2(k): the five-entry list of
/// intersections of maximal orders.
struct OrderSpec {
    OrderKind kind = OrderKind::Trivial;
    i64 p = 2;
    i64 t = 0; // bracket parameter
    i64 r = 0; // Eichler level (EichlerThick only)

    static OrderSpec trivial(i64 p) { return {OrderKind::Trivial, p, 0, 0}; }
    static OrderSpec nilpotent(i64 p) { return {OrderKind::Nilpotent, p, 0, 0}; }
    static OrderSpec split(i64 p, i64 t) { return {OrderKind::SplitCommutative, p, t, 0}; }
    static OrderSpec triangular(i64 p, i64 t) { return {OrderKind::Triangular, p, t, 0}; }
    static OrderSpec eichler_thick(i64 p, i64 r, i64 t) { return {OrderKind::EichlerThick, p, t, r}; }

    std::string name() const {
        switch (kind) {
            case OrderKind::Trivial: return "trivial";
            case OrderKind::Nilpotent: return "nilpotent";
            case OrderKind::SplitCommutative: return "split";
            case OrderKind::Triangular: return "triangular";
            case OrderKind::EichlerThick: return "eichler";
        }
        return "?";
    }
};

/// A concrete order O_k.1 + sum O_k.g_i given by generator matrices. The
/// generators also span the algebra L = k.1 + sum k.g_i the order sits in.
struct MatrixOrder {
    i64 p = 2;
    std::vector<Mat2> gens;
};

/// Generators in the documented standard position.
inline MatrixOrder standard_order(const OrderSpec& spec, int prec) {
    const i64 p = spec.p;
    MatrixOrder H;
    H.p = p;
    auto sc = [&](i64 a, i64 b, i64 c, i64 d, i64 shift) {
        Mat2 m = Mat2::from_ints(p, a, b, c, d, prec);
        return Mat2{m.a.shifted(shift), m.b.shifted(shift), m.c.shifted(shift), m.d.shifted(shift)};
    };
    switch (spec.kind) {
        case OrderKind::Trivial:
            break;
        case OrderKind::Nilpotent:
            H.gens.push_back(sc(0, 1, 0, 0, 0));
            break;
        case OrderKind::SplitCommutative:
            H.gens.push_back(sc(1, 0, 0, 0, spec.t));
            break;
        case OrderKind::Triangular:
            H.gens.push_back(sc(1, 0, 0, 0, spec.t));
            H.gens.push_back(sc(0, 1, 0, 0, spec.t));
            break;
        case OrderKind::EichlerThick:
            H.gens.push_back(sc(1, 0, 0, 0, spec.t));
            H.gens.push_back(sc(0, 1, 0, 0, spec.t));
            H.gens.push_back(sc(0, 0, 1, 0, spec.t + spec.r));
            break;
    }
    return H;
}

/// pi^t H + O_k.1: generators scaled by p^t.
inline MatrixOrder bracket_t(const MatrixOrder& H, i64 t) {
    if (t < 0) throw DomainViolation("bracket_t: t must be >= 0");
    MatrixOrder out;
    out.p = H.p;
    for (const Mat2& g : H.gens)
        out.gens.push_back(Mat2{g.a.shifted(t), g.b.shifted(t), g.c.shifted(t), g.d.shifted(t)});
    return out;
}

// ---------------------------------------------------------------------------
// Eichler orders (standard position: integral matrices, lower-left entry
// divisible by p^r; defining path B_0^[0] ... B_0^[-r], toward infinity)
// ---------------------------------------------------------------------------

struct EichlerOrder {
    i64 p = 2;
    i64 r = 0;

    Walk defining_path() const {
        Walk w;
        for (i64 l = 0; l >= -r; --l) w.v.push_back(canonical_ball(p, 0, 1, l));
        return w;
    }

    bool contains(const Mat2& g) const {
        for (const PAdic* e : {&g.a, &g.b, &g.d})
            if (!e->is_zero() && e->val() < 0) return false;
        if (!g.c.is_zero() && g.c.val() < r) return false;
        return true;
    }

    bool contains_order(const MatrixOrder& H) const {
        for (const Mat2& g : H.gens)
            if (!contains(g)) return false;
        return true;
    }

    MatrixOrder order(int prec) const { return standard_order(OrderSpec::eichler_thick(p, r, 0), prec); }

    /// The Atkin-Lehner involution [[0,1],[p^r,0]]; together with k* E* it
    /// generates the normalizer of E.
    Mat2 atkin_lehner(int prec) const {
        PAdic z = PAdic::zero(p, prec), one = PAdic::from_int(p, 1, prec);
        return Mat2{z, one, one.shifted(r), z};
    }
};

// ---------------------------------------------------------------------------
// Vertex membership and brute-force branches
// ---------------------------------------------------------------------------

namespace detail {

inline bool lattice_member(const Vec2& v, const PAdic& z, i64 n) {
    // (x, y) in O.(z,1) + O.(p^n, 0)  <=>  y in O and v(x - y z) >= n
    if (!v.y.is_zero() && v.y.val() < 0) return false;
    PAdic rem = v.x - v.y * z;
    if (rem.is_zero()) return true;
    return rem.val() >= n;
}

} // namespace detail

/// Whether the maximal order of B contains H: every generator stabilizes the
/// lattice of B.
inline bool vertex_contains_order(const MatrixOrder& H, const Ball& B) {
    int prec = 2;
    for (const Mat2& g : H.gens)
        for (const PAdic* e : {&g.a, &g.b, &g.c, &g.d})
            if (!e->is_zero()) prec = std::max(prec, e->precision());
    prec = std::max(prec, B.center_digits() + 4);
    PAdic z = B.center(prec);
    PAdic one = PAdic::from_int(B.p, 1, prec);
    Vec2 v1{z, one};
    Vec2 v2{one.shifted(B.n), PAdic::zero(B.p, prec)};
    for (const Mat2& g : H.gens) {
        if (!detail::lattice_member(g.apply(v1), z, B.n)) return false;
        if (!detail::lattice_member(g.apply(v2), z, B.n)) return false;
    }
    return true;
}

/// { v in region(base, R) : the maximal order of v contains H }.
inline std::vector<Ball> branch_bruteforce(const MatrixOrder& H, const Ball& base, i64 R) {
    std::vector<Ball> out;
    for (const Ball& v : enumerate_region(base, R))
        if (vertex_contains_order(H, v)) out.push_back(v);
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic branches
// ---------------------------------------------------------------------------

enum class StemKind { Point, Path, Ray, Apartment };

/**
 * Symbolic descriptor of S_0(H): either a thick line (stem + depth) or the
 * infinite leaf of a nilpotent-generated order (single end + level of the
 * boundary). Membership and depth are decidable from the descriptor alone.
 */
struct Branch {
    enum class Kind { WholeTree, ThickLine, InfiniteLeaf } kind = Kind::WholeTree;

    // ThickLine
    StemKind stem = StemKind::Point;
    i64 depth = 0;
    Ball point;      // Point stem
    Walk path;       // Path stem
    Ball ray_origin; // Ray stem
    End ray_end;
    End ap_e1, ap_e2; // Apartment stem

    // InfiniteLeaf: for end = inf the branch is { B_z^[n] : n <= level }.
    End leaf_end;
    i64 leaf_level = 0;

    static Branch whole_tree() { return Branch{}; }
    static Branch leaf(const End& e, i64 level) {
        Branch b;
        b.kind = Kind::InfiniteLeaf;
        b.leaf_end = e;
        b.leaf_level = level;
        return b;
    }
    static Branch thick_point(const Ball& v, i64 depth) {
        Branch b;
        b.kind = Kind::ThickLine;
        b.stem = StemKind::Point;
        b.point = v;
        b.depth = depth;
        return b;
    }
    static Branch thick_path(const Walk& w, i64 depth) {
        Branch b;
        b.kind = Kind::ThickLine;
        b.stem = StemKind::Path;
        b.path = w;
        b.depth = depth;
        return b;
    }
    static Branch thick_ray(const Ball& origin, const End& e, i64 depth) {
        Branch b;
        b.kind = Kind::ThickLine;
        b.stem = StemKind::Ray;
        b.ray_origin = origin;
        b.ray_end = e;
        b.depth = depth;
        return b;
    }
    static Branch thick_apartment(const End& e1, const End& e2, i64 depth) {
        Branch b;
        b.kind = Kind::ThickLine;
        b.stem = StemKind::Apartment;
        b.ap_e1 = e1;
        b.ap_e2 = e2;
        b.depth = depth;
        return b;
    }
};

namespace detail {

inline i64 meet_level_with_end(const Ball& B, const End& e) {
    if (e.inf) return kNegInfLevel;
    PAdic d = e.z - B.center(std::max(e.z.precision(), B.center_digits() + 2));
    i64 j = d.is_zero() ? kInfValuation : d.val();
    return std::min(B.n, j);
}

/// Distance from B to the chain {B_e^[l] : l >= k} descending to a finite end.
inline i64 dist_to_down_chain(const Ball& B, const End& e, i64 k) {
    i64 j = meet_level_with_end(B, e);
    if (j >= k) return B.n - j;
    return (B.n - j) + (k - j);
}

/// Distance from B to {ancestors of W at levels in [lo, hi]}.
inline i64 dist_to_ancestor_chain(const Ball& B, const Ball& W, i64 lo, i64 hi) {
    i64 jw = std::min({B.n, W.n, center_meet_val(B, W)});
    i64 l = std::clamp(std::min(B.n, jw), lo, hi);
    i64 a = std::min({B.n, l, jw});
    return (B.n - a) + (l - a);
}

} // namespace detail

/// Distance from a vertex to the stem of a thick line.
inline i64 dist_to_stem(const Branch& br, const Ball& B) {
    if (br.kind != Branch::Kind::ThickLine) throw DomainViolation("dist_to_stem: not a thick line");
    switch (br.stem) {
        case StemKind::Point:
            return ball_distance(br.point, B);
        case StemKind::Path: {
            i64 best = kInfValuation;
            for (const Ball& v : br.path.v) best = std::min(best, ball_distance(v, B));
            return best;
        }
        case StemKind::Apartment: {
            if (br.ap_e1.inf || br.ap_e2.inf) {
                const End& fin = br.ap_e1.inf ? br.ap_e2 : br.ap_e1;
                return detail::dist_to_down_chain(B, fin, kNegInfLevel);
            }
            i64 m = end_separation(br.ap_e1, br.ap_e2);
            return std::min(detail::dist_to_down_chain(B, br.ap_e1, m),
                            detail::dist_to_down_chain(B, br.ap_e2, m));
        }
        case StemKind::Ray: {
            const Ball& W = br.ray_origin;
            if (br.ray_end.inf) return detail::dist_to_ancestor_chain(B, W, kNegInfLevel, W.n);
            if (ball_contains_end(W, br.ray_end)) return detail::dist_to_down_chain(B, br.ray_end, W.n);
            i64 jj = detail::meet_level_with_end(W, br.ray_end); // junction level (< W.n)
            return std::min(detail::dist_to_ancestor_chain(B, W, jj, W.n),
                            detail::dist_to_down_chain(B, br.ray_end, jj));
        }
    }
    throw Error("unreachable");
}

/// Depth of a vertex inside a branch (negative when outside): the radius of
/// the largest vertex-ball centred there that stays inside.
inline i64 branch_depth(const Branch& br, const Ball& B) {
    switch (br.kind) {
        case Branch::Kind::WholeTree:
            return kInfValuation;
        case Branch::Kind::ThickLine:
            return br.depth - dist_to_stem(br, B);
        case Branch::Kind::InfiniteLeaf: {
            if (br.leaf_end.inf) return br.leaf_level - B.n;
            i64 j = detail::meet_level_with_end(B, br.leaf_end);
            return br.leaf_level - (B.n - 2 * j);
        }
    }
    throw Error("unreachable");
}

inline bool branch_contains(const Branch& br, const Ball& B) { return branch_depth(br, B) >= 0; }

/// Whether a vertex is a depth-0 boundary vertex (an endpoint of the branch).
inline bool branch_endpoint(const Branch& br, const Ball& B) { return branch_depth(br, B) == 0; }

/// Branch of the standard-position order of the given kind (Example 4.1 and
/// kinds (1)-(5)): the nilpotent order gives the infinite leaf at infinity,
/// split orders the 0-infinity apartment, triangular orders the ray with stem
/// border B_0^[0], Eichler orders their defining path.
inline Branch branch_symbolic(const OrderSpec& spec) {
    const i64 p = spec.p;
    Ball b00 = canonical_ball(p, 0, 1, 0);
    const int N = 8;
    switch (spec.kind) {
        case OrderKind::Trivial:
            return Branch::whole_tree();
        case OrderKind::Nilpotent:
            return Branch::leaf(End::infinity(), 0);
        case OrderKind::SplitCommutative:
            return Branch::thick_apartment(End::of_int(p, 0, N), End::infinity(), spec.t);
        case OrderKind::Triangular:
            return Branch::thick_ray(b00, End::infinity(), spec.t);
        case OrderKind::EichlerThick: {
            if (spec.r == 0) return Branch::thick_point(b00, spec.t);
            EichlerOrder E{p, spec.r};
            return Branch::thick_path(E.defining_path(), spec.t);
        }
    }
    throw Error("unreachable");
}

/// Prop 3.1: the branch of H^[t] is the t-neighborhood of the branch of H.
inline Branch thicken(const Branch& br, i64 t) {
    if (t < 0) throw DomainViolation("thicken: t must be >= 0");
    Branch out = br;
    switch (br.kind) {
        case Branch::Kind::WholeTree:
            break;
        case Branch::Kind::ThickLine:
            out.depth += t;
            break;
        case Branch::Kind::InfiniteLeaf:
            out.leaf_level += t;
            break;
    }
    return out;
}

/// t-neighborhood of a vertex set inside an ambient vertex list.
inline std::vector<Ball> thicken(const std::vector<Ball>& S, i64 t, const std::vector<Ball>& ambient) {
    std::vector<Ball> out;
    for (const Ball& v : ambient) {
        i64 best = kInfValuation;
        for (const Ball& s : S) best = std::min(best, ball_distance(v, s));
        if (best <= t) out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Intersections with Eichler orders and optimality
// ---------------------------------------------------------------------------

namespace detail {

/// Minimal m with p^m g in E (entrywise valuation conditions); may be
/// negative when a proper p-power denominator of g still lies in E.
inline i64 min_power_into(const Mat2& g, const EichlerOrder& E) {
    if (g.is_zero()) throw DomainViolation("min_power_into: zero generator");
    i64 m = kNegInfLevel;
    auto need = [&](const PAdic& e, i64 req) {
        if (!e.is_zero()) m = std::max(m, req - e.val());
    };
    need(g.a, 0);
    need(g.b, 0);
    need(g.d, 0);
    need(g.c, E.r);
    return m;
}

struct Lat2 {
    Vec2 b1, b2; // columns of a basis of a lattice in k^2
};

/// {(x, y) : x f1 + y f2 in O} intersected into the current basis.
inline void impose_condition(Lat2& L, const PAdic& f1, const PAdic& f2) {
    PAdic c1 = L.b1.x * f1 + L.b1.y * f2;
    PAdic c2 = L.b2.x * f1 + L.b2.y * f2;
    auto ok = [](const PAdic& c) { return c.is_zero() || c.val() >= 0; };
    if (ok(c1) && ok(c2)) return;
    if (c1.is_zero() || (!c2.is_zero() && c2.val() < c1.val())) {
        std::swap(L.b1, L.b2);
        std::swap(c1, c2);
    }
    // v(c1) <= v(c2), v(c1) < 0
    if (!c2.is_zero()) {
        PAdic q = c2 / c1;
        L.b2 = Vec2{L.b2.x - q * L.b1.x, L.b2.y - q * L.b1.y};
    }
    i64 shift = -c1.val();
    L.b1 = Vec2{L.b1.x.shifted(shift), L.b1.y.shifted(shift)};
}

/// Exact membership of a vector in a 2-dim lattice (Cramer coordinates).
inline bool lat2_contains(const Lat2& L, const Vec2& w) {
    PAdic det = L.b1.x * L.b2.y - L.b1.y * L.b2.x;
    if (det.is_zero()) throw DomainViolation("lat2_contains: degenerate basis");
    PAdic c1 = (w.x * L.b2.y - w.y * L.b2.x) / det;
    PAdic c2 = (L.b1.x * w.y - L.b1.y * w.x) / det;
    auto integral = [](const PAdic& c) { return c.is_zero() || c.val() >= 0; };
    return integral(c1) && integral(c2);
}

inline bool lat2_equals_scaled_unit_lattice(const Lat2& L, i64 p, i64 t, int prec) {
    auto in_pt = [&](const Vec2& w) {
        return (w.x.is_zero() || w.x.val() >= t) && (w.y.is_zero() || w.y.val() >= t);
    };
    if (!in_pt(L.b1) || !in_pt(L.b2)) return false;
    PAdic pt = PAdic::from_int(p, 1, prec).shifted(t);
    PAdic z = PAdic::zero(p, prec);
    return lat2_contains(L, Vec2{pt, z}) && lat2_contains(L, Vec2{z, pt});
}

} // namespace detail

/// L cap E: the largest order of the algebra L (spanned by the generators of
/// Lbasis beyond scalars) contained in E. Per-generator minimal-denominator
/// search for rank 2; a two-dimensional lattice computation for rank 3.
inline MatrixOrder intersect_with_eichler(const MatrixOrder& Lbasis, const EichlerOrder& E) {
    MatrixOrder out;
    out.p = Lbasis.p;
    if (Lbasis.gens.empty()) return out; // the trivial order
    if (Lbasis.gens.size() == 1) {
        i64 m = detail::min_power_into(Lbasis.gens[0], E);
        const Mat2& g = Lbasis.gens[0];
        out.gens.push_back(Mat2{g.a.shifted(m), g.b.shifted(m), g.c.shifted(m), g.d.shifted(m)});
        return out;
    }
    if (Lbasis.gens.size() != 2) throw UnsupportedKind("intersect_with_eichler: rank must be 2 or 3");
    const Mat2& g1 = Lbasis.gens[0];
    const Mat2& g2 = Lbasis.gens[1];
    i64 p = Lbasis.p;
    int prec = std::max(g1.a.precision(), 8);
    i64 big = 40;
    detail::Lat2 M{Vec2{PAdic::from_int(p, 1, prec).shifted(-big), PAdic::zero(p, prec)},
                   Vec2{PAdic::zero(p, prec), PAdic::from_int(p, 1, prec).shifted(-big)}};
    auto impose = [&](const PAdic& e1, const PAdic& e2, i64 req) {
        detail::impose_condition(M, e1.shifted(-req), e2.shifted(-req));
    };
    impose(g1.a, g2.a, 0);
    impose(g1.b, g2.b, 0);
    impose(g1.d, g2.d, 0);
    impose(g1.c, g2.c, E.r);
    auto comb = [&](const Vec2& w) {
        Mat2 x = g1.scaled(w.x).add(g2.scaled(w.y));
        return x;
    };
    out.gens.push_back(comb(M.b1));
    out.gens.push_back(comb(M.b2));
    return out;
}

/// Optimality of H (with algebra spanned by its generators) in E: the
/// coefficient module {c : sum c_i g_i in E} must be exactly O^m.
inline bool is_optimal(const MatrixOrder& H, const EichlerOrder& E) {
    for (const Mat2& g : H.gens)
        if (!E.contains(g)) throw NotContained("is_optimal: H is not inside E");
    if (H.gens.empty()) return true; // the trivial order is optimal in its own algebra
    if (H.gens.size() == 1) return detail::min_power_into(H.gens[0], E) == 0;
    if (H.gens.size() != 2) throw UnsupportedKind("is_optimal: rank must be <= 3");
    // rank 3: compare the coefficient lattice with O^2
    const Mat2& g1 = H.gens[0];
    const Mat2& g2 = H.gens[1];
    i64 p = H.p;
    int prec = std::max(g1.a.precision(), 8);
    i64 big = 40;
    detail::Lat2 M{Vec2{PAdic::from_int(p, 1, prec).shifted(-big), PAdic::zero(p, prec)},
                   Vec2{PAdic::zero(p, prec), PAdic::from_int(p, 1, prec).shifted(-big)}};
    auto impose = [&](const PAdic& e1, const PAdic& e2, i64 req) {
        detail::impose_condition(M, e1.shifted(-req), e2.shifted(-req));
    };
    impose(g1.a, g2.a, 0);
    impose(g1.b, g2.b, 0);
    impose(g1.d, g2.d, 0);
    impose(g1.c, g2.c, E.r);
    return detail::lat2_equals_scaled_unit_lattice(M, p, 0, prec);
}

/// Lemma 3.2, pure tree form: a path P = v_0...v_r inside the t-thick ray R
/// is exactly the configuration of an optimal rank-3 placement iff v_0, v_r
/// are endpoints of R, u(v_0) or u(v_r) is the stem border, and r >= 2t.
inline bool is_optimal_rank3_geometric(const Branch& R, const Walk& P) {
    if (R.kind != Branch::Kind::ThickLine || R.stem != StemKind::Ray)
        throw DomainViolation("is_optimal_rank3_geometric: R must be a thick ray");
    for (const Ball& v : P.v)
        if (!branch_contains(R, v)) throw NotContained("is_optimal_rank3_geometric: P not inside R");
    const Ball& v0 = P.v.front();
    const Ball& vr = P.v.back();
    if (dist_to_stem(R, v0) != R.depth) return false;
    if (dist_to_stem(R, vr) != R.depth) return false;
    // u(v): nearest stem vertex; the stem border is the ray origin.
    auto proj_is_border = [&](const Ball& v) {
        return ball_distance(v, R.ray_origin) == dist_to_stem(R, v);
    };
    if (!proj_is_border(v0) && !proj_is_border(vr)) return false;
    return P.length() >= 2 * R.depth;
}

} // namespace bt
