#pragma once

#include <optional>

#include "bt/tree.hpp"

namespace bt {

/**
 * An element of PGL_2(k): an invertible 2x2 matrix up to scalar, normalized
 * so the minimum entry valuation is 0. Acts on ends as z -> (az+b)/(cz+d)
 * and on vertices two independent ways (lattices vs partitions); the build
 * is calibrated so [[1,1],[0,1]] is z -> z+1 and fixes exactly the balls of
 * radius >= 1.
 */
struct Moebius {
    Mat2 m;

    static Moebius of(const Mat2& raw) {
        if (raw.det().is_zero()) throw DomainViolation("Moebius: singular matrix");
        i64 v = raw.min_val();
        Moebius s;
        s.m = Mat2{raw.a.shifted(-v), raw.b.shifted(-v), raw.c.shifted(-v), raw.d.shifted(-v)};
        return s;
    }
    static Moebius from_ints(i64 p, i64 a, i64 b, i64 c, i64 d, int prec) {
        return of(Mat2::from_ints(p, a, b, c, d, prec));
    }
    static Moebius identity(i64 p, int prec) { return of(Mat2::identity(p, prec)); }

    Moebius compose(const Moebius& o) const { return of(m.mul(o.m)); } // this after o
    Moebius inverse() const { return of(m.adjugate()); }
};

/// sigma(e) = (a e + b)/(c e + d), with the usual conventions at infinity
/// and at the pole.
inline End apply_to_end(const Moebius& s, const End& e) {
    if (e.inf) {
        if (s.m.c.is_zero()) return End::infinity();
        return End::at(s.m.a / s.m.c);
    }
    PAdic num = s.m.a * e.z + s.m.b;
    PAdic den = s.m.c * e.z + s.m.d;
    if (den.is_zero()) return End::infinity();
    return End::at(num / den);
}

/// Vertex action through the lattice model: B -> ball of sigma * Lambda(B).
/// This is conjugation on maximal orders.
inline Ball act_on_ball_lattice(const Moebius& s, const Ball& b, int prec = 0) {
    int N = prec > 0 ? prec : std::max({s.m.a.precision(), s.m.d.precision(), b.center_digits() + 8});
    Lattice2 L = ball_lattice_roundtrip(b, N);
    Lattice2 M{s.m.apply(L.c1), s.m.apply(L.c2)};
    return lattice_to_ball(M);
}

// ---------------------------------------------------------------------------
// Partition action
// ---------------------------------------------------------------------------

/// A ball of P_1(k): a ball of k or the complement of one.
struct P1Ball {
    bool out = false; // complement flag
    i64 n = 0;
    PAdic center;

    bool same_set(const P1Ball& o) const {
        if (out != o.out || n != o.n) return false;
        PAdic d = center - o.center;
        return d.is_zero() || d.val() >= n;
    }
    bool contains_infinity() const { return out; }
};

namespace detail {

struct MoebiusStep {
    enum Kind { Translate, Scale, Invert } kind;
    PAdic arg; // unused for Invert
};

inline std::vector<MoebiusStep> factor_moebius(const Moebius& s) {
    const Mat2& m = s.m;
    std::vector<MoebiusStep> steps;
    if (m.c.is_zero()) {
        steps.push_back({MoebiusStep::Scale, m.a / m.d});
        steps.push_back({MoebiusStep::Translate, m.b / m.d});
        return steps;
    }
    // z -> a/c - det / (c (cz + d))
    steps.push_back({MoebiusStep::Scale, m.c});
    steps.push_back({MoebiusStep::Translate, m.d});
    steps.push_back({MoebiusStep::Invert, PAdic()});
    steps.push_back({MoebiusStep::Scale, (m.det() / m.c).neg()});
    steps.push_back({MoebiusStep::Translate, m.a / m.c});
    return steps;
}

inline P1Ball step_on_p1ball(const MoebiusStep& st, const P1Ball& B) {
    switch (st.kind) {
        case MoebiusStep::Translate:
            return P1Ball{B.out, B.n, B.center + st.arg};
        case MoebiusStep::Scale: {
            if (st.arg.is_zero()) throw DomainViolation("scale by zero");
            return P1Ball{B.out, B.n + st.arg.val(), B.center * st.arg};
        }
        case MoebiusStep::Invert: {
            bool zero_inside = B.center.is_zero() || B.center.val() >= B.n;
            if (zero_inside) {
                // 1 / (p^n O) = {v <= -n} + inf: the complement of B_0^[1-n]
                return P1Ball{!B.out, 1 - B.n, PAdic::zero(B.center.prime(), std::max(1, B.center.precision()))};
            }
            i64 j = B.center.val();
            return P1Ball{B.out, B.n - 2 * j, B.center.inv()};
        }
    }
    throw Error("unreachable");
}

} // namespace detail

/// Vertex action through partitions of P_1(k): pushes every member of
/// P(B) = {B^c, B_1, ..., B_p} through a translation/scaling/inversion
/// factorization of sigma and reads off E with sigma(P(B)) = P(E).
inline Ball act_on_ball_partition(const Moebius& s, const Ball& b, int prec = 0) {
    int N = prec > 0 ? prec : std::max({s.m.a.precision(), s.m.d.precision(), b.center_digits() + 8});
    auto steps = detail::factor_moebius(s);
    std::vector<P1Ball> parts;
    parts.push_back(P1Ball{true, b.n, b.center(N)}); // complement of B
    for (i64 j = 0; j < b.p; ++j) {
        Ball ch = child_ball(b, j);
        parts.push_back(P1Ball{false, ch.n, ch.center(N)});
    }
    for (const auto& st : steps)
        for (auto& part : parts) part = detail::step_on_p1ball(st, part);

    int infs = 0;
    const P1Ball* comp = nullptr;
    for (const auto& part : parts)
        if (part.contains_infinity()) {
            ++infs;
            comp = &part;
        }
    if (infs != 1) throw Error("act_on_ball_partition: image is not a vertex partition");
    Ball e = canonical_ball(b.p, comp->center, comp->n);
    // The remaining p parts must be exactly the children of E.
    std::vector<bool> used(parts.size(), false);
    for (i64 j = 0; j < e.p; ++j) {
        Ball ch = child_ball(e, j);
        P1Ball chb{false, ch.n, ch.center(N)};
        bool found = false;
        for (size_t i = 0; i < parts.size(); ++i) {
            if (used[i] || parts[i].contains_infinity()) continue;
            if (parts[i].same_set(chb)) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) throw Error("act_on_ball_partition: image parts are not the children of E");
    }
    return e;
}

// ---------------------------------------------------------------------------
// Cross-ratio and rigidity
// ---------------------------------------------------------------------------

/// [a,b;c,d] = (a-c)/(b-c) * (b-d)/(a-d), with the usual infinity
/// conventions. Coordinates must be pairwise distinct at stored precision.
inline PAdic cross_ratio(const End& a, const End& b, const End& c, const End& d) {
    const End* es[4] = {&a, &b, &c, &d};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (*es[i] == *es[j]) throw IndistinguishableEnds("cross_ratio: repeated coordinate");
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (!es[i]->inf && !es[j]->inf) end_separation(*es[i], *es[j]);

    auto diff = [](const End& x, const End& y) { return x.z - y.z; }; // finite only
    if (a.inf) return diff(b, d) / diff(b, c);
    if (b.inf) return diff(a, c) / diff(a, d);
    if (c.inf) return diff(b, d) / diff(a, d);
    if (d.inf) return diff(a, c) / diff(b, c);
    return (diff(a, c) / diff(b, c)) * (diff(b, d) / diff(a, d));
}

namespace detail {

/// Unique Moebius map with (a,b,c) -> (inf, 0, 1).
inline Moebius to_standard_frame(const End& a, const End& b, const End& c) {
    i64 p = 0;
    int N = 1;
    for (const End* e : {&a, &b, &c})
        if (!e->inf) {
            p = e->z.prime();
            N = std::max(N, e->z.precision());
        }
    if (p == 0) throw DomainViolation("to_standard_frame: triple has no finite end");
    PAdic one = PAdic::from_int(p, 1, N);
    PAdic zero = PAdic::zero(p, N);
    if (a.inf) // z -> (z - b)/(c - b)
        return Moebius::of(Mat2{one, b.z.neg(), zero, c.z - b.z});
    if (b.inf) // z -> (c - a)/(z - a)
        return Moebius::of(Mat2{zero, c.z - a.z, one, a.z.neg()});
    if (c.inf) // z -> (z - b)/(z - a)
        return Moebius::of(Mat2{one, b.z.neg(), one, a.z.neg()});
    PAdic k = (a.z - c.z) / (b.z - c.z);
    return Moebius::of(Mat2{k, (k * b.z).neg(), one, a.z.neg()});
}

} // namespace detail

/// The unique sigma with sigma(a,b,c) = (a2,b2,c2); each triple pairwise
/// distinct.
inline Moebius map_from_triples(const End& a, const End& b, const End& c,
                                const End& a2, const End& b2, const End& c2) {
    Moebius m1 = detail::to_standard_frame(a, b, c);
    Moebius m2 = detail::to_standard_frame(a2, b2, c2);
    return m2.inverse().compose(m1);
}

/// Canonical end beyond a vertex avoiding the directions of the given
/// adjacent vertices: the parent direction (end = infinity) if free, else
/// the least free child direction extended by zero digits.
inline End beyond_end(const Ball& v, const std::vector<Ball>& avoid, int prec) {
    Ball par = parent_ball(v);
    bool par_blocked = false;
    for (const Ball& w : avoid)
        if (w == par) par_blocked = true;
    if (!par_blocked) return End::infinity();
    for (i64 j = 0; j < v.p; ++j) {
        Ball ch = child_ball(v, j);
        bool blocked = false;
        for (const Ball& w : avoid)
            if (w == ch) blocked = true;
        if (!blocked) return End::at(ch.center(prec));
    }
    throw DomainViolation("beyond_end: no free direction");
}

/// First step of the geodesic from v toward a distinct vertex w.
inline Ball direction_of(const Ball& v, const Ball& w) {
    return geodesic(v, w).v.at(1);
}

/// Prop 5.1: triplets of balls with isomorphic (marked) hulls are
/// conjugated; returns a conjugator built through ends beyond the balls.
inline std::optional<Moebius> triplets_conjugate(const std::array<Ball, 3>& S,
                                                 const std::array<Ball, 3>& S2, int prec) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (ball_distance(S[size_t(i)], S[size_t(j)]) != ball_distance(S2[size_t(i)], S2[size_t(j)]))
                return std::nullopt;
    auto ends_for = [&](const std::array<Ball, 3>& T) {
        Ball U = median_vertex(TreeItem(T[0]), TreeItem(T[1]), TreeItem(T[2]), prec);
        std::array<End, 3> es;
        for (size_t i = 0; i < 3; ++i) {
            std::vector<Ball> avoid;
            if (T[i] == U) {
                for (size_t j = 0; j < 3; ++j)
                    if (j != i && T[j] != T[i]) avoid.push_back(direction_of(T[i], T[j]));
            } else {
                avoid.push_back(direction_of(T[i], U));
            }
            es[i] = beyond_end(T[i], avoid, prec);
        }
        return es;
    };
    auto e1 = ends_for(S);
    auto e2 = ends_for(S2);
    Moebius s = map_from_triples(e1[0], e1[1], e1[2], e2[0], e2[1], e2[2]);
    for (size_t i = 0; i < 3; ++i)
        if (act_on_ball_lattice(s, S[i], prec) != S2[i]) return std::nullopt;
    return s;
}

/// Beyond-ends for the four marked items of a quartet hull (an End item is
/// its own beyond-end).
inline std::array<End, 4> quartet_beyond_ends(const std::vector<TreeItem>& items, const Hull& h, int prec) {
    std::array<End, 4> out;
    for (size_t i = 0; i < 4; ++i) {
        if (!item_is_ball(items[i])) {
            out[i] = item_end(items[i]);
            continue;
        }
        const Ball& v = item_ball(items[i]);
        Ball attach = (i == 0 || i == size_t(h.shape->pairing)) ? *h.center : *h.center2;
        std::vector<Ball> avoid;
        if (v == attach) {
            // Degenerate leg: avoid the directions of the other marked items.
            for (size_t j = 0; j < 4; ++j) {
                if (j == i) continue;
                if (item_is_ball(items[j])) {
                    if (item_ball(items[j]) != v) avoid.push_back(direction_of(v, item_ball(items[j])));
                } else {
                    avoid.push_back(geodesic(v, item_end(items[j]), 1).v.at(1));
                }
            }
            if (*h.center != v) avoid.push_back(direction_of(v, *h.center));
            if (*h.center2 != v) avoid.push_back(direction_of(v, *h.center2));
        } else {
            avoid.push_back(direction_of(v, attach));
        }
        out[i] = beyond_end(v, avoid, prec);
    }
    return out;
}

/// Prop 5.2: quartets with isomorphic Fig. 4(ii) hulls (u the minimal leg)
/// are conjugated iff their cross-ratios agree modulo pi^(u+l).
inline bool quartets_conjugate(const std::vector<TreeItem>& S, const std::vector<TreeItem>& S2, int prec) {
    if (S.size() != 4 || S2.size() != 4) throw DomainViolation("quartets_conjugate: need 4 items");
    Hull h = hull_of(S, prec);
    Hull h2 = hull_of(S2, prec);
    if (!h.shape || !h2.shape) throw ShapeMismatch("quartet hull has no shape");
    if (h.shape->pairing != 1 || h2.shape->pairing != 1)
        throw ShapeMismatch("quartet not in the two-pair disposition (A,B | C,D)");
    auto mins = [](const QuartetShape& q) { return std::min({q.r, q.s, q.t, q.u}); };
    if (h.shape->u != mins(*h.shape) || h2.shape->u != mins(*h2.shape))
        throw ShapeMismatch("u is not the minimal leg; invariant modulus unknown");
    if (h.shape->u < 0) throw ShapeMismatch("u must be >= 0");
    if (!(*h.shape == *h2.shape)) return false;

    auto e = quartet_beyond_ends(S, h, prec);
    auto f = quartet_beyond_ends(S2, h2, prec);
    PAdic x = cross_ratio(e[0], e[1], e[2], e[3]);
    PAdic y = cross_ratio(f[0], f[1], f[2], f[3]);
    i64 mod = h.shape->m();
    PAdic d = x - y;
    if (d.is_zero()) return true;
    return d.val() >= mod;
}

} // namespace bt
