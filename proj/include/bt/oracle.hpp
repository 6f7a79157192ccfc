#pragma once

#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bt/counting.hpp"

namespace bt {

// ---------------------------------------------------------------------------
// Truncated P^1 points: the enumeration grid and orbit keys
// ---------------------------------------------------------------------------

/// A point of P^1(Z/p^K): j = 0 holds an integral residue mod p^K, j in
/// (0, K) a denominator exponent with unit residue mod p^{K-j}, j = K the
/// infinity class (all ends of valuation <= -K collapse there).
struct EndKey {
    i64 j = 0;
    u64 u = 0;
    bool operator==(const EndKey& o) const { return j == o.j && u == o.u; }
    bool operator<(const EndKey& o) const { return std::tie(j, u) < std::tie(o.j, o.u); }
    u64 packed() const { return (u64(j) << 48) | u; }
};

inline EndKey end_key(const End& e, i64 p, int K) {
    if (e.inf) return EndKey{K, 0};
    const PAdic& z = e.z;
    if (z.is_zero() || z.val() >= K) return EndKey{0, 0};
    if (z.val() >= 0) return EndKey{0, z.residue_mod(K)};
    i64 j = -z.val();
    if (j >= K) return EndKey{K, 0};
    return EndKey{j, z.unit_mod(int(K - j))};
}

inline End end_lift(const EndKey& k, i64 p, int K, int prec) {
    if (k.j >= K) return End::infinity();
    if (k.j == 0) return End::at(PAdic::from_int(p, i64(k.u), prec));
    return End::at(PAdic::from_unit(p, -k.j, i64(k.u), prec));
}

inline std::vector<EndKey> all_end_keys(i64 p, int K) {
    std::vector<EndKey> out;
    u64 pk = detail::pow_u64(p, K);
    for (u64 z = 0; z < pk; ++z) out.push_back(EndKey{0, z});
    for (i64 j = 1; j < K; ++j) {
        u64 m = detail::pow_u64(p, K - j);
        for (u64 uu = 1; uu < m; ++uu)
            if (uu % u64(p) != 0) out.push_back(EndKey{j, uu});
    }
    out.push_back(EndKey{i64(K), 0});
    return out;
}

// ---------------------------------------------------------------------------
// Primitive line vectors, rank-one matrices, projectors
// ---------------------------------------------------------------------------

namespace detail {

inline Vec2 primitive_vector(const End& e, i64 p, int prec) {
    if (e.inf) return Vec2{PAdic::from_int(p, 1, prec), PAdic::zero(p, prec)};
    if (e.z.is_zero() || e.z.val() >= 0)
        return Vec2{e.z.is_zero() ? PAdic::zero(p, prec) : e.z, PAdic::from_int(p, 1, prec)};
    i64 j = -e.z.val();
    return Vec2{e.z.shifted(j), PAdic::from_int(p, 1, prec).shifted(j)};
}

/// Rank-one trace-zero matrix with image = kernel = the line of e, primitive
/// normalization: (x,y)^T (y,-x).
inline Mat2 nilpotent_of_line(const End& e, i64 p, int prec) {
    Vec2 v = primitive_vector(e, p, prec);
    return Mat2{v.x * v.y, (v.x * v.x).neg(), v.y * v.y, (v.x * v.y).neg()};
}

/// Projector with image the line of a and kernel the line of c.
inline Mat2 projector(const End& a, const End& c, i64 p, int prec) {
    Vec2 va = primitive_vector(a, p, prec);
    Vec2 vc = primitive_vector(c, p, prec);
    PAdic d = vc.y * va.x - vc.x * va.y; // perp(c) . a
    if (d.is_zero()) throw IndistinguishableEnds("projector: image and kernel coincide");
    PAdic di = d.inv();
    return Mat2{va.x * vc.y * di, (va.x * vc.x * di).neg(), va.y * vc.y * di, (va.y * vc.x * di).neg()};
}

inline Mat2 conjugate(const Mat2& g, const Mat2& x) {
    Mat2 adj = g.adjugate();
    PAdic di = g.det().inv();
    Mat2 y = g.mul(x).mul(adj);
    return Mat2{y.a * di, y.b * di, y.c * di, y.d * di};
}

/// Extract (line end, scale) from a nonzero rank-one trace-zero matrix:
/// x = scale * nilpotent_of_line(end).
inline std::pair<End, PAdic> extract_rank_one(const Mat2& x, i64 p, int prec) {
    // pick the column of smaller valuation as the image line
    i64 v1 = std::min(x.a.is_zero() ? kInfValuation : x.a.val(), x.c.is_zero() ? kInfValuation : x.c.val());
    i64 v2 = std::min(x.b.is_zero() ? kInfValuation : x.b.val(), x.d.is_zero() ? kInfValuation : x.d.val());
    Vec2 col = (v1 <= v2) ? Vec2{x.a, x.c} : Vec2{x.b, x.d};
    End e;
    if (col.y.is_zero())
        e = End::infinity();
    else if (col.x.is_zero() || col.x.val() >= col.y.val())
        e = End::at(col.x / col.y);
    else
        e = End::at(col.x / col.y);
    Mat2 nu = nilpotent_of_line(e, p, prec);
    const PAdic* xs[4] = {&x.a, &x.b, &x.c, &x.d};
    const PAdic* ns[4] = {&nu.a, &nu.b, &nu.c, &nu.d};
    for (int i = 0; i < 4; ++i) {
        if (!ns[i]->is_zero() && ns[i]->val() == 0) return {e, *xs[i] / *ns[i]};
    }
    throw Error("extract_rank_one: no unit entry in primitive nilpotent");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Oracle cell context
// ---------------------------------------------------------------------------

struct OracleOptions {
    int K = 0;              // parameter resolution; 0 = derive from (r, t)
    u64 state_budget = 8000000;
    bool stabilize = true;  // rerun at K+1 and compare
};

namespace detail {

inline i64 primitive_root_sq(i64 p) {
    // generator of (Z/p^2)^* for odd p (then of every (Z/p^N)^*)
    u64 m = u64(p) * u64(p);
    u64 order = m - m / u64(p);
    for (u64 g = 2; g < m; ++g) {
        if (g % u64(p) == 0) continue;
        u64 x = 1;
        bool prim = true;
        // check no proper divisor of order gives 1
        for (u64 k = 1; k < order; ++k) {
            x = mulmod(x, g, m);
            if (x == 1) {
                prim = false;
                break;
            }
        }
        x = mulmod(x, g, m);
        if (prim && x == 1) return i64(g);
    }
    throw Error("no primitive root found");
}

} // namespace detail

struct CellCtx {
    i64 p = 2;
    OrderSpec spec;
    i64 r = 0;
    int K = 4;
    int prec = 16;
    EichlerOrder E;
    std::vector<Mat2> moves;   // Gamma_1 generator set, with inverses
    Mat2 w;                    // Atkin-Lehner representative of Gamma_2/Gamma_1

    static CellCtx make(const OrderSpec& spec, i64 r, int K) {
        CellCtx c;
        c.p = spec.p;
        c.spec = spec;
        c.r = r;
        c.K = K;
        c.prec = std::min(int(K + r + spec.t + 10), detail::max_digits(spec.p) - 2);
        c.E = EichlerOrder{spec.p, r};
        c.w = c.E.atkin_lehner(c.prec);
        auto add = [&](Mat2 m) {
            c.moves.push_back(m);
            Mat2 adj = m.adjugate();
            PAdic di = m.det().inv();
            c.moves.push_back(Mat2{adj.a * di, adj.b * di, adj.c * di, adj.d * di});
        };
        const i64 p = spec.p;
        PAdic one = PAdic::from_int(p, 1, c.prec), z = PAdic::zero(p, c.prec);
        for (int j = 0; j <= K + 1; ++j) {
            add(Mat2{one, one.shifted(j), z, one});                 // 1 + p^j e12
            add(Mat2{one, z, one.shifted(r + j), one});             // 1 + p^(r+j) e21
        }
        if (p == 2) {
            for (i64 g : {-1LL, 5LL}) {
                add(Mat2{PAdic::from_int(p, g, c.prec), z, z, one});
                add(Mat2{one, z, z, PAdic::from_int(p, g, c.prec)});
            }
        } else {
            i64 g = detail::primitive_root_sq(p);
            add(Mat2{PAdic::from_int(p, g, c.prec), z, z, one});
            add(Mat2{one, z, z, PAdic::from_int(p, g, c.prec)});
        }
        return c;
    }
};

// ---------------------------------------------------------------------------
// X states (parametrized embeddings)
// ---------------------------------------------------------------------------

/// An optimal-embedding parameter tuple, exact. Nilpotent: the line end and
/// the scale; split: ordered (image, kernel) ends; triangular: the shared
/// image end plus the two kernel ends.
struct XState {
    End a, b, c;
    PAdic scale;
};

struct XKey {
    std::array<u64, 4> k{};
    bool operator==(const XKey& o) const { return k == o.k; }
    bool operator<(const XKey& o) const { return k < o.k; }
};
struct XKeyHash {
    size_t operator()(const XKey& x) const {
        size_t h = 0;
        for (u64 v : x.k) h ^= std::hash<u64>()(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

namespace detail {

inline u64 scale_key(const PAdic& c, i64 p, int digits) {
    // scale valuations in the oracle stay small and nonnegative
    return (u64(c.val() + 64) << 40) | c.unit_mod(std::min(digits, c.precision()));
}

} // namespace detail

class Oracle {
public:
    Oracle(const CellCtx& ctx) : ctx_(ctx) {}

    const CellCtx& ctx() const { return ctx_; }

    XKey key_of(const XState& s) const {
        XKey k;
        switch (ctx_.spec.kind) {
            case OrderKind::Nilpotent:
                k.k[0] = end_key(s.a, ctx_.p, ctx_.K).packed();
                k.k[1] = detail::scale_key(s.scale, ctx_.p, int(std::min<i64>(ctx_.K, ctx_.r + 2)));
                break;
            case OrderKind::SplitCommutative:
                k.k[0] = end_key(s.a, ctx_.p, ctx_.K).packed();
                k.k[1] = end_key(s.b, ctx_.p, ctx_.K).packed();
                break;
            case OrderKind::Triangular:
                k.k[0] = end_key(s.a, ctx_.p, ctx_.K).packed();
                k.k[1] = end_key(s.b, ctx_.p, ctx_.K).packed();
                k.k[2] = end_key(s.c, ctx_.p, ctx_.K).packed();
                break;
            default:
                throw UnsupportedKind("oracle: kind");
        }
        return k;
    }

    /// Generator matrices of the parametrized order (beyond scalars).
    std::vector<Mat2> matrices(const XState& s) const {
        switch (ctx_.spec.kind) {
            case OrderKind::Nilpotent: {
                Mat2 nu = detail::nilpotent_of_line(s.a, ctx_.p, ctx_.prec);
                return {nu.scaled(s.scale)};
            }
            case OrderKind::SplitCommutative: {
                Mat2 P = detail::projector(s.a, s.b, ctx_.p, ctx_.prec);
                PAdic pt = PAdic::from_int(ctx_.p, 1, ctx_.prec).shifted(ctx_.spec.t);
                return {P.scaled(pt)};
            }
            case OrderKind::Triangular: {
                Mat2 P1 = detail::projector(s.a, s.b, ctx_.p, ctx_.prec);
                Mat2 P2 = detail::projector(s.a, s.c, ctx_.p, ctx_.prec);
                PAdic pt = PAdic::from_int(ctx_.p, 1, ctx_.prec).shifted(ctx_.spec.t);
                return {P1.scaled(pt), P2.sub(P1).scaled(pt)};
            }
            default:
                throw UnsupportedKind("oracle: kind");
        }
    }

    /// The optimality filter: exact membership + the minimal-multiplier test
    /// (rank 2) or coefficient-lattice equality (rank 3).
    bool optimal(const XState& s) const {
        switch (ctx_.spec.kind) {
            case OrderKind::Nilpotent: {
                Mat2 x = matrices(s)[0];
                return detail::min_power_into(x, ctx_.E) == 0;
            }
            case OrderKind::SplitCommutative: {
                Mat2 P;
                try {
                    P = detail::projector(s.a, s.b, ctx_.p, ctx_.prec);
                } catch (const IndistinguishableEnds&) {
                    return false;
                }
                return detail::min_power_into(P, ctx_.E) == ctx_.spec.t;
            }
            case OrderKind::Triangular: {
                std::vector<Mat2> g;
                try {
                    g = matrices(s);
                } catch (const IndistinguishableEnds&) {
                    return false;
                }
                if (g[1].is_zero()) return false; // kernels coincide
                if (!ctx_.E.contains(g[0]) || !ctx_.E.contains(g[1])) return false;
                MatrixOrder H{ctx_.p, g};
                return is_optimal(H, ctx_.E);
            }
            default:
                throw UnsupportedKind("oracle: kind");
        }
    }

    XState moved(const XState& s, const Mat2& g) const {
        Moebius m = Moebius::of(g);
        XState t;
        switch (ctx_.spec.kind) {
            case OrderKind::Nilpotent: {
                Mat2 x = matrices(s)[0];
                Mat2 y = detail::conjugate(g, x);
                auto [e, sc] = detail::extract_rank_one(y, ctx_.p, ctx_.prec);
                t.a = e;
                t.scale = sc;
                return t;
            }
            case OrderKind::SplitCommutative:
                t.a = apply_to_end(m, s.a);
                t.b = apply_to_end(m, s.b);
                return t;
            case OrderKind::Triangular:
                t.a = apply_to_end(m, s.a);
                t.b = apply_to_end(m, s.b);
                t.c = apply_to_end(m, s.c);
                return t;
            default:
                throw UnsupportedKind("oracle: kind");
        }
    }

    /// Enumerate all X states at the cell resolution.
    std::vector<XState> enumerate(u64 budget) const {
        std::vector<XState> out;
        const i64 p = ctx_.p;
        auto keys = all_end_keys(p, ctx_.K);
        std::vector<End> ends;
        ends.reserve(keys.size());
        for (const EndKey& k : keys) ends.push_back(end_lift(k, p, ctx_.K, ctx_.prec));
        u64 seen = 0;
        auto bump = [&]() {
            if (++seen > budget) throw OrbitBudgetExceeded("oracle enumeration budget exceeded");
        };
        switch (ctx_.spec.kind) {
            case OrderKind::Nilpotent: {
                int cd = int(std::min<i64>(ctx_.K, ctx_.r + 2));
                u64 um = detail::pow_u64(p, cd);
                for (const End& e : ends) {
                    for (i64 v = 0; v <= ctx_.r; ++v) {
                        for (u64 uu = 1; uu < um; ++uu) {
                            if (uu % u64(p) == 0) continue;
                            bump();
                            XState s;
                            s.a = e;
                            s.scale = PAdic::from_unit(p, v, i64(uu), ctx_.prec);
                            if (optimal(s)) out.push_back(s);
                        }
                    }
                }
                break;
            }
            case OrderKind::SplitCommutative: {
                for (const End& a : ends)
                    for (const End& c : ends) {
                        if (a == c) continue;
                        bump();
                        XState s;
                        s.a = a;
                        s.b = c;
                        if (optimal(s)) out.push_back(s);
                    }
                break;
            }
            case OrderKind::Triangular: {
                // stage on (e, a): the first projector must reach E_r at p^t
                std::vector<std::pair<End, End>> stage;
                for (const End& e : ends)
                    for (const End& a : ends) {
                        if (e == a) continue;
                        bump();
                        Mat2 P;
                        try {
                            P = detail::projector(e, a, p, ctx_.prec);
                        } catch (const IndistinguishableEnds&) {
                            continue;
                        }
                        if (detail::min_power_into(P, ctx_.E) <= ctx_.spec.t) stage.push_back({e, a});
                    }
                for (auto& [e, a] : stage)
                    for (const End& c : ends) {
                        if (c == e || c == a) continue;
                        bump();
                        XState s;
                        s.a = e;
                        s.b = a;
                        s.c = c;
                        if (optimal(s)) out.push_back(s);
                    }
                break;
            }
            default:
                throw UnsupportedKind("oracle: kind");
        }
        return out;
    }

private:
    CellCtx ctx_;
};

} // namespace bt
