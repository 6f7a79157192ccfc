#include "bt/tree.hpp"

#include <random>

#include "catch2/catch_amalgamated.hpp"

using namespace bt;

namespace {
Ball B(i64 p, i64 num, i64 den, i64 n) { return canonical_ball(p, num, den, n); }
Ball B(i64 p, i64 z, i64 n) { return canonical_ball(p, z, 1, n); }
} // namespace

TEST_CASE("canonical_ball reduction") {
    CHECK(B(2, 5, 2) == B(2, 1, 2)); // 5 = 1 mod 4
    CHECK(B(2, 0, 0) == B(2, 4, 0));
    // 1/3 lies in 3^{-1} O, so it reduces to the zero center at level -1.
    CHECK(B(3, 1, 3, -1) == B(3, 0, -1));
    CHECK(B(3, 1, 3, 0) != B(3, 0, 0));
    CHECK(B(3, 1, 3, 0).label() == "B_1/3^[0]");
}

TEST_CASE("ball_distance") {
    CHECK(ball_distance(B(2, 0, 0), B(2, 0, 2)) == 2);
    CHECK(ball_distance(B(2, 0, 2), B(2, 1, 2)) == 4); // meet at B_0^[0]
    CHECK(ball_distance(B(3, 7, 2), B(3, 7, 2)) == 0);
    CHECK(ball_distance(B(2, 1, 1), B(2, 0, 2)) == 3);
}

TEST_CASE("neighbors") {
    auto nb = neighbors(B(2, 0, 0));
    REQUIRE(nb.size() == 3);
    CHECK(nb[0] == B(2, 0, -1));
    CHECK(nb[1] == B(2, 0, 1));
    CHECK(nb[2] == B(2, 1, 1));

    auto nb3 = neighbors(B(3, 2, 1));
    CHECK(nb3.size() == 4);
    for (const Ball& x : nb3) CHECK(ball_distance(x, B(3, 2, 1)) == 1);

    auto nb11 = neighbors(B(2, 1, 1));
    REQUIRE(nb11.size() == 3);
    CHECK(nb11[0] == B(2, 0, 0));
    CHECK(nb11[1] == B(2, 1, 2));
    CHECK(nb11[2] == B(2, 3, 2));
}

TEST_CASE("neighbors of neighbors return home; degree p+1") {
    for (i64 p : {2LL, 3LL}) {
        for (const Ball& v : enumerate_region(B(p, 0, 0), 2)) {
            auto nb = neighbors(v);
            CHECK(i64(nb.size()) == p + 1);
            for (const Ball& w : nb) {
                CHECK(ball_distance(v, w) == 1);
                auto back = neighbors(w);
                CHECK(std::count(back.begin(), back.end(), v) == 1);
            }
        }
    }
}

TEST_CASE("enumerate_region cardinalities") {
    CHECK(enumerate_region(B(2, 0, 0), 0).size() == 1);
    CHECK(enumerate_region(B(2, 0, 0), 1).size() == 4);
    CHECK(enumerate_region(B(3, 0, 0), 2).size() == 17); // 1 + 4*(9-1)/2
    CHECK(enumerate_region(B(2, 1, 3), 3).size() == 1 + 3 * (8 - 1));
}

TEST_CASE("geodesics") {
    Walk w = geodesic(B(2, 0, 0), B(2, 0, 3));
    REQUIRE(w.v.size() == 4);
    for (i64 l = 0; l <= 3; ++l) CHECK(w.v[size_t(l)] == B(2, 0, l));
    CHECK(w.valid());

    Walk x = geodesic(B(2, 1, 1), B(2, 0, 2));
    REQUIRE(x.v.size() == 4);
    CHECK(x.v[0] == B(2, 1, 1));
    CHECK(x.v[1] == B(2, 0, 0));
    CHECK(x.v[2] == B(2, 0, 1));
    CHECK(x.v[3] == B(2, 0, 2));

    // ends inf -> 0 gives the chain B_0^[n]
    Walk y = geodesic(End::infinity(), End::of_int(2, 0, 8), 2);
    REQUIRE(y.v.size() == 5);
    for (size_t i = 0; i < y.v.size(); ++i) CHECK(y.v[i] == B(2, 0, i64(i) - 2));
    CHECK(y.valid());
}

TEST_CASE("metric agrees with geodesic length on a region") {
    for (i64 p : {2LL, 3LL}) {
        auto reg = enumerate_region(B(p, 0, 0), 3);
        std::mt19937_64 rng(5);
        for (int it = 0; it < 200; ++it) {
            const Ball& a = reg[rng() % reg.size()];
            const Ball& b = reg[rng() % reg.size()];
            if (a == b) continue;
            CHECK(geodesic(a, b).length() == ball_distance(a, b));
            CHECK(ball_distance(a, b) == ball_distance(b, a));
        }
    }
}

TEST_CASE("lattice round-trip") {
    const int N = 8;
    for (i64 p : {2LL, 3LL}) {
        for (const Ball& v : enumerate_region(B(p, 0, 0), 3)) {
            CHECK(lattice_to_ball(ball_lattice_roundtrip(v, N)) == v);
        }
    }

    // homothety: basis columns (2,0),(0,2) at p=2 is the class of Lambda_{0,0}
    PAdic two = PAdic::from_int(2, 2, N), z = PAdic::zero(2, N);
    auto tag = lattice_to_ball_tag(Lattice2{Vec2{two, z}, Vec2{z, two}});
    CHECK(tag.ball == B(2, 0, 0));
    CHECK(tag.scale == 1);

    // basis columns (1,1),(0,4) at p=2 -> B_1^[2]
    PAdic one = PAdic::from_int(2, 1, N), four = PAdic::from_int(2, 4, N);
    CHECK(lattice_to_ball(Lattice2{Vec2{one, one}, Vec2{z, four}}) == B(2, 1, 2));

    CHECK_THROWS_AS(lattice_to_ball(Lattice2{Vec2{one, z}, Vec2{four, z}}), DomainViolation);
}

TEST_CASE("hull of triples") {
    const int N = 8;
    Hull h = hull_of({TreeItem(B(2, 0, 1)), TreeItem(B(2, 1, 1)), TreeItem(B(2, 0, -1))}, N);
    REQUIRE(h.center.has_value());
    CHECK(*h.center == B(2, 0, 0));

    CHECK_THROWS_AS(hull_of({TreeItem(B(2, 0, 1)), TreeItem(B(2, 0, 1))}, N), DomainViolation);

    Hull g = hull_of({TreeItem(End::infinity()), TreeItem(End::of_int(2, 0, N)), TreeItem(B(2, 1, 1))}, N);
    REQUIRE(g.center.has_value());
    CHECK(*g.center == B(2, 0, 0));

    Hull m = hull_of({TreeItem(End::infinity()), TreeItem(End::of_int(2, 0, N)), TreeItem(End::of_int(2, 1, N))}, N);
    CHECK(*m.center == B(2, 0, 0));
}

TEST_CASE("hull of quartets: shapes") {
    const int N = 10;
    // Figure 5 style configuration at p = 3: ends a=inf, b=0, c=1, d=1+p^2
    End a = End::infinity();
    End b = End::of_int(3, 0, N);
    End c = End::of_int(3, 1, N);
    End d = End::of_int(3, 1 + 9, N);
    Hull h = hull_of({TreeItem(a), TreeItem(b), TreeItem(c), TreeItem(d)}, N);
    REQUIRE(h.shape.has_value());
    // pairing: {inf, 0} vs {1, 1+9}; central edge from B_0^[0] to B_1^[2]
    CHECK(h.shape->pairing == 1);
    CHECK(h.shape->l == 2);
    REQUIRE(h.center.has_value());
    REQUIRE(h.center2.has_value());
    CHECK(*h.center == B(3, 0, 0));
    CHECK(*h.center2 == B(3, 1, 2));

    // four balls in a row
    Hull ln = hull_of({TreeItem(B(2, 0, -2)), TreeItem(B(2, 0, -1)), TreeItem(B(2, 0, 1)), TreeItem(B(2, 0, 2))}, N);
    REQUIRE(ln.shape.has_value());
    CHECK(ln.shape->pairing == 1);
    CHECK(ln.shape->l == 2);
    CHECK(ln.shape->r == 1);
    CHECK(ln.shape->s == 0);
    CHECK(ln.shape->t == 0);
    CHECK(ln.shape->u == 1);
}

TEST_CASE("indistinguishable ends are refused") {
    End e1 = End::of_int(3, 1, 2);
    End e2 = End::of_int(3, 1 + 27, 2); // differs beyond stored precision
    CHECK_THROWS_AS(end_separation(e1, e2), IndistinguishableEnds);
}
