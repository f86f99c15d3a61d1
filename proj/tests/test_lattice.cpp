#include <doctest.h>

#include <cmath>

#include "bsgaps/lattice.hpp"
#include "bsgaps/rng.hpp"
#include "oracles.hpp"

using namespace bsgaps;

namespace {

Vecd vd(std::initializer_list<double> xs) {
    Vecd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

} // namespace

TEST_CASE("wedge norm basics") {
    CHECK(wedge_norm({vd({1, 0, 0}), vd({0, 1, 0})}) == doctest::Approx(1.0));
    CHECK(wedge_norm({vd({1, 0}), vd({1, 1})}) == doctest::Approx(1.0));
    CHECK(wedge_norm({vd({1, 2}), vd({2, 4})}) == doctest::Approx(0.0));
    CHECK(wedge_norm_int({{1, 2}, {2, 4}}) == 0.0);
    CHECK_THROWS_AS(wedge_norm({}), InvalidArity);
    CHECK_THROWS_AS(wedge_norm({vd({1, 0}), vd({0, 1}), vd({1, 1})}), InvalidArity);
}

TEST_CASE("wedge norm elementary-transformation invariance") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Vecd> vs;
        for (int i = 0; i < 2; ++i) {
            Vecd v(3);
            for (int t = 0; t < 3; ++t) v(t) = rng.uniform(-3, 3);
            vs.push_back(v);
        }
        const double base = wedge_norm(vs);
        auto added = vs;
        added[0] += added[1];
        CHECK(wedge_norm(added) == doctest::Approx(base).epsilon(1e-9));
        auto scaled = vs;
        scaled[1] *= -2.5;
        CHECK(wedge_norm(scaled) == doctest::Approx(2.5 * base).epsilon(1e-9));
    }
}

TEST_CASE("shortest orthogonal vector on the worked examples") {
    const IntegerLattice z2 = integer_lattice_zd(2);
    const auto a = shortest_orthogonal_vector(z2, {{1, 0}});
    CHECK(a.theta == IntVec{0, 1});
    CHECK(norm(a.theta) <= a.bound);
    CHECK(a.bound == doctest::Approx(4.0));

    const IntegerLattice z3 = integer_lattice_zd(3);
    const auto b = shortest_orthogonal_vector(z3, {{1, 1, 0}, {0, 1, 1}});
    CHECK(b.theta == IntVec{1, -1, 1});
    CHECK(norm(b.theta) == doctest::Approx(std::sqrt(3.0)));

    const auto c = shortest_orthogonal_vector(z2, {{3, 4}});
    CHECK(c.theta == IntVec{4, -3});
    CHECK(norm(c.theta) == doctest::Approx(5.0));
    CHECK(c.bound == doctest::Approx(20.0));

    CHECK_THROWS_AS(shortest_orthogonal_vector(z3, IntMat{{1, 1, 0}, {2, 2, 0}}), InvalidInput);
}

TEST_CASE("seeded trials match the exhaustive oracle") {
    Rng root(2024);
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const LatticeTrial t = random_lattice_trial(root.next_u64(), 4, 5.0);
        const auto result = shortest_orthogonal_vector(t.lattice, t.nus);
        CHECK(result.ratio <= 1.0 + 1e-12);
        const double r = norm(result.theta);
        if (r <= 40.0) {
            const auto oracle = oracles::brute_shortest_orthogonal(
                t.lattice.basis, t.nus, t.lattice.ambientDim, r + 0.5);
            REQUIRE(oracle.has_value());
            CHECK(*oracle == result.theta);
            ++checked;
        }
    }
    CHECK(checked >= 100); // the caps keep almost every instance enumerable
}

TEST_CASE("orthogonal sublattice basis") {
    const IntegerLattice z3 = integer_lattice_zd(3);
    const auto a = orthogonal_sublattice_basis(z3, {{1, 0, 0}});
    REQUIRE(a.thetas.size() == 2);
    CHECK(norm(a.thetas[0]) * norm(a.thetas[1]) == doctest::Approx(1.0));
    for (const auto& th : a.thetas) CHECK(th[0] == 0);

    const auto b = orthogonal_sublattice_basis(z3, {{1, 1, 1}});
    REQUIRE(b.thetas.size() == 2);
    CHECK(norm2_exact(b.thetas[0]) == 2);
    CHECK(norm2_exact(b.thetas[1]) == 2);
    CHECK(norm(b.thetas[0]) * norm(b.thetas[1]) == doctest::Approx(2.0));

    const IntegerLattice z2 = integer_lattice_zd(2);
    const auto c = orthogonal_sublattice_basis(z2, {{1, 0}});
    REQUIRE(c.thetas.size() == 1);
    CHECK(c.thetas[0] == IntVec{0, 1});
}

TEST_CASE("angle between a vector and a subspace") {
    CHECK(angle_vector_subspace({0, 1}, {{1, 0}}) == doctest::Approx(1.5707963267948966));
    CHECK(angle_vector_subspace({1, 1}, {{1, 0}}) == doctest::Approx(0.7853981633974483));
    CHECK_THROWS_AS(angle_vector_subspace({2, 4}, {{1, 2}}), DependentInput);

    // metric variant: F scales the angle but keeps it positive
    Matd g(2, 2);
    g << 4, 0, 0, 1;
    const Metric metric = metric_from_G(g);
    const double a = angle_vector_subspace({1, 1}, {{1, 0}}, &metric);
    CHECK(a == doctest::Approx(std::atan2(1.0, 2.0)));
}

TEST_CASE("exhaustive d=2 angle lower bound") {
    const auto pts = enumerate_ball(2, 5.0);
    double worst = 1e9;
    for (const auto& mu : pts) {
        if (is_zero(mu)) continue;
        for (const auto& th : pts) {
            if (is_zero(th)) continue;
            if (gram_det_exact({th, mu}) <= 0) continue;
            const double angle = angle_vector_subspace(mu, {th});
            worst = std::min(worst, std::sin(angle) * norm(th) * norm(mu));
        }
    }
    CHECK(worst >= 1.0 - 1e-9);
}

TEST_CASE("distance from a vector to a subspace") {
    CHECK(distance_vector_subspace({0, 1}, {{1, 0}}) == doctest::Approx(1.0));
    CHECK(distance_vector_subspace({0, 0, 1}, {{1, 0, 0}, {0, 1, 0}}) == doctest::Approx(1.0));
    CHECK(distance_vector_subspace({1, 1}, {{2, 1}}) == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK_THROWS_AS(distance_vector_subspace({2, 1}, {{2, 1}}), DependentInput);
}

TEST_CASE("distance lower bound scales like R^{-n}") {
    // exact: dist * |theta| = |det| >= 1 for independent integer pairs, so
    // min over B(R) of dist * R >= 1 for every radius
    for (double r : {2.0, 3.0, 5.0, 8.0}) {
        const auto pts = enumerate_ball(2, r);
        double worst = 1e18;
        for (const auto& mu : pts) {
            if (is_zero(mu)) continue;
            for (const auto& th : pts) {
                if (is_zero(th) || gram_det_exact({th, mu}) <= 0) continue;
                worst = std::min(worst, distance_vector_subspace(mu, {th}));
            }
        }
        CHECK(worst * r >= 1.0 - 1e-9);
    }
    // d = 3, two-vector subspaces: dist = wedge(mu,t1,t2)/wedge(t1,t2) >= 1/R^2
    const auto pts3 = enumerate_ball(3, 2.0);
    double worst3 = 1e18;
    for (const auto& mu : pts3) {
        if (is_zero(mu)) continue;
        for (const auto& t1 : pts3)
            for (const auto& t2 : pts3) {
                if (is_zero(t1) || is_zero(t2)) continue;
                IntMat all{t1, t2, mu};
                if (gram_det_exact({t1, t2}) <= 0 || gram_det_exact(all) <= 0) continue;
                worst3 = std::min(worst3, distance_vector_subspace(mu, {t1, t2}));
            }
    }
    CHECK(worst3 * 4.0 >= 1.0 - 1e-9);
}

TEST_CASE("subspace angles and the wedge-ratio bound") {
    const auto a = subspace_angle({{1, 0, 0}}, {{1, 1, 0}});
    CHECK(a.angle == doctest::Approx(0.7853981633974483));
    CHECK(std::sin(a.angle) >= a.sinLowerBound - 1e-12);

    const auto b = subspace_angle({{1, 0, 0}}, {{0, 1, 0}});
    CHECK(b.angle == doctest::Approx(1.5707963267948966));
    CHECK(b.sinLowerBound == doctest::Approx(1.0));

    const auto c = subspace_angle({{1, 0, 0}, {0, 1, 0}}, {{0, 0, 1}});
    CHECK(c.angle == doctest::Approx(1.5707963267948966));

    CHECK_THROWS_AS(subspace_angle({{1, 0, 0}, {0, 1, 0}}, {{1, 1, 0}}), DependentInput);
}

TEST_CASE("integer subspace intersection") {
    const auto a = intersect_integer_subspaces({{1, 0, 0}, {0, 1, 0}}, {{0, 1, 0}, {0, 0, 1}}, 1.0);
    REQUIRE(a.basis.size() == 1);
    CHECK(a.basis[0] == IntVec{0, 1, 0});

    const auto b = intersect_integer_subspaces({{1, 0, 0}, {0, 1, 0}}, {{1, 1, 1}, {1, -1, 0}}, 2.0);
    REQUIRE(b.basis.size() == 1);
    IntVec v = b.basis[0];
    sign_normalize(v);
    CHECK(v == IntVec{1, -1, 0});

    const auto c = intersect_integer_subspaces({{1, 0}}, {{0, 1}}, 1.0);
    CHECK(c.basis.empty());
}

TEST_CASE("random intersections agree with a membership oracle") {
    Rng rng(314);
    int nontrivial = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto draw = [&](int count) {
            IntMat m;
            while (static_cast<int>(m.size()) < count) {
                IntVec v(3);
                for (auto& x : v) x = rng.uniform_int(-2, 2);
                if (is_zero(v)) continue;
                IntMat probe = m;
                probe.push_back(v);
                if (gram_det_exact(probe) > 0) m.push_back(v);
            }
            return m;
        };
        const IntMat v1 = draw(2);
        const IntMat v2 = draw(static_cast<int>(rng.uniform_int(1, 2)));
        const auto res = intersect_integer_subspaces(v1, v2, 3.0);
        nontrivial += res.basis.empty() ? 0 : 1;
        for (const auto& p : enumerate_ball(3, 3.0)) {
            if (is_zero(p)) continue;
            const bool inBoth = rational_coordinates(v1, p).has_value() &&
                                rational_coordinates(v2, p).has_value();
            bool inResult = false;
            if (!res.basis.empty()) {
                const auto coords = rational_coordinates(res.basis, p);
                if (coords) {
                    inResult = true;
                    for (const auto& c : *coords)
                        if (!c.is_integer()) inResult = false;
                }
            }
            CHECK(inBoth == inResult);
        }
    }
    CHECK(nontrivial >= 5);
}

TEST_CASE("intersection basis is saturated") {
    const auto res = intersect_integer_subspaces({{2, 0, 0}, {0, 2, 0}}, {{2, 2, 0}, {0, 0, 1}}, 2.0);
    REQUIRE(!res.basis.empty());
    // every integer point of the intersection inside a small ball must lie in
    // the integer span of the returned basis
    for (const auto& p : enumerate_ball(3, 3.0)) {
        if (is_zero(p)) continue;
        const bool inV1 = rational_coordinates({{2, 0, 0}, {0, 2, 0}}, p).has_value();
        const bool inV2 = rational_coordinates({{2, 2, 0}, {0, 0, 1}}, p).has_value();
        if (!inV1 || !inV2) continue;
        const auto coords = rational_coordinates(res.basis, p);
        REQUIRE(coords.has_value());
        for (const auto& c : *coords) CHECK(c.is_integer());
    }
}
