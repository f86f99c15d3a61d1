#include <doctest.h>

#include <cmath>

#include "bsgaps/perturbation.hpp"
#include "bsgaps/rng.hpp"

using namespace bsgaps;

namespace {

// worked 2x2 instance with closed-form eigenvalues: H0 = diag(0, c),
// V = [[0,3],[3,0]], A = diag(0, 2), blocks {0} and {1}
PerturbationInstance two_by_two(double c) {
    PerturbationInstance inst;
    inst.N = 2;
    inst.h0 = Vecd::Zero(2);
    inst.h0(1) = c;
    inst.v = Matd::Zero(2, 2);
    inst.v(0, 1) = 3.0;
    inst.v(1, 0) = 3.0;
    inst.a = Matd::Zero(2, 2);
    inst.a(1, 1) = 2.0;
    inst.blocks = {{0, 1}, {1, 2}};
    inst.targetIndex = 0;
    return inst;
}

} // namespace

TEST_CASE("lemma-1 bound arithmetic") {
    // n = 0: a single block, bound = a
    PerturbationInstance flat;
    flat.N = 2;
    flat.h0 = Vecd::Zero(2);
    flat.v = Matd::Zero(2, 2);
    flat.v(0, 1) = 3.0;
    flat.v(1, 0) = 3.0;
    flat.a = Matd::Zero(2, 2);
    flat.a(0, 0) = 2.0;
    flat.a(1, 1) = 2.0;
    flat.blocks = {{0, 2}};
    flat.targetIndex = 0;
    CHECK(lemma1_bound(flat) == doctest::Approx(5.0).epsilon(1e-13)); // ||V|| + ||A|| = 3 + 2

    // n = 1 with a = 5, a_1 = 90: 4 * 125 / 6400
    // (c + sqrt(c^2+36))/2 = 90 fixes c
    const double c = (32400.0 - 36.0) / 360.0;
    const PerturbationInstance inst = two_by_two(c);
    const InstanceNorms norms = instance_norms(inst);
    CHECK(norms.a == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(norms.aj[0] == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(lemma1_bound(inst) == doctest::Approx(0.078125).epsilon(1e-10));
}

TEST_CASE("worked verification at H0 = diag(0, 100)") {
    const PerturbationInstance inst = two_by_two(100.0);
    const Lemma1Report rep = verify_lemma1(inst);
    // closed-form quadratic roots
    const double mu = 50.0 - std::sqrt(2500.0 + 9.0);
    const double muHat = 51.0 - std::sqrt(51.0 * 51.0 + 9.0);
    CHECK(rep.muL == doctest::Approx(mu).epsilon(1e-12));
    CHECK(rep.muHatL == doctest::Approx(muHat).epsilon(1e-12));
    const double a1 = 100.0 - mu;
    CHECK(rep.bound == doctest::Approx(4.0 * 125.0 / ((a1 - 10.0) * (a1 - 10.0))).epsilon(1e-12));
    CHECK(rep.bound <= 4.0 * 125.0 / (90.0 * 90.0) + 1e-12);
    CHECK(rep.pass);
}

TEST_CASE("A = 0 gives a zero gap") {
    PerturbationInstance inst = two_by_two(100.0);
    inst.a.setZero();
    const Lemma1Report rep = verify_lemma1(inst);
    CHECK(rep.gap <= 1e-12);
    CHECK(rep.pass);
}

TEST_CASE("inadmissible margins are rejected") {
    PerturbationInstance inst = two_by_two(5.0); // a_1 barely above a
    CHECK_THROWS_AS(lemma1_bound(inst), InadmissibleInstance);
}

TEST_CASE("seeded instances are deterministic and admissible") {
    const PerturbationInstance a = random_instance(77, 24, 4, 0.5, 40.0);
    const PerturbationInstance b = random_instance(77, 24, 4, 0.5, 40.0);
    CHECK(a.N == b.N);
    CHECK((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.h0 - b.h0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.targetIndex == b.targetIndex);
    CHECK(instance_norms(a).admissible);

    const PerturbationInstance quiet = random_instance(5, 16, 3, 0.0, 30.0);
    CHECK(spectral_norm_sym(quiet.v) == 0.0);
}

TEST_CASE("lemma-1 holds over a seeded batch") {
    Rng root(4242);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        const PerturbationInstance inst = random_instance(root.next_u64(), 40, 5, 0.5, 40.0);
        const Lemma1Report rep = verify_lemma1(inst);
        CHECK(rep.pass);
        if (rep.bound > 0.0) worst = std::max(worst, rep.gap / rep.bound);
    }
    CHECK(worst <= 1.0);
}

TEST_CASE("shrinking A shrinks the measured shift") {
    const PerturbationInstance base = random_instance(91, 24, 3, 0.5, 50.0);
    double prevGap = 1e9;
    for (double t : {1.0, 0.5, 0.25}) {
        PerturbationInstance scaled = base;
        scaled.a *= t;
        const Lemma1Report rep = verify_lemma1(scaled);
        CHECK(rep.pass);
        CHECK(rep.gap <= prevGap + 1e-12);
        prevGap = rep.gap;
    }
}

TEST_CASE("lemma-2 trivial cases") {
    // V = 0: H~ = H exactly
    Lemma2Instance inst = random_lemma2_instance(3, 2, 2, 0.0);
    const Lemma2Report rep = verify_lemma2(inst);
    CHECK(rep.worstGap <= 1e-12);
    CHECK(rep.boundHolds);
    CHECK(rep.exclusionHolds);
    CHECK(rep.indexShiftHolds);
}

TEST_CASE("single family spanning everything") {
    Lemma2Instance inst;
    inst.N = 3;
    inst.h0 = Vecd::Zero(3);
    inst.h0 << -1.0, 0.5, 1.5;
    inst.v = Matd::Zero(3, 3);
    inst.v(0, 1) = 0.2;
    inst.v(1, 0) = 0.2;
    inst.v(1, 2) = 0.1;
    inst.v(2, 1) = 0.1;
    inst.v(0, 2) = 0.05;
    inst.v(2, 0) = 0.05;
    inst.chains = {{{0, 3}}}; // one family, one block
    inst.q = {3, 3};
    inst.lambda1 = -3.0;
    inst.lambda2 = 3.0;
    const Lemma2Report rep = verify_lemma2(inst);
    CHECK(rep.worstGap <= 1e-12);
    CHECK(rep.boundHolds);
    CHECK(rep.indexShiftHolds);
}

TEST_CASE("lemma-2 holds over a seeded batch") {
    Rng root(555);
    for (int trial = 0; trial < 25; ++trial) {
        const Lemma2Instance inst = random_lemma2_instance(root.next_u64(), 3, 3, 0.3);
        const Lemma2Report rep = verify_lemma2(inst);
        CHECK(rep.marginsHold);
        CHECK(rep.boundHolds);
        CHECK(rep.exclusionHolds);
        CHECK(rep.indexShiftHolds);
    }
}
