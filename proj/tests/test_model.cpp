#include <doctest.h>

#include <cmath>

#include "bsgaps/bloch.hpp"
#include "bsgaps/model.hpp"

using namespace bsgaps;

TEST_CASE("metric square roots") {
    const Metric id = metric_identity(2);
    CHECK((id.F - Matd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);

    Matd g = Matd::Zero(2, 2);
    g(0, 0) = 4;
    g(1, 1) = 9;
    const Metric diag = metric_from_G(g);
    CHECK(diag.F(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(diag.F(1, 1) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(std::abs(diag.F(0, 1)) <= 1e-13);

    Matd mixed(2, 2);
    mixed << 2, 1, 1, 2;
    const Metric m = metric_from_G(mixed);
    CHECK(((m.F * m.F) - mixed).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("metric rejections carry the offending eigenvalue") {
    Matd notsym(2, 2);
    notsym << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(metric_from_G(notsym), InvalidMetric);
    Matd notpd(2, 2);
    notpd << 1, 2, 2, 1; // eigenvalues 3 and -1
    CHECK_THROWS_AS(metric_from_G(notpd), InvalidMetric);
}

TEST_CASE("potential validation") {
    CHECK_THROWS_AS(make_potential(2, {{IntVec{0, 0}, 1.0}}), InvalidPotential);
    CHECK_THROWS_AS(make_potential(2, {{IntVec{1, 0}, 1.0}}), InvalidPotential); // odd
    const FourierPotential cos2 = cos_potential(2, 2);
    CHECK(cos2.normBound == doctest::Approx(4.0));
    CHECK(cos2.supportRadius == doctest::Approx(1.0));
    CHECK(cos2.coeff({1, 0}) == 1.0);
    CHECK(cos2.coeff({2, 0}) == 0.0);
}

TEST_CASE("normBound dominates the multiplication operator in a section") {
    const Metric metric = metric_identity(2);
    const FourierPotential pot = cos_potential(2, 2);
    const BlochBasis basis = build_basis(Vecd::Zero(2), 4.0, metric);
    Matd h = assemble(basis, pot, metric);
    for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = 0.0; // off-diagonal part
    CHECK(spectral_norm_sym(h) <= pot.normBound + 1e-12);
}

TEST_CASE("spectral window examples") {
    const FourierPotential zero = zero_potential(2);
    const SpectralWindow w0 = derive_spectral_window(10.0, zero);
    CHECK(w0.j_lo() == 100.0);
    CHECK(w0.j_hi() == 100.0);

    FourierPotential v2 = cos_potential(2, 1); // v = 2
    const SpectralWindow w2 = derive_spectral_window(10.0, v2);
    CHECK(w2.j_lo() == doctest::Approx(60.0));
    CHECK(w2.j_hi() == doctest::Approx(140.0));
    const Metric metric = metric_identity(2);
    Vecd edge(2);
    edge << std::sqrt(179.999), 0.0; // |xi|^2 just inside lambda + 80
    CHECK(w2.in_annulus_wide(metric, edge));
    Vecd outside(2);
    outside << std::sqrt(180.1), 0.0;
    CHECK(!w2.in_annulus_wide(metric, outside));

    const SpectralWindow w100 = derive_spectral_window(100.0, v2);
    Vecd narrow(2);
    narrow << std::sqrt(10039.999), 0.0;
    CHECK(w100.in_annulus_narrow(metric, narrow));
    narrow(0) = std::sqrt(10041.0);
    CHECK(!w100.in_annulus_narrow(metric, narrow));

    CHECK_THROWS_AS(derive_spectral_window(0.0, zero), InvalidParameter);
}

TEST_CASE("region parameter ladder for d = 2, 3, 4") {
    for (int d : {2, 3, 4}) {
        const RegionParameters rp = region_parameters(d, 50.0, 1.0);
        CHECK(rp.p == doctest::Approx(1.0 / (9.0 * d)));
        for (int n = 0; n < d; ++n)
            CHECK(rp.qn[static_cast<std::size_t>(n + 1)] >=
                  rp.qn[static_cast<std::size_t>(n)] + 3.0 * rp.p - 1e-15);
        CHECK(rp.qn[static_cast<std::size_t>(d)] <= 1.0 / 3.0 + 1e-15);
        CHECK(rp.qn[1] >= 3.0 * rp.p - 1e-15);
        CHECK(rp.K == doctest::Approx(std::pow(50.0, rp.p)));
        // rescaling rho rescales K and L_n consistently
        const RegionParameters rp2 = region_parameters(d, 200.0, 1.0);
        CHECK(rp2.K == doctest::Approx(std::pow(200.0, rp.p)));
        CHECK(rp2.Ln[1] == doctest::Approx(std::pow(200.0, rp.qn[1])));
    }
    CHECK_THROWS_AS(region_parameters(2, 50.0, 1.0, 2), InvalidParameter);
}

TEST_CASE("potential JSON loader applies Hermitian closure") {
    const std::string text = R"({"dim": 2, "G": [[1,0],[0,1]],
        "coeffs": [{"m": [1,0], "re": 0.5}, {"m": [0,1], "re": 0.25}, {"m": [0,-1], "re": 0.25}]})";
    const PotentialFile pf = parse_potential_json(text);
    CHECK(pf.potential.coeff({-1, 0}) == 0.5); // filled by closure
    CHECK(pf.potential.normBound == doctest::Approx(1.5));

    CHECK_THROWS_AS(parse_potential_json("{"), InvalidPotential);
    CHECK_THROWS_AS(parse_potential_json(
                        R"({"dim": 2, "coeffs": [{"m": [1,0], "re": 1, "im": 0.1}]})"),
                    InvalidPotential);
    CHECK_THROWS_AS(parse_potential_json(
                        R"({"dim": 2, "coeffs": [{"m": [1,0], "re": 1}, {"m": [-1,0], "re": 2}]})"),
                    InvalidPotential);
}

TEST_CASE("constant potential shift moves the whole spectrum") {
    const Metric metric = metric_identity(2);
    const FourierPotential pot = cos_potential(2, 2);
    Vecd k(2);
    k << 0.3, 0.1;
    const BlochBasis basis = build_basis(k, 3.0, metric);
    const Matd h = assemble(basis, pot, metric);
    const double c = 1.75;
    const Matd shifted = h + c * Matd::Identity(h.rows(), h.cols());
    const Vecd a = eigenvalues(h);
    const Vecd b = eigenvalues(shifted);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        CHECK(b(i) - a(i) == doctest::Approx(c).epsilon(1e-12));
}
