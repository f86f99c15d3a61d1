#include <doctest.h>

#include <cmath>

#include "bsgaps/spectral.hpp"

using namespace bsgaps;

TEST_CASE("free first band is [0, 1/2]") {
    const Metric id = metric_identity(2);
    const FourierPotential zero = zero_potential(2);
    const auto grid = uniform_k_grid(2, 24); // contains the corner (1/2, 1/2)
    const BandTable table = band_table(grid, 4.0, zero, id, 7.0);
    const auto bands = band_intervals(table);
    REQUIRE(!bands.empty());
    CHECK(bands[0].lo == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(bands[0].hi == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bands[0].uncertainty > 0.0);
}

TEST_CASE("one-point grid gives degenerate intervals") {
    const Metric id = metric_identity(2);
    const BandTable table = band_table({Vecd::Zero(2)}, 4.0, zero_potential(2), id, 7.0);
    const auto bands = band_intervals(table);
    for (const auto& b : bands) {
        CHECK(b.lo == b.hi);
        CHECK(b.uncertainty == 0.0);
    }
}

TEST_CASE("refinement never widens the uncertainty") {
    const Metric id = metric_identity(2);
    const FourierPotential pot = cos_potential(2, 2);
    const auto grid = uniform_k_grid(2, 6);
    const BandTable table = band_table(grid, 4.0, pot, id, 7.0);
    const auto plain = band_intervals(table);
    const auto refined = band_intervals(table, true, &pot, &id, 6);
    REQUIRE(plain.size() == refined.size());
    for (std::size_t j = 0; j < plain.size(); ++j) {
        CHECK(refined[j].uncertainty <= plain[j].uncertainty + 1e-15);
        CHECK(refined[j].lo <= plain[j].lo + 1e-12);
        CHECK(refined[j].hi >= plain[j].hi - 1e-12);
    }
}

TEST_CASE("free spectrum has no gaps") {
    const Metric id = metric_identity(2);
    const auto grid = uniform_k_grid(2, 16);
    const BandTable table = band_table(grid, 6.0, zero_potential(2), id, 12.0);
    const auto bands = band_intervals(table);
    const auto gaps = detect_gaps(bands, 0.0, 12.0, 18.0);
    for (const auto& g : gaps) CHECK(!g.resolved);
    CHECK_THROWS_AS(detect_gaps(bands, 0.0, 50.0, 18.0), Uncertified);
}

TEST_CASE("overlap function and multiplicity") {
    std::vector<BandInterval> bands;
    bands.push_back({1, 0.0, 10.0, 0.01});
    bands.push_back({2, 12.0, 14.0, 0.01});
    CHECK(overlap_function(bands, 11.0) == 0.0);
    CHECK(overlap_multiplicity(bands, 11.0) == 0);
    CHECK(overlap_function(bands, 4.0) == doctest::Approx(4.0));
    CHECK(overlap_multiplicity(bands, 4.0) == 1);
    // m >= 1 wherever zeta > 0
    for (double lambda : {0.5, 4.0, 9.9, 12.5, 13.9})
        if (overlap_function(bands, lambda) > 0.0)
            CHECK(overlap_multiplicity(bands, lambda) >= 1);
}

TEST_CASE("gap/band complementarity over the window") {
    const Metric id = metric_identity(2);
    const FourierPotential pot = cos_potential(2, 2);
    const auto grid = uniform_k_grid(2, 12);
    const BandTable table = band_table(grid, 6.0, pot, id, 12.0);
    const auto bands = band_intervals(table);
    const auto gaps = detect_gaps(bands, 0.0, 12.0, 18.0);
    // bands (clamped) plus gaps tile the window
    double measure = 0.0;
    for (const auto& g : gaps) measure += g.hi - g.lo;
    // union of clamped band coverage
    std::vector<std::pair<double, double>> segs;
    for (const auto& b : bands) {
        const double lo = std::max(b.lo, 0.0), hi = std::min(b.hi, 12.0);
        if (hi > lo) segs.push_back({lo, hi});
    }
    std::sort(segs.begin(), segs.end());
    double covered = 0.0, cursor = 0.0;
    for (const auto& [lo, hi] : segs) {
        if (hi <= cursor) continue;
        covered += hi - std::max(lo, cursor);
        cursor = std::max(cursor, hi);
    }
    CHECK(measure + covered == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("band functions are grid-Lipschitz") {
    // adjacent-node variation is bounded by step * max gradient, with
    // |grad lambda_j| <= 2 sqrt(gmax * keepLimit) for plane-wave sections
    const Metric id = metric_identity(2);
    const FourierPotential pot = cos_potential(2, 2);
    const int n = 10;
    const auto grid = uniform_k_grid(2, n);
    const BandTable table = band_table(grid, 5.0, pot, id, 10.0);
    const auto bands = band_intervals(table, false, nullptr, nullptr, n);
    const double gradCap = 2.0 * std::sqrt(id.gmax * table.keepLimit) + 2.0 * id.gmax;
    for (const auto& b : bands)
        CHECK(b.uncertainty <= gradCap / n + 1e-9);
}

TEST_CASE("no-gap windows always contain spectrum") {
    // with no gaps in the window, every symmetric slab catches eigenvalues
    const Metric id = metric_identity(2);
    const FourierPotential zero = zero_potential(2);
    const double radius = std::sqrt(60.0) + 6.0;
    for (double lambda : {20.0, 50.0}) {
        const double delta = 0.5;
        const double hi = integrated_density_of_states(zero, id, lambda + delta, 24, radius);
        const double lo = integrated_density_of_states(zero, id, lambda - delta, 24, radius);
        CHECK(hi - lo > 0.0);
    }
}

TEST_CASE("integrated density of states approaches the Weyl term") {
    const Metric id = metric_identity(2);
    const FourierPotential zero = zero_potential(2);
    const double n50 = integrated_density_of_states(zero, id, 50.0, 32, std::sqrt(50.0) + 12.0);
    CHECK(std::abs(n50 - 3.14159265358979323846 * 50.0) <= 0.05 * 3.14159265358979323846 * 50.0);
    // monotone in lambda
    const double n40 = integrated_density_of_states(zero, id, 40.0, 32, std::sqrt(50.0) + 12.0);
    CHECK(n40 <= n50);
    CHECK_THROWS_AS(integrated_density_of_states(zero, id, 50.0, 8, 5.0), Uncertified);
}

TEST_CASE("cluster check rows and slope shape") {
    const Metric id = metric_identity(2);
    const FourierPotential zero = zero_potential(2);
    const ClusterCheck cc = cluster_check(zero, id, {50.0, 100.0}, 1, 24, 8.0);
    CHECK(cc.predictedExponent == doctest::Approx(-1.0));
    REQUIRE(cc.rows.size() == 2);
    for (const auto& row : cc.rows) CHECK(row.count >= 0.0);
    // a large n empties the window at desk lambda
    const ClusterCheck tight = cluster_check(zero, id, {50.0}, 6, 8, 6.0);
    CHECK(tight.rows[0].count == 0.0);
}

TEST_CASE("zeta scaling rows") {
    std::vector<BandInterval> bands;
    bands.push_back({1, 0.0, 30.0, 0.01});
    std::vector<Gap> gaps;
    gaps.push_back({30.0, 31.0, false, 0.6});
    const auto rows = zeta_scaling_check(bands, gaps, 2, {20.0, 30.5, 40.0});
    REQUIRE(rows.size() == 3);
    CHECK(!rows[0].skipped);
    CHECK(rows[0].scaled == doctest::Approx(10.0 * std::sqrt(20.0)));
    CHECK(rows[1].skipped); // unresolved region
    CHECK(rows[2].skipped); // inside a gap
}

TEST_CASE("a strong potential opens low gaps (exploratory, reported only)") {
    const Metric id = metric_identity(2);
    const FourierPotential strong = cos_potential(2, 2, 5.0); // v = 20
    const auto grid = uniform_k_grid(2, 16);
    const BandTable table = band_table(grid, 8.0, strong, id, 20.0);
    const auto bands = band_intervals(table);
    const auto gaps = detect_gaps(bands, -10.0, 20.0, 32.0);
    // outside any asymptotic statement; just confirm the machinery reports
    // a coherent picture (every gap sits between band coverage)
    for (const auto& g : gaps) CHECK(g.hi > g.lo);
    MESSAGE("strong-potential resolved gaps: ",
            std::count_if(gaps.begin(), gaps.end(), [](const Gap& g) { return g.resolved; }));
}

TEST_CASE("gaps pipeline end to end at desk scale") {
    const Metric id = metric_identity(2);
    const FourierPotential pot = cos_potential(2, 2);
    const SpectralReport rep = gaps_pipeline(pot, id, 0.0, 25.0, 10, 4.0, 2);
    CHECK(rep.cutoffRadius == doctest::Approx(std::sqrt(25.0) + 4.0));
    CHECK(rep.certifiedLambdaMax > 25.0);
    CHECK(!rep.bands.empty());
    // window is covered by bands and gaps jointly; zeta positive mid-band
    const double zeta = overlap_function(rep.bands, 20.0);
    CHECK(zeta >= 0.0);
    CHECK_THROWS_AS(gaps_pipeline(pot, id, 0.0, 25.0, 6, 0.2, 1), Uncertified);
}
