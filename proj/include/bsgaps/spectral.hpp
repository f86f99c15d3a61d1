#pragma once

#include <string>
#include <vector>

#include "bsgaps/bloch.hpp"
#include "bsgaps/model.hpp"

namespace bsgaps {

struct BandInterval {
    int j = 0; // 1-based band index
    double lo = 0.0;
    double hi = 0.0;
    double uncertainty = 0.0; // max adjacent-node variation over the grid
};

// Per-band [min, max] over the grid with the grid-resolution uncertainty.
// If `refine` is set, a golden-section line search around each extremizing
// node (along the grid axes) tightens the endpoints; refinement never widens
// the reported uncertainty.
std::vector<BandInterval> band_intervals(const BandTable& table, bool refine = false,
                                         const FourierPotential* potential = nullptr,
                                         const Metric* metric = nullptr, int gridN = 0);

struct Gap {
    double lo = 0.0;
    double hi = 0.0;
    bool resolved = false; // width exceeds twice the endpoint uncertainty
    double uncertainty = 0.0;
};

// Complement of the band union inside (windowLo, windowHi]; gaps narrower
// than twice the local uncertainty are flagged unresolved, not asserted.
std::vector<Gap> detect_gaps(const std::vector<BandInterval>& bands, double windowLo,
                             double windowHi, double certifiedLambdaMax);

// zeta(lambda): largest t with [lambda - t, lambda + t] inside one band
double overlap_function(const std::vector<BandInterval>& bands, double lambda);

// m(lambda): number of bands containing lambda
int overlap_multiplicity(const std::vector<BandInterval>& bands, double lambda);

// N(lambda) on a midpoint k-grid; cutoffRadius is the absolute plane-wave
// radius and must certify lambda (lambda < 0.5 cutoff^2).
double integrated_density_of_states(const FourierPotential& potential, const Metric& metric,
                                    double lambda, int kGridN, double cutoffRadius,
                                    int threads = 1);

struct ClusterRow {
    double lambda = 0.0;
    double delta = 0.0; // lambda^{-n}
    double count = 0.0; // N(lambda + delta) - N(lambda - delta)
};

struct ClusterCheck {
    std::vector<ClusterRow> rows;
    double slope = 0.0;          // log-log fit of count against lambda
    double predictedExponent = 0.0; // d/2 - n - 1
    bool slopeValid = false;
};

ClusterCheck cluster_check(const FourierPotential& potential, const Metric& metric,
                           const std::vector<double>& lambdaList, int n, int kGridN,
                           double cutoffMargin, int threads = 1);

struct ZetaRow {
    double lambda = 0.0;
    double zeta = 0.0;
    double scaled = 0.0; // zeta * lambda^{(d-1)/2}
    bool skipped = false;
    std::string note;
};

std::vector<ZetaRow> zeta_scaling_check(const std::vector<BandInterval>& bands,
                                        const std::vector<Gap>& gaps, int dim,
                                        const std::vector<double>& lambdaList);

// End-to-end pipeline behind the `gaps` command and the desk checks: builds
// the band table over a uniform grid (radius sqrt(lambdaMax) + cutoffMargin),
// certifies the truncation at k = 0, and derives bands, gaps and zeta samples.
struct SpectralReport {
    BandTable table;
    std::vector<BandInterval> bands;
    std::vector<Gap> gaps;
    double windowLo = 0.0, windowHi = 0.0;
    double certifiedLambdaMax = 0.0;
    double cutoffRadius = 0.0;
    TruncationReport truncation;
    int kGridN = 0;
};

SpectralReport gaps_pipeline(const FourierPotential& potential, const Metric& metric,
                             double windowLo, double windowHi, int kGridN, double cutoffMargin,
                             int threads = 1, bool refine = false);

} // namespace bsgaps
