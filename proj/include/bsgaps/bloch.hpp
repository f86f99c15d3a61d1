#pragma once

#include <vector>

#include "bsgaps/intlat.hpp"
#include "bsgaps/linalg.hpp"
#include "bsgaps/model.hpp"

namespace bsgaps {

// Plane-wave index set at quasi-momentum k: all m in Z^d with
// |F(m+k)| <= cutoff, lexicographically ordered.
struct BlochBasis {
    Vecd k;
    std::vector<IntVec> points;
    double cutoff = 0.0;

    std::size_t size() const { return points.size(); }
};

BlochBasis build_basis(const Vecd& k, double cutoffRadius, const Metric& metric,
                       std::size_t maxSize = 200000);

// Hermitian (here real symmetric) section of H'(k): diagonal |F(m+k)|^2,
// off-diagonal vhat(m_i - m_j).
Matd assemble(const BlochBasis& basis, const FourierPotential& potential, const Metric& metric);

// ascending spectrum with the EigenFailure contract
Vecd eigenvalues(const Matd& symmetric);

// eigenvalues <= keepLimit at one k (fast diagonal path for V = 0)
std::vector<double> spectrum_at(const Vecd& k, double cutoffRadius,
                                const FourierPotential& potential, const Metric& metric,
                                double keepLimit, std::size_t maxBasis = 200000);

struct BandTable {
    std::vector<Vecd> kGrid;
    std::vector<std::vector<double>> eigs; // per grid node, ascending
    double cutoffRadius = 0.0;
    double lambdaMax = 0.0;
    double keepLimit = 0.0; // 0.5 * cutoff^2
    int jCount = 0;         // bands aligned across the grid

    double band_value(std::size_t knode, int j) const { return eigs[knode][static_cast<std::size_t>(j)]; }
};

// Per-k spectra over the grid. Evaluation may be parallel and uses the
// time-reversal identity spectrum(k) = spectrum(-k) (exact for the real,
// even potentials of v1) to halve the work; output is ordered by grid index
// regardless of execution order.
BandTable band_table(const std::vector<Vecd>& kGrid, double cutoffRadius,
                     const FourierPotential& potential, const Metric& metric, double lambdaMax,
                     int threads = 1, bool useTimeReversal = true);

// uniform grid {i/n}^d and midpoint grid {(i+1/2)/n}^d
std::vector<Vecd> uniform_k_grid(int d, int n);
std::vector<Vecd> midpoint_k_grid(int d, int n);

struct TruncationReport {
    std::vector<double> cutoffs;
    std::vector<double> maxChange; // between consecutive cutoffs
    bool monotone = false;
    bool pass = false; // final change below 1e-8
};

// Cutoff-refinement comparison of bands [jLo, jHi] (1-based) at one k.
TruncationReport truncation_check(const Vecd& k, const FourierPotential& potential,
                                  const Metric& metric, const std::vector<double>& cutoffs,
                                  int jLo, int jHi);

} // namespace bsgaps
