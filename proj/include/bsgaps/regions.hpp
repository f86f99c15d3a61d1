#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bsgaps/intlat.hpp"
#include "bsgaps/linalg.hpp"
#include "bsgaps/model.hpp"
#include "bsgaps/rng.hpp"

namespace bsgaps {

// Linear subspace spanned by short integer vectors, canonicalized by the
// HNF basis of the saturation of the generated lattice. Two subspaces are
// equal iff their canonical bases are equal.
struct IntegerSubspace {
    int ambientDim = 0;
    IntMat basis; // saturated HNF rows; empty = trivial subspace

    int dim() const { return static_cast<int>(basis.size()); }
    bool operator==(const IntegerSubspace& o) const {
        return ambientDim == o.ambientDim && basis == o.basis;
    }
    bool contains(const IntegerSubspace& other) const;
};

IntegerSubspace canonical_subspace(int ambientDim, const IntMat& generators);

// canonical order: dimension, then lexicographic on the flattened HNF basis
bool subspace_less(const IntegerSubspace& a, const IntegerSubspace& b);

// Theta_j = Z^d intersect B(jR); Theta_0 = {0}; primed variant excludes 0.
std::vector<IntVec> theta_set(int j, double R, int d);
std::vector<IntVec> theta_set_prime(int j, double R, int d);

// All integer r-subspaces of dimension n in Z^d (spans of n independent
// integer vectors of length < r), deduplicated. n = 0 gives the trivial
// subspace.
std::vector<IntegerSubspace> enumerate_subspaces(double r, int n, int d,
                                                 std::size_t cap = 2'000'000);

struct GDecomposition {
    Vecd xi_V;    // component in the subspace
    Vecd xi_perp; // G-orthogonal remainder
    double r = 0.0;    // |F xi_perp|
    Vecd dir;          // xi_perp / r, F-unit; empty when r == 0
    bool dirDefined = false;
};

// xi = xi_V + xi_perp with xi_V in V and G xi_perp perpendicular to V,
// solved from the n x n normal equations with one refinement pass.
GDecomposition g_decompose(const Vecd& xi, const IntegerSubspace& V, const Metric& metric);

struct ResonanceLabel {
    bool resonant = false;
    int tier = -1; // 0 when Xi0 holds directly, 1 when only the Xi1 sweep does
    IntegerSubspace subspace;
    GDecomposition decomp;
};

// Subspace family with the per-subspace data the membership tests need.
// 1-dimensional families are materialized outright. The 2-dimensional family
// in d = 3 is usually far too large to materialize (it has ~R^6 members), so
// those queries run through an exact slab search instead: any subspace whose
// Xi1 can contain xi is nearly G-orthogonal to xi, which confines its
// generators to a thin computable slab of the Theta ball.
class RegionGeometry {
  public:
    struct SubspaceInfo {
        IntegerSubspace sub;
        Matd projector; // d x d Euclidean-coordinates map xi -> xi_V (G-orthogonal split)
        double smax = 0.0; // max of <u, Gu> over unit u in the subspace
    };

    RegionGeometry(const SpectralWindow& window, const RegionParameters& params,
                   const Metric& metric, std::size_t enumerationCap = 200'000);

    const SpectralWindow& window() const { return window_; }
    const RegionParameters& params() const { return params_; }
    const Metric& metric() const { return metric_; }

    bool materialized(int n) const;
    // materialized families only; throws EnumerationTooLarge otherwise
    const std::vector<SubspaceInfo>& family(int n) const;

    SubspaceInfo make_info(const IntegerSubspace& sub) const;

    bool in_annulus(const Vecd& xi) const { return window_.in_annulus_wide(metric_, xi); }

    Vecd project(const SubspaceInfo& info, const Vecd& xi) const { return info.projector * xi; }

    bool in_Xi0(const SubspaceInfo& info, const Vecd& xi) const;
    bool in_Xi1(const SubspaceInfo& info, const Vecd& xi) const;
    // Xi2 = Xi1 minus the Xi1 of strictly containing subspaces
    bool in_Xi2(const SubspaceInfo& info, const std::vector<SubspaceInfo>& containing,
                const Vecd& xi) const;
    // Xi3 = Xi2 + B(V, K), decided on a deterministic grid of the K-ball
    bool in_Xi3(const SubspaceInfo& info, const std::vector<SubspaceInfo>& containing,
                const Vecd& xi) const;

    // strictly containing subspaces whose Xi1 could hold at one of the probe
    // points; complete for the membership tests run at those probes
    std::vector<SubspaceInfo> containing_candidates(const SubspaceInfo& base,
                                                    const std::vector<Vecd>& probes) const;

    // Deterministic total classification on the annulus: Resonant with the
    // highest-dimensional subspace whose Xi1 contains xi (ties by canonical
    // order), NonResonant if none.
    ResonanceLabel classify(const Vecd& xi) const;

    // every Xi1 hit at xi, for the overlap diagnostics
    std::vector<IntegerSubspace> xi1_hits(const Vecd& xi) const;

    // membership in the slimmed non-resonance set used by the volume bounds:
    // |xi_U| > rho^{1/2} for every 1-dim family member
    bool in_B_tilde(const Vecd& xi) const;

    // uniform sample from the wide annulus (shell in |F xi|^2)
    Vecd sample_annulus(Rng& rng) const;

  private:
    std::vector<SubspaceInfo> query_dim2_hits(const Vecd& xi) const;

    SpectralWindow window_;
    RegionParameters params_;
    Metric metric_;
    std::vector<std::vector<SubspaceInfo>> byDim_; // index 0 -> dim 1
    std::vector<bool> materialized_;
    std::vector<IntVec> primitives_; // up-to-sign primitive vectors, |p| < 6MR
};

struct PartitionReport {
    long long samples = 0;
    long long resonant = 0;
    long long nonResonant = 0;
    long long overlapSamples = 0;   // >= 2 incomparable Xi1 hits
    long long changedXi0Violations = 0; // resonant samples with |xi_V| >= 2 L_n
    double maxXiVOverLn = 0.0;      // max |xi_V| / L_n over resonant samples
    double overlapRate = 0.0;
    bool total = false;             // every sample classified without error
    bool deterministic = false;     // re-classification matched exactly
};

PartitionReport partition_diagnostics(const RegionGeometry& geometry, long long sampleCount,
                                      std::uint64_t seed, int threads = 1);

// Operator-pencil data on the frequency set Upsilon(xi): the direct section
// of H' on Upsilon equals r^2 I + r A + B with A diagonal and B carrying the
// lattice geometry plus the potential couplings.
struct PencilDecomposition {
    Vecd xi;
    double r = 0.0;
    Vecd dir;
    std::vector<IntVec> offsets;  // eta - xi, integer, sorted
    std::vector<int> psiClass;    // per point, class of (eta - xi) mod V
    std::vector<IntVec> classReps; // per class, lex-smallest representative in Theta_M (class 0 -> 0)
    Vecd aDiag;
    Matd B;

    std::size_t size() const { return offsets.size(); }
    Vecd frequency(std::size_t i, int d) const {
        Vecd out(d);
        for (int t = 0; t < d; ++t)
            out(t) = xi(t) + static_cast<double>(offsets[i][static_cast<std::size_t>(t)]);
        return out;
    }
};

PencilDecomposition pencil_decompose(const Vecd& xi, const IntegerSubspace& V,
                                     const RegionGeometry& geometry,
                                     const FourierPotential& potential,
                                     double cutoffRadius = 0.0);

Matd pencil_matrix(const PencilDecomposition& p);
// directly assembled section of H' on Upsilon(xi)
Matd pencil_direct_matrix(const PencilDecomposition& p, const FourierPotential& potential,
                          const Metric& metric);

// max |spectrum(r^2 I + rA + B) - spectrum(direct)|, computed on the
// r^2-shifted pair so eigensolver roundoff scales with the spectral spread
// rather than with lambda
double pencil_spectrum_deviation(const PencilDecomposition& p, const FourierPotential& potential,
                                 const Metric& metric);

struct VolumeEstimates {
    long long samples = 0;
    double shellVolume = 0.0;
    double volA = 0.0, sigmaA = 0.0;
    double volB = 0.0, sigmaB = 0.0;
    double volD = 0.0, sigmaD = 0.0;
    double volShift = 0.0, sigmaShift = 0.0;
    bool shiftRequested = false;
    double predictedAB = 0.0;    // rho^{d-2} delta
    double predictedShift = 0.0; // delta^2 rho^{d-3} + delta rho^{-d}
    double ratioA = 0.0, ratioB = 0.0, ratioShift = 0.0;
};

// Monte-Carlo volumes of A(delta), B(delta), D(delta) and, when `shift` is
// given, of B(delta) meet (B(delta)+shift). g is evaluated on non-resonant
// points only; for v = 0 the annulus condition degenerates to the g-window.
VolumeEstimates volume_estimates(const RegionGeometry& geometry, double delta,
                                 long long sampleCount, std::uint64_t seed,
                                 const std::function<double(const Vecd&)>& g,
                                 const Vecd* shift = nullptr, int threads = 1);

} // namespace bsgaps
