#pragma once

#include <optional>
#include <vector>

#include "bsgaps/intlat.hpp"
#include "bsgaps/linalg.hpp"
#include "bsgaps/model.hpp"

namespace bsgaps {

// Sublattice of Z^d spanned by independent integer basis vectors.
struct IntegerLattice {
    int ambientDim = 0;
    IntMat basis;           // rows, linearly independent
    double cellVolume = 0.0; // |Gamma| = wedge norm of the basis

    int rank() const { return static_cast<int>(basis.size()); }
};

IntegerLattice make_lattice(int ambientDim, const IntMat& basis);
IntegerLattice integer_lattice_zd(int d);

// sqrt(det(M^T M)) with the vectors as columns of M; 0 iff dependent.
double wedge_norm(const std::vector<Vecd>& vectors);
double wedge_norm_int(const IntMat& vectors);

// Shortest nonzero theta in Gamma orthogonal to all nu_j (n-1 of them for a
// rank-n lattice). Exact: the orthogonal sublattice has rank one, so theta is
// its primitive generator, sign-normalized. Checks the Minkowski-type bound
// |theta| <= 2^n |Gamma| prod |nu_j| and throws InternalError if violated.
struct ShortestOrthogonal {
    IntVec theta;
    double bound = 0.0;
    double ratio = 0.0; // |theta| / bound
};
ShortestOrthogonal shortest_orthogonal_vector(const IntegerLattice& lattice, const IntMat& nus);

// Successive minima of {theta in Gamma : theta perp all nu_j}, m < n of them.
// Reports prod|theta_l| / (|Gamma| prod|nu_j|), not asserted against a fixed
// constant.
struct OrthogonalBasisResult {
    IntMat thetas; // n - m vectors, ordered by (norm, lex), sign-normalized
    double productRatio = 0.0;
};
OrthogonalBasisResult orthogonal_sublattice_basis(const IntegerLattice& lattice, const IntMat& nus);

// Principal angle in (0, pi/2] between mu (or F mu) and span(thetas)
// (or F span(thetas)).
double angle_vector_subspace(const IntVec& mu, const IntMat& thetas,
                             const Metric* metric = nullptr);

// |Z(mu, theta_1..theta_n)| / |Z(theta_1..theta_n)| -- the Euclidean distance
// from mu to span(thetas), computed from exact wedge norms.
double distance_vector_subspace(const IntVec& mu, const IntMat& thetas);

// Minimal principal angle between span(v1) and span(v2); requires the union
// to be independent. Also verifies sin(alpha) >= wedge(v1 u v2) /
// (wedge(v1) wedge(v2)).
struct SubspaceAngle {
    double angle = 0.0;
    double sinLowerBound = 0.0; // the wedge-ratio bound
};
SubspaceAngle subspace_angle(const IntMat& v1, const IntMat& v2);

// Integer basis of span(v1) meet span(v2): rational nullspace solve followed
// by denominator clearing and saturation. Empty list for trivial intersection.
struct IntersectionResult {
    IntMat basis; // HNF rows of the saturated intersection lattice
    std::vector<double> normRatios; // |theta_j| / R^{m+n-l+1}
};
IntersectionResult intersect_integer_subspaces(const IntMat& v1, const IntMat& v2, double R);

// Seeded instance for the bound-verification harnesses: a lattice of rank
// d <= maxDim with d-1 independent constraint vectors of length <= maxR.
// Coordinates stay small so the exhaustive oracles remain enumerable.
struct LatticeTrial {
    IntegerLattice lattice;
    IntMat nus;
};
LatticeTrial random_lattice_trial(std::uint64_t seed, int maxDim, double maxR);

} // namespace bsgaps
