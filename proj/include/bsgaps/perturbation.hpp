#pragma once

#include <cstdint>
#include <vector>

#include "bsgaps/linalg.hpp"
#include "bsgaps/model.hpp"
#include "bsgaps/rng.hpp"

namespace bsgaps {

// Finite instance of the invariant-subspace reduction: diagonal H0, block
// tridiagonal V with respect to the ordered partition P_0..P_n, A supported
// on the last block.
struct PerturbationInstance {
    int N = 0;
    Vecd h0;  // diagonal of H0
    Matd v;   // symmetric, P_j V P_k = 0 for |j-k| > 1
    Matd a;   // symmetric, A = P_n A P_n
    std::vector<std::pair<int, int>> blocks; // [begin, end) index ranges, ordered
    int targetIndex = 0;                     // l, 0-based

    int chainLength() const { return static_cast<int>(blocks.size()) - 1; } // n
};

struct InstanceNorms {
    double normV = 0.0;
    double normA = 0.0;
    double a = 0.0;            // ||V|| + ||A||
    double muL = 0.0;          // mu_l(H0 + V)
    std::vector<double> aj;    // distance of mu_l to spec(P_j H0 P_j), j = 1..n
    bool admissible = false;   // a_j > 4a for all j >= 1
};

InstanceNorms instance_norms(const PerturbationInstance& inst);

// 2^{2n} a^{2n+1} prod_{j>=1} (a_j - 2a)^{-2}; requires a_j > 2a.
double lemma1_bound(const PerturbationInstance& inst);

struct Lemma1Report {
    double muL = 0.0;
    double muHatL = 0.0;
    double gap = 0.0;   // |muHat_l - mu_l|
    double bound = 0.0;
    bool pass = false;
};

Lemma1Report verify_lemma1(const PerturbationInstance& inst);

// deterministic admissible-by-construction generator
PerturbationInstance random_instance(std::uint64_t seed, int maxDim, int maxBlocks,
                                     double couplingScale, double gapScale);

// Block family {P^m}, each split into a chain P^m_0..P^m_{j_m}, plus Q.
// V couples only within chains (tridiagonally), the last chain element to Q,
// and Q to itself.
struct Lemma2Instance {
    int N = 0;
    Vecd h0;
    Matd v;
    std::vector<std::vector<std::pair<int, int>>> chains; // chains[m][j] = block range
    std::pair<int, int> q;                                // range of Q (may be empty)
    double lambda1 = 0.0, lambda2 = 0.0;                  // the interval J
};

struct Lemma2Report {
    double v = 0.0;        // ||V||
    double tau = 0.0;      // the lemma's bound
    int insideCount = 0;   // eigenvalues of H inside J
    double worstGap = 0.0; // max |mu~_r - mu_r| over J
    bool boundHolds = false;
    bool exclusionHolds = false; // no other H~ eigenvalue in [l1+2v, l2-2v]
    bool marginsHold = false;    // the 6v / 16v distance preconditions
    bool indexShiftHolds = false; // corollary: mu_j(sum P H P) = mu_{j+l}(H~)
};

Lemma2Report verify_lemma2(const Lemma2Instance& inst);

Lemma2Instance random_lemma2_instance(std::uint64_t seed, int maxFamilies, int maxChain,
                                      double couplingScale);

} // namespace bsgaps
