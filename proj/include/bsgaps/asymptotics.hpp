#pragma once

#include <string>
#include <vector>

#include "bsgaps/linalg.hpp"
#include "bsgaps/model.hpp"

namespace bsgaps {

// Iterates of mu_{k+1} = a(0) - b^T (D - mu_k)^{-1} b on the xi + Theta_M
// block: the Schur-complement resummation of the characteristic-polynomial
// factorization. Everything is computed on the shifted diagonal
// a(eta) - a(0) = 2<xi, G eta> + |F eta|^2, so no rho^2-sized cancellations
// enter the arithmetic.
struct FixedPointTrace {
    std::vector<double> mu; // absolute iterates; mu[0] = a(0)
    bool converged = false;
    double value = 0.0;      // g~(xi)
    double correction = 0.0; // value - a(0)
    double a0 = 0.0;
    int iterations = 0;
    double residual = 0.0;      // |mu_k - F(mu_k)| at the stop
    double minSeparation = 0.0; // min |a(eta) - a(0)| over Theta'_M
    double rcond = 0.0;         // condition estimate of the last resolvent solve
    bool inWindow = false;      // value in [a(0) - v, a(0) + v]
};

struct NotConverged : Error {
    FixedPointTrace trace;
    NotConverged(const std::string& msg, FixedPointTrace t) : Error(msg), trace(std::move(t)) {}
};

// tol <= 0 selects the default 1e-12 * (1 + |a(0)|).
FixedPointTrace schur_fixed_point(const Vecd& xi, const FourierPotential& potential,
                                  const Metric& metric, int M, double tol = -1.0,
                                  int maxIter = 100);

// min over eta in Theta'_M of |a(eta) - a(0)|; the operational non-resonance
// margin of the block.
double min_separation(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                      int M);

// Closed-form second-order correction:
//   sum_eta |vhat(eta)|^2 |F eta|^2 / (4 <xi, G eta>^2 - |F eta|^4).
double second_order_term(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                         int M);

enum class GMode { Full, Order2 };

// correction g - |F xi|^2 in the chosen mode (exact fixed point or the
// explicit second-order form)
double g_correction(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                    int M, GMode mode, double tol = -1.0);

double g_nonresonant(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                     int M, GMode mode = GMode::Full, double tol = -1.0);

struct ConvergenceRow {
    double rho = 0.0;
    double errorAbs = 0.0; // |g_order2 - g_full|, shifted arithmetic
    bool skipped = false;
    std::string note;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double slope = 0.0; // log-log fit over the non-skipped rows
    bool slopeValid = false;
};

// |g_order2 - g_full| along xi(rho) = rho * dir / |F dir|.
ConvergenceStudy convergence_study(const Vecd& direction, const std::vector<double>& rhoList,
                                   const FourierPotential& potential, const Metric& metric, int M,
                                   double tol = -1.0, double separationFloor = 1.0);

} // namespace bsgaps
