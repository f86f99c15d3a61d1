#include "bsgaps/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsgaps/regions.hpp"

namespace bsgaps {

namespace {

// Theta'_M ordered lex; shifted diagonal t(eta) = 2<xi,G eta> + |F eta|^2
struct ShiftedBlock {
    std::vector<IntVec> etas;
    Vecd t;
    Vecd b;    // couplings vhat(eta) to the eta = 0 row
    Matd d;    // shifted tail block with potential couplings
    double a0 = 0.0;
    double minSep = 0.0;
};

ShiftedBlock build_block(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                         int M) {
    if (M <= 2) throw InvalidParameter("M must be > 2");
    ShiftedBlock blk;
    blk.a0 = metric.quad(xi);
    blk.etas = theta_set_prime(M, potential.supportRadius, metric.dim);
    const std::size_t n = blk.etas.size();
    blk.t.resize(static_cast<Eigen::Index>(n));
    blk.b.resize(static_cast<Eigen::Index>(n));
    blk.minSep = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = 2.0 * metric.gdot_int(xi, blk.etas[i]) + metric.quad_int(blk.etas[i]);
        blk.t(static_cast<Eigen::Index>(i)) = ti;
        blk.b(static_cast<Eigen::Index>(i)) = potential.coeff(blk.etas[i]);
        blk.minSep = std::min(blk.minSep, std::abs(ti));
    }
    blk.d = Matd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        blk.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            blk.t(static_cast<Eigen::Index>(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            IntVec diff(blk.etas[i]);
            for (std::size_t q = 0; q < diff.size(); ++q) diff[q] -= blk.etas[j][q];
            const double c = potential.coeff(diff);
            if (c != 0.0) {
                blk.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
                blk.d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
            }
        }
    }
    return blk;
}

} // namespace

double min_separation(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                      int M) {
    return build_block(xi, potential, metric, M).minSep;
}

FixedPointTrace schur_fixed_point(const Vecd& xi, const FourierPotential& potential,
                                  const Metric& metric, int M, double tol, int maxIter) {
    FixedPointTrace trace;
    const ShiftedBlock blk = build_block(xi, potential, metric, M);
    trace.a0 = blk.a0;
    trace.minSeparation = blk.minSep;
    trace.mu.push_back(blk.a0);
    if (tol <= 0.0) tol = 1e-12 * (1.0 + std::abs(blk.a0));

    if (potential.empty()) {
        trace.converged = true;
        trace.value = blk.a0;
        trace.correction = 0.0;
        trace.inWindow = true;
        trace.rcond = 1.0;
        return trace;
    }

    const Eigen::Index n = blk.t.size();
    double mu = 0.0; // shifted iterate
    for (int k = 0; k < maxIter; ++k) {
        Matd sys = blk.d;
        for (Eigen::Index i = 0; i < n; ++i) sys(i, i) -= mu;
        const LinearSolver solver(sys);
        if (solver.near_singular())
            throw ResonantDenominator(
                "resolvent (D - mu) is numerically singular; the point behaves resonantly "
                "(min separation " +
                std::to_string(blk.minSep) + ")");
        const double next = -blk.b.dot(solver.solve(blk.b));
        trace.mu.push_back(blk.a0 + next);
        trace.iterations = k + 1;
        trace.residual = std::abs(next - mu);
        trace.rcond = solver.rcond();
        mu = next;
        if (trace.residual <= tol) {
            trace.converged = true;
            break;
        }
    }
    if (!trace.converged)
        throw NotConverged("fixed point did not converge in " + std::to_string(maxIter) +
                               " iterations",
                           trace);
    trace.correction = mu;
    trace.value = blk.a0 + mu;
    trace.inWindow = std::abs(mu) <= potential.normBound + tol;
    return trace;
}

double second_order_term(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                         int M) {
    const double maxLen = M * potential.supportRadius;
    double sum = 0.0;
    for (const auto& [eta, c] : potential.coeffs) {
        if (norm(eta) > maxLen) continue;
        const double fe2 = metric.quad_int(eta);
        const double ip = metric.gdot_int(xi, eta);
        const double denom = 4.0 * ip * ip - fe2 * fe2;
        if (std::abs(denom) <= 1e-12 * (1.0 + 4.0 * ip * ip))
            throw ResonantDenominator("vanishing denominator at eta=" + format_intvec(eta));
        sum += c * c * fe2 / denom;
    }
    return sum;
}

double g_correction(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                    int M, GMode mode, double tol) {
    if (mode == GMode::Order2) return second_order_term(xi, potential, metric, M);
    return schur_fixed_point(xi, potential, metric, M, tol).correction;
}

double g_nonresonant(const Vecd& xi, const FourierPotential& potential, const Metric& metric,
                     int M, GMode mode, double tol) {
    return metric.quad(xi) + g_correction(xi, potential, metric, M, mode, tol);
}

ConvergenceStudy convergence_study(const Vecd& direction, const std::vector<double>& rhoList,
                                   const FourierPotential& potential, const Metric& metric, int M,
                                   double tol, double separationFloor) {
    ConvergenceStudy study;
    const double fdir = metric.fnorm(direction);
    if (fdir <= 0.0) throw InvalidParameter("zero ray direction");
    std::vector<double> lx, ly;
    for (double rho : rhoList) {
        ConvergenceRow row;
        row.rho = rho;
        const Vecd xi = (rho / fdir) * direction;
        const double sep = min_separation(xi, potential, metric, M);
        if (sep < separationFloor) {
            row.skipped = true;
            row.note = "resonant at this rho (separation " + std::to_string(sep) + ")";
            study.rows.push_back(row);
            continue;
        }
        try {
            const double full = g_correction(xi, potential, metric, M, GMode::Full, tol);
            const double order2 = g_correction(xi, potential, metric, M, GMode::Order2);
            row.errorAbs = std::abs(order2 - full);
        } catch (const Error& e) {
            row.skipped = true;
            row.note = e.what();
            study.rows.push_back(row);
            continue;
        }
        study.rows.push_back(row);
        if (row.errorAbs > 0.0) {
            lx.push_back(std::log(rho));
            ly.push_back(std::log(row.errorAbs));
        }
    }
    if (lx.size() >= 2) {
        study.slope = fit_slope(lx, ly);
        study.slopeValid = true;
    }
    return study;
}

} // namespace bsgaps
