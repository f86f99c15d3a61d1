#pragma once

#include <map>
#include <string>
#include <vector>

#include "bsgaps/intlat.hpp"
#include "bsgaps/linalg.hpp"

namespace bsgaps {

// Positive metric G = F^2 of the quadratic symbol; F is the principal
// (symmetric positive definite) square root. Immutable after construction.
struct Metric {
    int dim = 0;
    Matd G;
    Matd F;
    double gmin = 0.0; // extreme eigenvalues of G
    double gmax = 0.0;

    double quad(const Vecd& xi) const { return xi.dot(G * xi); }            // |F xi|^2
    double gdot(const Vecd& a, const Vecd& b) const { return a.dot(G * b); } // <a, G b>
    double fnorm(const Vecd& xi) const;                                      // |F xi|
    Vecd applyF(const Vecd& xi) const { return F * xi; }

    double quad_int(const IntVec& m) const;
    double gdot_int(const Vecd& a, const IntVec& m) const;
};

// pre: G symmetric within 1e-12, positive definite
Metric metric_from_G(const Matd& G);
Metric metric_identity(int dim);

// Finitely supported Fourier coefficients of a real, even trigonometric
// polynomial: V(x) = sum_m vhat(m) e^{i<m,x>}, vhat(0) = 0,
// vhat(-m) = vhat(m) real. v = sum |vhat(m)| bounds the multiplication
// operator norm in any plane-wave section.
struct FourierPotential {
    int dim = 0;
    std::map<IntVec, double> coeffs; // only nonzero entries
    double supportRadius = 1.0;      // all m in support satisfy |m| <= R
    double normBound = 0.0;          // v

    double coeff(const IntVec& m) const {
        auto it = coeffs.find(m);
        return it == coeffs.end() ? 0.0 : it->second;
    }
    bool empty() const { return coeffs.empty(); }
};

// Validates zero mean, evenness, support radius; derives v.
FourierPotential make_potential(int dim, const std::map<IntVec, double>& coeffs);

FourierPotential zero_potential(int dim);

// V = 2 cos(x_1) (+ 2 cos(x_2) ... if axes > 1): vhat(+-e_i) = 1 for the
// first `axes` coordinate directions.
FourierPotential cos_potential(int dim, int axes = 1, double amplitude = 1.0);

// JSON loader per the input schema:
//   {"dim": d, "G": [[...]], "coeffs": [{"m": [...], "re": x, "im": y}, ...]}
// Hermitian closure: a missing -m entry is filled with the conjugate;
// a present one must match. v1 accepts real coefficients only.
struct PotentialFile {
    Metric metric;
    FourierPotential potential;
};
PotentialFile load_potential_json(const std::string& path);
PotentialFile parse_potential_json(const std::string& text);

// Spectral window at lambda = rho^2: J = [lambda - 20v, lambda + 20v],
// wide annulus A (40v) and narrow annulus A1 (20v).
struct SpectralWindow {
    double rho = 0.0;
    double lambda = 0.0;
    double v = 0.0;

    double j_lo() const { return lambda - 20.0 * v; }
    double j_hi() const { return lambda + 20.0 * v; }
    // slack at the rounding scale of the quadratic form itself, so that for
    // v = 0 the sphere's own points still pass their membership test
    double boundary_slack() const { return 16.0 * 2.220446049250313e-16 * (1.0 + lambda); }
    bool in_annulus_wide(const Metric& metric, const Vecd& xi) const {
        return std::abs(metric.quad(xi) - lambda) <= 40.0 * v + boundary_slack();
    }
    bool in_annulus_narrow(const Metric& metric, const Vecd& xi) const {
        return std::abs(metric.quad(xi) - lambda) <= 20.0 * v + boundary_slack();
    }
};

SpectralWindow derive_spectral_window(double rho, const FourierPotential& potential);

// Exponent ladder p, q_n = 3np, K = rho^p, L_n = rho^{q_n}; M > 2 with the
// support radius used for the Theta sets.
struct RegionParameters {
    int dim = 0;
    double rho = 0.0;
    double p = 0.0;
    std::vector<double> qn; // q_0..q_d
    double K = 0.0;
    std::vector<double> Ln; // L_0..L_d
    int M = 3;
    double R = 1.0;
    double beta = 0.0;          // max alpha(n,m,l) exponent
    bool rhoP_gt_R2beta = false; // diagnostic only, never enforced

    double theta_radius() const { return 6.0 * M * R; }
};

RegionParameters region_parameters(int dim, double rho, double R, int M = 3);

} // namespace bsgaps
