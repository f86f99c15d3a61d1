#pragma once

// Independent oracles for the test suites. These deliberately avoid the
// library's computational paths: the eigensolver here is cyclic Jacobi
// (the library uses Householder tridiagonalization + QL via Eigen), and the
// lattice searches are plain exhaustive enumeration.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bsgaps/intlat.hpp"
#include "bsgaps/linalg.hpp"
#include "bsgaps/model.hpp"

namespace oracles {

struct JacobiResult {
    bsgaps::Vecd values; // ascending
    bsgaps::Matd vectors;
};

inline JacobiResult jacobi_eigen_sym(bsgaps::Matd a) {
    const Eigen::Index n = a.rows();
    bsgaps::Matd v = bsgaps::Matd::Identity(n, n);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) < 1e-14 * scale) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-18 * scale) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // classical two-sided rotation in the (p, q) plane
                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(p, r) = a(r, p);
                    a(r, q) = s * arp + c * arq;
                    a(q, r) = a(r, q);
                }
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
    }
    std::vector<std::pair<double, Eigen::Index>> order;
    for (Eigen::Index i = 0; i < n; ++i) order.push_back({a(i, i), i});
    std::sort(order.begin(), order.end());
    JacobiResult out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = order[static_cast<std::size_t>(i)].first;
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)].second);
    }
    return out;
}

// shortest nonzero vector of `lattice` orthogonal to all `nus`, by exhaustive
// enumeration of the ambient ball; nullopt when none exists within `radius`
inline std::optional<bsgaps::IntVec> brute_shortest_orthogonal(const bsgaps::IntMat& latticeBasis,
                                                               const bsgaps::IntMat& nus, int d,
                                                               double radius) {
    std::optional<bsgaps::IntVec> best;
    bsgaps::int128 bestN2 = 0;
    for (const auto& p : bsgaps::enumerate_ball(d, radius)) {
        if (bsgaps::is_zero(p)) continue;
        bool ortho = true;
        for (const auto& nu : nus)
            if (bsgaps::dot_exact(p, nu) != 0) ortho = false;
        if (!ortho) continue;
        const auto coords = bsgaps::rational_coordinates(latticeBasis, p);
        if (!coords) continue;
        bool integral = true;
        for (const auto& c : *coords)
            if (!c.is_integer()) integral = false;
        if (!integral) continue;
        const bsgaps::int128 n2 = bsgaps::norm2_exact(p);
        if (!best || n2 < bestN2 ||
            (n2 == bestN2 && bsgaps::lex_less(p, *best))) {
            best = p;
            bestN2 = n2;
        }
    }
    if (best) bsgaps::sign_normalize(*best);
    return best;
}

// free band functions: sorted |F(m+k)|^2 up to keepLimit
inline std::vector<double> free_spectrum(const bsgaps::Vecd& k, double cutoff,
                                         const bsgaps::Metric& metric, double keepLimit) {
    std::vector<double> out;
    const int d = metric.dim;
    const double box = cutoff / std::sqrt(metric.gmin) + 2.0;
    const long long lim = static_cast<long long>(std::floor(box));
    std::vector<long long> idx(static_cast<std::size_t>(d), -lim);
    bsgaps::Vecd xi(d);
    while (true) {
        for (int i = 0; i < d; ++i) xi(i) = static_cast<double>(idx[static_cast<std::size_t>(i)]) + k(i);
        const double q = metric.quad(xi);
        if (q <= cutoff * cutoff && q <= keepLimit) out.push_back(q);
        int pos = d - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == lim) {
            idx[static_cast<std::size_t>(pos)] = -lim;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
    std::sort(out.begin(), out.end());
    return out;
}

// shifted block on xi + Theta_M with the eta = 0 row first: entries
// t(eta) = 2<xi, G eta> + |F eta|^2 on the diagonal, vhat couplings off it.
// Independent route for checking the Schur fixed point.
inline bsgaps::Matd shifted_block_matrix(const bsgaps::Vecd& xi,
                                         const bsgaps::FourierPotential& potential,
                                         const bsgaps::Metric& metric, int M) {
    using namespace bsgaps;
    std::vector<IntVec> pts = enumerate_ball(metric.dim, M * potential.supportRadius);
    std::stable_sort(pts.begin(), pts.end(), [](const IntVec& a, const IntVec& b) {
        if (is_zero(a) != is_zero(b)) return is_zero(a);
        return lex_less(a, b);
    });
    const std::size_t n = pts.size();
    Matd h = Matd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            2.0 * metric.gdot_int(xi, pts[i]) + metric.quad_int(pts[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            IntVec diff(pts[i]);
            for (std::size_t t = 0; t < diff.size(); ++t) diff[t] -= pts[j][t];
            const double c = potential.coeff(diff);
            if (c != 0.0) {
                h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
                h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
            }
        }
    }
    return h;
}

} // namespace oracles
