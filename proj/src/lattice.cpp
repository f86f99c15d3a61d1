#include "bsgaps/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "bsgaps/rng.hpp"

namespace bsgaps {

namespace {

Vecd intvec_to_vecd(const IntVec& v) {
    Vecd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
    return out;
}

// orthonormal basis of the span of the given vectors (modified Gram-Schmidt,
// zero columns dropped)
std::vector<Vecd> orthonormalize(const std::vector<Vecd>& vectors) {
    std::vector<Vecd> q;
    for (Vecd v : vectors) {
        for (const auto& u : q) v -= u.dot(v) * u;
        const double n = v.norm();
        if (n > 1e-12) q.push_back(v / n);
    }
    return q;
}

std::vector<Vecd> intmat_to_vecds(const IntMat& m, const Metric* metric) {
    std::vector<Vecd> out;
    out.reserve(m.size());
    for (const auto& r : m) {
        Vecd v = intvec_to_vecd(r);
        if (metric) v = metric->F * v;
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace

IntegerLattice make_lattice(int ambientDim, const IntMat& basis) {
    for (const auto& r : basis)
        if (static_cast<int>(r.size()) != ambientDim)
            throw InvalidInput("lattice basis vector has wrong dimension");
    const int128 g = gram_det_exact(basis);
    if (g <= 0) throw InvalidInput("lattice basis is linearly dependent");
    IntegerLattice lat;
    lat.ambientDim = ambientDim;
    lat.basis = basis;
    lat.cellVolume = std::sqrt(static_cast<double>(g));
    return lat;
}

IntegerLattice integer_lattice_zd(int d) {
    IntMat id(static_cast<std::size_t>(d), IntVec(static_cast<std::size_t>(d), 0));
    for (int i = 0; i < d; ++i) id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    return make_lattice(d, id);
}

double wedge_norm(const std::vector<Vecd>& vectors) {
    const std::size_t k = vectors.size();
    if (k == 0) throw InvalidArity("wedge_norm of an empty list");
    const std::size_t d = static_cast<std::size_t>(vectors[0].size());
    if (k > d) throw InvalidArity("more vectors than the ambient dimension");
    Matd m(d, k);
    for (std::size_t j = 0; j < k; ++j) m.col(static_cast<Eigen::Index>(j)) = vectors[j];
    const Matd gram = m.transpose() * m;
    const double det = gram.determinant();
    return det <= 0.0 ? 0.0 : std::sqrt(det);
}

double wedge_norm_int(const IntMat& vectors) {
    if (vectors.empty()) throw InvalidArity("wedge_norm of an empty list");
    if (vectors.size() > vectors[0].size())
        throw InvalidArity("more vectors than the ambient dimension");
    const int128 g = gram_det_exact(vectors);
    return g <= 0 ? 0.0 : std::sqrt(static_cast<double>(g));
}

namespace {

// constraint matrix <theta, nu_j> = 0 in Gamma-coordinates
IntMat orthogonality_constraints(const IntegerLattice& lattice, const IntMat& nus) {
    IntMat w;
    for (const auto& nu : nus) {
        IntVec row;
        row.reserve(lattice.basis.size());
        for (const auto& b : lattice.basis)
            row.push_back(checked_ll(dot_exact(b, nu), "orthogonality constraint"));
        w.push_back(std::move(row));
    }
    return w;
}

IntVec from_gamma_coords(const IntegerLattice& lattice, const IntVec& c) {
    IntVec out(static_cast<std::size_t>(lattice.ambientDim), 0);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t t = 0; t < out.size(); ++t)
            out[t] = checked_ll(static_cast<int128>(out[t]) +
                                    static_cast<int128>(c[i]) * lattice.basis[i][t],
                                "lattice coordinates");
    return out;
}

void check_nus(const IntegerLattice& lattice, const IntMat& nus) {
    if (nus.empty()) throw InvalidInput("need at least one constraint vector");
    if (gram_det_exact(nus) <= 0) throw InvalidInput("constraint vectors are dependent");
    for (const auto& nu : nus) {
        auto coords = rational_coordinates(lattice.basis, nu);
        if (!coords) throw InvalidInput("constraint vector not in the lattice span");
        for (const auto& c : *coords)
            if (!c.is_integer())
                throw InvalidInput("constraint vector not a lattice point: " + format_intvec(nu));
    }
}

} // namespace

ShortestOrthogonal shortest_orthogonal_vector(const IntegerLattice& lattice, const IntMat& nus) {
    const int n = lattice.rank();
    if (static_cast<int>(nus.size()) != n - 1)
        throw InvalidInput("expected n-1 constraint vectors for a rank-n lattice");
    check_nus(lattice, nus);

    const IntMat kernel = kernel_lattice(orthogonality_constraints(lattice, nus));
    if (kernel.size() != 1)
        throw InternalError("orthogonal sublattice rank " + std::to_string(kernel.size()) +
                            ", expected 1");
    IntVec theta = from_gamma_coords(lattice, kernel[0]);
    // kernel basis is saturated in Gamma-coordinates, so theta is primitive in Gamma
    sign_normalize(theta);

    double bound = std::pow(2.0, n) * lattice.cellVolume;
    for (const auto& nu : nus) bound *= norm(nu);
    ShortestOrthogonal out;
    out.theta = theta;
    out.bound = bound;
    out.ratio = norm(theta) / bound;
    if (norm(theta) > bound + 1e-9)
        throw InternalError("orthogonal vector exceeds the Minkowski bound");
    return out;
}

OrthogonalBasisResult orthogonal_sublattice_basis(const IntegerLattice& lattice, const IntMat& nus) {
    const int n = lattice.rank();
    const int m = static_cast<int>(nus.size());
    if (m >= n) throw InvalidInput("expected fewer constraints than the lattice rank");
    check_nus(lattice, nus);

    IntMat kernel = kernel_lattice(orthogonality_constraints(lattice, nus));
    if (static_cast<int>(kernel.size()) != n - m)
        throw InternalError("orthogonal sublattice has unexpected rank");
    IntMat ambient;
    for (const auto& c : kernel) ambient.push_back(from_gamma_coords(lattice, c));
    lagrange_reduce(ambient);

    // successive minima by bounded enumeration, radius grown until full rank
    double radius = 0.0;
    for (const auto& b : ambient) radius = std::max(radius, norm(b));
    IntMat minima;
    for (int guard = 0; guard < 8 && static_cast<int>(minima.size()) < n - m; ++guard) {
        minima.clear();
        for (const auto& cand : enumerate_lattice_ball(ambient, radius)) {
            IntMat trial = minima;
            trial.push_back(cand);
            if (gram_det_exact(trial) > 0) {
                IntVec c = cand;
                sign_normalize(c);
                minima.push_back(std::move(c));
                if (static_cast<int>(minima.size()) == n - m) break;
            }
        }
        radius *= 2.0;
    }
    if (static_cast<int>(minima.size()) != n - m)
        throw InternalError("failed to reach full rank in successive minima enumeration");

    double prod = 1.0;
    for (const auto& t : minima) prod *= norm(t);
    double denom = lattice.cellVolume;
    for (const auto& nu : nus) denom *= norm(nu);
    OrthogonalBasisResult out;
    out.thetas = std::move(minima);
    out.productRatio = prod / denom;
    return out;
}

double angle_vector_subspace(const IntVec& mu, const IntMat& thetas, const Metric* metric) {
    IntMat all = thetas;
    all.push_back(mu);
    if (gram_det_exact(all) <= 0) throw DependentInput("mu lies in the span of the thetas");

    const std::vector<Vecd> q = orthonormalize(intmat_to_vecds(thetas, metric));
    Vecd v = intvec_to_vecd(mu);
    if (metric) v = metric->F * v;
    Vecd perp = v;
    for (const auto& u : q) perp -= u.dot(v) * u;
    const double para = std::sqrt(std::max(0.0, v.squaredNorm() - perp.squaredNorm()));
    return std::atan2(perp.norm(), para);
}

double distance_vector_subspace(const IntVec& mu, const IntMat& thetas) {
    IntMat all = thetas;
    all.push_back(mu);
    const int128 num2 = gram_det_exact(all);
    const int128 den2 = gram_det_exact(thetas);
    if (den2 <= 0) throw DependentInput("thetas are dependent");
    if (num2 <= 0) throw DependentInput("mu lies in the span of the thetas");
    return std::sqrt(static_cast<double>(num2) / static_cast<double>(den2));
}

SubspaceAngle subspace_angle(const IntMat& v1, const IntMat& v2) {
    IntMat all = v1;
    all.insert(all.end(), v2.begin(), v2.end());
    if (gram_det_exact(all) <= 0)
        throw DependentInput("union is dependent; use intersect_integer_subspaces");

    const std::vector<Vecd> q1 = orthonormalize(intmat_to_vecds(v1, nullptr));
    const std::vector<Vecd> q2 = orthonormalize(intmat_to_vecds(v2, nullptr));
    Matd c(static_cast<Eigen::Index>(q1.size()), static_cast<Eigen::Index>(q2.size()));
    for (std::size_t i = 0; i < q1.size(); ++i)
        for (std::size_t j = 0; j < q2.size(); ++j)
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = q1[i].dot(q2[j]);
    // largest singular value = cos of the minimal principal angle
    const Matd cc = q1.size() <= q2.size() ? Matd(c * c.transpose()) : Matd(c.transpose() * c);
    const Vecd ev = eigen_sym_values(cc);
    const double cosmax = std::sqrt(std::min(1.0, std::max(0.0, ev(ev.size() - 1))));

    SubspaceAngle out;
    out.angle = std::acos(std::min(1.0, cosmax));
    out.sinLowerBound = wedge_norm_int(all) / (wedge_norm_int(v1) * wedge_norm_int(v2));
    if (std::sin(out.angle) < out.sinLowerBound - 1e-9)
        throw InternalError("subspace angle fell below the wedge-ratio bound");
    return out;
}

LatticeTrial random_lattice_trial(std::uint64_t seed, int maxDim, double maxR) {
    Rng rng(seed);
    const int d = static_cast<int>(rng.uniform_int(2, std::max(2, maxDim)));
    // entry caps keep the kernel generator (and hence the oracle ball) small
    const long long cap = d >= 4 ? 2 : (d == 3 ? 2 : static_cast<long long>(maxR));
    for (int attempt = 0; attempt < 200; ++attempt) {
        IntegerLattice lat = integer_lattice_zd(d);
        if (rng.uniform() < 0.25) {
            // occasionally a proper sublattice: identity with one doubled row
            IntMat b = lat.basis;
            const std::size_t row = static_cast<std::size_t>(rng.uniform_int(0, d - 1));
            for (auto& x : b[row]) x *= 2;
            lat = make_lattice(d, b);
        }
        IntMat nus;
        for (int j = 0; j < d - 1; ++j) {
            IntVec comb(static_cast<std::size_t>(lat.rank()), 0);
            for (auto& c : comb) c = rng.uniform_int(-cap, cap);
            IntVec nu(static_cast<std::size_t>(d), 0);
            for (std::size_t i = 0; i < comb.size(); ++i)
                for (int t = 0; t < d; ++t)
                    nu[static_cast<std::size_t>(t)] += comb[i] * lat.basis[i][static_cast<std::size_t>(t)];
            nus.push_back(std::move(nu));
        }
        bool ok = gram_det_exact(nus) > 0;
        for (const auto& nu : nus)
            if (norm(nu) > maxR) ok = false;
        if (ok) return LatticeTrial{std::move(lat), std::move(nus)};
    }
    throw GenerationFailed("could not draw an independent constraint set");
}

IntersectionResult intersect_integer_subspaces(const IntMat& v1, const IntMat& v2, double R) {
    if (v1.empty() || v2.empty()) return {};
    if (gram_det_exact(v1) <= 0 || gram_det_exact(v2) <= 0)
        throw InvalidInput("each family must be linearly independent");
    const std::size_t d = v1[0].size();
    const std::size_t n = v1.size();
    const std::size_t m = v2.size();

    // rows are the d coordinate equations of M t = 0, M = [v1 | -v2]
    IntMat system(d, IntVec(n + m, 0));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) system[i][j] = v1[j][i];
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < d; ++i) system[i][n + j] = -v2[j][i];

    const IntMat kernel = kernel_lattice(system);
    IntMat generators;
    for (const auto& t : kernel) {
        IntVec w(d, 0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < d; ++i)
                w[i] = checked_ll(static_cast<int128>(w[i]) +
                                      static_cast<int128>(t[j]) * v1[j][i],
                                  "intersection generator");
        if (!is_zero(w)) generators.push_back(std::move(w));
    }
    IntersectionResult out;
    if (generators.empty()) return out;
    out.basis = hnf_rows(saturate_rows(generators));
    const std::size_t l = out.basis.size();
    const double scale = std::pow(R, static_cast<double>(m + n - l + 1));
    for (const auto& th : out.basis) out.normRatios.push_back(norm(th) / scale);
    return out;
}

} // namespace bsgaps
