#include "bsgaps/regions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

namespace bsgaps {

namespace {

Vecd intvec_to_vecd(const IntVec& v) {
    Vecd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
    return out;
}

Matd basis_columns(const IntMat& rows, int d) {
    Matd b(d, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j)
        b.col(static_cast<Eigen::Index>(j)) = intvec_to_vecd(rows[j]);
    return b;
}

Rng per_index_rng(std::uint64_t root, long long index) {
    return Rng(root ^ (static_cast<std::uint64_t>(index) * 0x9e3779b97f4a7c15ULL +
                       0xd1b54a32d192ed03ULL));
}

} // namespace

bool IntegerSubspace::contains(const IntegerSubspace& other) const {
    if (other.dim() > dim()) return false;
    for (const auto& row : other.basis) {
        if (!rational_coordinates(basis, row)) return false;
    }
    return true;
}

IntegerSubspace canonical_subspace(int ambientDim, const IntMat& generators) {
    IntegerSubspace s;
    s.ambientDim = ambientDim;
    IntMat gen;
    for (const auto& g : generators)
        if (!is_zero(g)) gen.push_back(g);
    if (!gen.empty()) s.basis = saturate_rows(gen);
    return s;
}

bool subspace_less(const IntegerSubspace& a, const IntegerSubspace& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    for (std::size_t i = 0; i < a.basis.size(); ++i) {
        if (a.basis[i] != b.basis[i]) return lex_less(a.basis[i], b.basis[i]);
    }
    return false;
}

std::vector<IntVec> theta_set(int j, double R, int d) {
    if (j < 0) throw InvalidParameter("theta_set: j must be >= 0");
    if (j == 0) return {IntVec(static_cast<std::size_t>(d), 0)};
    return enumerate_ball(d, j * R);
}

std::vector<IntVec> theta_set_prime(int j, double R, int d) {
    std::vector<IntVec> out = theta_set(j, R, d);
    out.erase(std::remove_if(out.begin(), out.end(), [](const IntVec& v) { return is_zero(v); }),
              out.end());
    return out;
}

namespace {

// primitive vectors of length < r, up to sign
std::vector<IntVec> primitive_directions(double r, int d, std::size_t cap) {
    std::vector<IntVec> out;
    for (const auto& m : enumerate_ball(d, r)) {
        if (is_zero(m)) continue;
        if (static_cast<double>(norm2_exact(m)) + 1e-9 >= r * r) continue; // strict length < r
        IntVec p = m;
        primitivize(p);
        if (p == m) out.push_back(p); // primitive and sign-normalized exactly once
        if (out.size() > cap) throw EnumerationTooLarge("too many primitive directions");
    }
    std::sort(out.begin(), out.end(), lex_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

IntVec cross3(const IntVec& a, const IntVec& b) {
    return IntVec{checked_ll(static_cast<int128>(a[1]) * b[2] - static_cast<int128>(a[2]) * b[1], "cross"),
                  checked_ll(static_cast<int128>(a[2]) * b[0] - static_cast<int128>(a[0]) * b[2], "cross"),
                  checked_ll(static_cast<int128>(a[0]) * b[1] - static_cast<int128>(a[1]) * b[0], "cross")};
}

} // namespace

std::vector<IntegerSubspace> enumerate_subspaces(double r, int n, int d, std::size_t cap) {
    if (n < 0 || n > d) throw InvalidParameter("subspace dimension out of range");
    std::vector<IntegerSubspace> out;
    if (n == 0) {
        out.push_back(IntegerSubspace{d, {}});
        return out;
    }
    const std::vector<IntVec> prim = primitive_directions(r, d, cap);
    if (n == 1) {
        out.reserve(prim.size());
        for (const auto& p : prim) out.push_back(IntegerSubspace{d, {p}});
        std::sort(out.begin(), out.end(), subspace_less);
        return out;
    }
    if (n == d) {
        // the whole space qualifies iff d independent short vectors exist
        IntMat acc;
        for (const auto& p : prim) {
            IntMat trial = acc;
            trial.push_back(p);
            if (gram_det_exact(trial) > 0) acc = std::move(trial);
            if (static_cast<int>(acc.size()) == d) break;
        }
        if (static_cast<int>(acc.size()) == d)
            out.push_back(canonical_subspace(d, acc));
        return out;
    }
    if (n == 2 && d == 3) {
        // dedupe 2-dim subspaces by their primitive normal
        if (prim.size() * prim.size() / 2 > 400'000'000ULL)
            throw EnumerationTooLarge("too many generator pairs");
        std::set<IntVec> normals;
        for (std::size_t i = 0; i < prim.size(); ++i)
            for (std::size_t j = i + 1; j < prim.size(); ++j) {
                IntVec nrm = cross3(prim[i], prim[j]);
                if (is_zero(nrm)) continue;
                primitivize(nrm);
                normals.insert(std::move(nrm));
                if (normals.size() > cap) throw EnumerationTooLarge("too many 2-subspaces");
            }
        for (const auto& nrm : normals) {
            IntegerSubspace s;
            s.ambientDim = d;
            s.basis = kernel_lattice(IntMat{nrm});
            out.push_back(std::move(s));
        }
        std::sort(out.begin(), out.end(), subspace_less);
        return out;
    }
    // generic small-case path: n-tuples with canonical dedup
    double work = 1.0;
    for (int i = 0; i < n; ++i) work *= static_cast<double>(prim.size());
    if (work > 2e8) throw EnumerationTooLarge("subspace enumeration too large");
    std::set<std::pair<int, IntMat>> seen;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    std::function<void(int, std::size_t, IntMat&)> rec = [&](int depth, std::size_t start,
                                                             IntMat& current) {
        if (depth == n) {
            IntegerSubspace s = canonical_subspace(d, current);
            if (s.dim() == n && seen.insert({n, s.basis}).second) out.push_back(std::move(s));
            if (seen.size() > cap) throw EnumerationTooLarge("too many subspaces");
            return;
        }
        for (std::size_t i = start; i < prim.size(); ++i) {
            current.push_back(prim[i]);
            if (gram_det_exact(current) > 0) rec(depth + 1, i + 1, current);
            current.pop_back();
        }
    };
    IntMat current;
    rec(0, 0, current);
    std::sort(out.begin(), out.end(), subspace_less);
    return out;
}

GDecomposition g_decompose(const Vecd& xi, const IntegerSubspace& V, const Metric& metric) {
    GDecomposition dec;
    const int d = metric.dim;
    if (V.dim() == 0) {
        dec.xi_V = Vecd::Zero(d);
        dec.xi_perp = xi;
        dec.r = metric.fnorm(xi);
        if (dec.r > 1e-12 * (1.0 + xi.norm())) {
            dec.dir = dec.xi_perp / dec.r;
            dec.dirDefined = true;
        }
        return dec;
    }
    const Matd b = basis_columns(V.basis, d);
    const Matd n = b.transpose() * metric.G * b;
    Eigen::PartialPivLU<Matd> lu(n);
    if (std::abs(lu.determinant()) < 1e-12)
        throw InternalError("singular normal matrix in g_decompose");
    const Vecd rhs = b.transpose() * (metric.G * xi);
    Vecd c = lu.solve(rhs);
    c += lu.solve(rhs - n * c); // one refinement pass
    dec.xi_V = b * c;
    dec.xi_perp = xi - dec.xi_V;
    dec.r = metric.fnorm(dec.xi_perp);
    if (dec.r > 1e-12 * (1.0 + metric.fnorm(xi))) {
        dec.dir = dec.xi_perp / dec.r;
        dec.dirDefined = true;
    }
    return dec;
}

RegionGeometry::SubspaceInfo RegionGeometry::make_info(const IntegerSubspace& sub) const {
    SubspaceInfo info;
    const int d = metric_.dim;
    const int n = sub.dim();
    const Matd b = basis_columns(sub.basis, d);
    const Matd nmat = b.transpose() * metric_.G * b;
    info.projector = b * nmat.inverse() * b.transpose() * metric_.G;
    // orthonormalize for the restricted quadratic form
    Eigen::HouseholderQR<Matd> qr(b);
    const Matd q = qr.householderQ() * Matd::Identity(d, static_cast<Eigen::Index>(n));
    info.smax = eigen_sym_values(q.transpose() * metric_.G * q).maxCoeff();
    info.sub = sub;
    return info;
}

RegionGeometry::RegionGeometry(const SpectralWindow& window, const RegionParameters& params,
                               const Metric& metric, std::size_t enumerationCap)
    : window_(window), params_(params), metric_(metric) {
    const int d = metric.dim;
    byDim_.resize(static_cast<std::size_t>(std::max(0, d - 1)));
    materialized_.assign(static_cast<std::size_t>(std::max(0, d - 1)), false);
    primitives_ = primitive_directions(params.theta_radius(), d, enumerationCap);
    for (int n = 1; n <= d - 1; ++n) {
        // materialize unless the tuple enumeration is out of reach; the 2-dim
        // family in d = 3 is served by the slab query instead, other oversized
        // families reject queries with EnumerationTooLarge
        double work = 1.0;
        for (int i = 0; i < n; ++i) work *= static_cast<double>(primitives_.size());
        if (n > 1 && (work > 2e6 || primitives_.size() > 2000)) continue;
        auto subs = enumerate_subspaces(params.theta_radius(), n, d, enumerationCap);
        auto& bucket = byDim_[static_cast<std::size_t>(n - 1)];
        bucket.reserve(subs.size());
        for (auto& s : subs) bucket.push_back(make_info(s));
        materialized_[static_cast<std::size_t>(n - 1)] = true;
    }
}

bool RegionGeometry::materialized(int n) const {
    if (n < 1 || n > metric_.dim - 1) throw InvalidParameter("family dimension out of range");
    return materialized_[static_cast<std::size_t>(n - 1)];
}

const std::vector<RegionGeometry::SubspaceInfo>& RegionGeometry::family(int n) const {
    if (n < 1 || n > metric_.dim - 1) throw InvalidParameter("family dimension out of range");
    if (!materialized_[static_cast<std::size_t>(n - 1)])
        throw EnumerationTooLarge("the dimension-" + std::to_string(n) +
                                  " family is too large to materialize");
    return byDim_[static_cast<std::size_t>(n - 1)];
}

bool RegionGeometry::in_Xi0(const SubspaceInfo& info, const Vecd& xi) const {
    if (!in_annulus(xi)) return false;
    const Vecd xv = project(info, xi);
    return xv.norm() < params_.Ln[static_cast<std::size_t>(info.sub.dim())];
}

bool RegionGeometry::in_Xi1(const SubspaceInfo& info, const Vecd& xi) const {
    if (!in_annulus(xi)) return false;
    const int n = info.sub.dim();
    const Vecd xv = project(info, xi);
    const double quad_perp = metric_.quad(xi - xv);
    const double c = window_.lambda - quad_perp;
    const double w = 40.0 * window_.v;
    const double ln = params_.Ln[static_cast<std::size_t>(n)];
    // feasibility of the affine slice (xi + V) meeting both the annulus and
    // |eta_V| < L_n: quad over the L_n ball in V covers [0, smax L_n^2)
    return c + w >= 0.0 && c - w < info.smax * ln * ln;
}

bool RegionGeometry::in_Xi2(const SubspaceInfo& info, const std::vector<SubspaceInfo>& containing,
                            const Vecd& xi) const {
    if (!in_Xi1(info, xi)) return false;
    for (const auto& w : containing)
        if (in_Xi1(w, xi)) return false;
    return true;
}

bool RegionGeometry::in_Xi3(const SubspaceInfo& info, const std::vector<SubspaceInfo>& containing,
                            const Vecd& xi) const {
    const int d = metric_.dim;
    const int n = info.sub.dim();
    const Matd b = basis_columns(info.sub.basis, d);
    Eigen::HouseholderQR<Matd> qr(b);
    const Matd q = qr.householderQ() * Matd::Identity(d, n);
    // deterministic grid of the open K-ball in the subspace
    const double K = params_.K;
    std::vector<double> steps;
    for (int s = -3; s <= 3; ++s) steps.push_back(0.25 * K * s);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Vecd a = Vecd::Zero(d);
        double norm2 = 0.0;
        for (int t = 0; t < n; ++t) {
            const double c = steps[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])];
            a += c * q.col(t);
            norm2 += c * c;
        }
        if (norm2 < K * K * (1.0 - 1e-12) && in_Xi2(info, containing, xi - a)) return true;
        int pos = n - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == static_cast<int>(steps.size()) - 1) {
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
    return false;
}

namespace {

// packed key for a small integer vector with entries in (-2^20, 2^20)
std::uint64_t pack_key3(const IntVec& v) {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < v.size() && i < 3; ++i)
        key = (key << 21) | static_cast<std::uint64_t>(v[i] + (1 << 20));
    return key;
}

} // namespace

// Exact generator slab: if xi (or a probe point near it) lies in Xi1(W) for a
// subspace W of dimension n, then quad(xi_W) < gmax L_n^2 + 80v, hence every
// generator u of W satisfies |<u, G xi>| <= |u| gmax sqrt((gmax L_n^2 + 80v)/gmin).
std::vector<RegionGeometry::SubspaceInfo> RegionGeometry::query_dim2_hits(const Vecd& xi) const {
    const double ln = params_.Ln[2];
    const double q = metric_.gmax * ln * ln + 80.0 * window_.v;
    const double slab = metric_.gmax * std::sqrt(q / metric_.gmin);
    const Vecd gxi = metric_.G * xi;
    std::vector<const IntVec*> cand;
    for (const auto& p : primitives_) {
        double dot = 0.0;
        for (int t = 0; t < metric_.dim; ++t)
            dot += static_cast<double>(p[static_cast<std::size_t>(t)]) * gxi(t);
        if (std::abs(dot) <= norm(p) * slab) cand.push_back(&p);
    }
    if (cand.size() * cand.size() / 2 > 40'000'000ULL)
        throw EnumerationTooLarge("slab query too large at this rho");
    std::set<std::uint64_t> seen;
    std::vector<SubspaceInfo> hits;
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t j = i + 1; j < cand.size(); ++j) {
            IntVec nrm = cross3(*cand[i], *cand[j]);
            if (is_zero(nrm)) continue;
            primitivize(nrm);
            if (!seen.insert(pack_key3(nrm)).second) continue;
            IntegerSubspace sub;
            sub.ambientDim = 3;
            sub.basis = kernel_lattice(IntMat{nrm});
            SubspaceInfo info = make_info(sub);
            if (in_Xi1(info, xi)) hits.push_back(std::move(info));
        }
    std::sort(hits.begin(), hits.end(),
              [](const SubspaceInfo& a, const SubspaceInfo& b) { return subspace_less(a.sub, b.sub); });
    return hits;
}

std::vector<RegionGeometry::SubspaceInfo>
RegionGeometry::containing_candidates(const SubspaceInfo& base,
                                      const std::vector<Vecd>& probes) const {
    std::vector<SubspaceInfo> out;
    for (int m = base.sub.dim() + 1; m <= metric_.dim - 1; ++m) {
        if (materialized(m)) {
            for (const auto& cand : family(m))
                if (cand.sub.contains(base.sub)) out.push_back(cand);
            continue;
        }
        if (!(metric_.dim == 3 && m == 2 && base.sub.dim() == 1))
            throw EnumerationTooLarge("containing-subspace query unsupported here");
        // W = span(theta, u) with u from the union of the probe slabs
        const IntVec& theta = base.sub.basis[0];
        const double ln = params_.Ln[2];
        const double q = metric_.gmax * ln * ln + 80.0 * window_.v;
        const double slab = metric_.gmax * std::sqrt(q / metric_.gmin);
        std::vector<Vecd> gprobes;
        gprobes.reserve(probes.size());
        for (const auto& p : probes) gprobes.push_back(metric_.G * p);
        std::set<std::uint64_t> seen;
        for (const auto& u : primitives_) {
            bool inSlab = false;
            const double un = norm(u);
            for (const auto& gp : gprobes) {
                double dot = 0.0;
                for (int t = 0; t < 3; ++t)
                    dot += static_cast<double>(u[static_cast<std::size_t>(t)]) * gp(t);
                if (std::abs(dot) <= un * slab) {
                    inSlab = true;
                    break;
                }
            }
            if (!inSlab) continue;
            IntVec nrm = cross3(theta, u);
            if (is_zero(nrm)) continue;
            primitivize(nrm);
            if (!seen.insert(pack_key3(nrm)).second) continue;
            IntegerSubspace sub;
            sub.ambientDim = 3;
            sub.basis = kernel_lattice(IntMat{nrm});
            if (sub.contains(base.sub)) out.push_back(make_info(sub));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const SubspaceInfo& a, const SubspaceInfo& b) { return subspace_less(a.sub, b.sub); });
    return out;
}

ResonanceLabel RegionGeometry::classify(const Vecd& xi) const {
    if (!in_annulus(xi))
        throw OutsideAnnulus("point is outside the wide annulus");
    for (int n = metric_.dim - 1; n >= 1; --n) {
        const SubspaceInfo* hit = nullptr;
        SubspaceInfo queried;
        if (materialized(n)) {
            for (const auto& info : family(n))
                if (in_Xi1(info, xi)) {
                    hit = &info;
                    break;
                }
        } else if (metric_.dim == 3 && n == 2) {
            auto hits = query_dim2_hits(xi);
            if (!hits.empty()) {
                queried = hits.front();
                hit = &queried;
            }
        } else {
            throw EnumerationTooLarge("classification family too large at dimension " +
                                      std::to_string(n));
        }
        if (hit) {
            ResonanceLabel label;
            label.resonant = true;
            label.subspace = hit->sub;
            label.decomp = g_decompose(xi, hit->sub, metric_);
            label.tier = in_Xi0(*hit, xi) ? 0 : 1;
            return label;
        }
    }
    ResonanceLabel label;
    label.resonant = false;
    return label;
}

std::vector<IntegerSubspace> RegionGeometry::xi1_hits(const Vecd& xi) const {
    std::vector<IntegerSubspace> hits;
    for (int n = 1; n <= metric_.dim - 1; ++n) {
        if (materialized(n)) {
            for (const auto& info : family(n))
                if (in_Xi1(info, xi)) hits.push_back(info.sub);
        } else if (metric_.dim == 3 && n == 2) {
            for (auto& info : query_dim2_hits(xi)) hits.push_back(std::move(info.sub));
        } else {
            throw EnumerationTooLarge("xi1_hits family too large at dimension " +
                                      std::to_string(n));
        }
    }
    return hits;
}

bool RegionGeometry::in_B_tilde(const Vecd& xi) const {
    const double threshold = std::sqrt(params_.rho);
    for (const auto& info : family(1)) {
        if (project(info, xi).norm() <= threshold) return false;
    }
    return true;
}

Vecd RegionGeometry::sample_annulus(Rng& rng) const {
    const int d = metric_.dim;
    const double lambda = window_.lambda;
    const double w = 40.0 * window_.v;
    const double rhi = std::sqrt(lambda + w);
    const double rlo = std::sqrt(std::max(0.0, lambda - w));
    Vecd dir(d);
    double n2 = 0.0;
    while (n2 < 1e-12) {
        for (int i = 0; i < d; ++i) dir(i) = rng.normal();
        n2 = dir.squaredNorm();
    }
    dir /= std::sqrt(n2);
    double radius;
    if (rhi - rlo < 1e-14 * rhi) {
        radius = std::sqrt(lambda);
    } else {
        const double u = rng.uniform();
        radius = std::pow(std::pow(rlo, d) + u * (std::pow(rhi, d) - std::pow(rlo, d)),
                          1.0 / d);
    }
    return metric_.F.partialPivLu().solve(radius * dir);
}

PartitionReport partition_diagnostics(const RegionGeometry& geometry, long long sampleCount,
                                      std::uint64_t seed, int threads) {
    PartitionReport rep;
    rep.samples = sampleCount;
    const std::uint64_t root = Rng(seed).next_u64();
    const int nthreads = std::max(1, threads);

    struct Tally {
        long long resonant = 0, nonResonant = 0, overlap = 0, violations = 0;
        double maxRatio = 0.0;
        bool total = true, deterministic = true;
    };
    std::vector<Tally> tallies(static_cast<std::size_t>(nthreads));

    auto worker = [&](int t) {
        Tally& tally = tallies[static_cast<std::size_t>(t)];
        for (long long i = t; i < sampleCount; i += nthreads) {
            Rng rng = per_index_rng(root, i);
            const Vecd xi = geometry.sample_annulus(rng);
            ResonanceLabel a, b;
            try {
                a = geometry.classify(xi);
                b = geometry.classify(xi);
            } catch (const Error&) {
                tally.total = false;
                continue;
            }
            if (a.resonant != b.resonant || (a.resonant && !(a.subspace == b.subspace)))
                tally.deterministic = false;
            if (a.resonant) {
                ++tally.resonant;
                const double ln =
                    geometry.params().Ln[static_cast<std::size_t>(a.subspace.dim())];
                const double ratio = a.decomp.xi_V.norm() / ln;
                tally.maxRatio = std::max(tally.maxRatio, ratio);
                if (ratio >= 2.0) ++tally.violations;
                const auto hits = geometry.xi1_hits(xi);
                bool incomparable = false;
                for (std::size_t x = 0; x < hits.size() && !incomparable; ++x)
                    for (std::size_t y = x + 1; y < hits.size() && !incomparable; ++y)
                        if (!hits[x].contains(hits[y]) && !hits[y].contains(hits[x]))
                            incomparable = true;
                if (incomparable) ++tally.overlap;
            } else {
                ++tally.nonResonant;
            }
        }
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    rep.total = true;
    rep.deterministic = true;
    for (const auto& t : tallies) {
        rep.resonant += t.resonant;
        rep.nonResonant += t.nonResonant;
        rep.overlapSamples += t.overlap;
        rep.changedXi0Violations += t.violations;
        rep.maxXiVOverLn = std::max(rep.maxXiVOverLn, t.maxRatio);
        rep.total = rep.total && t.total;
        rep.deterministic = rep.deterministic && t.deterministic;
    }
    rep.overlapRate = sampleCount > 0 ? static_cast<double>(rep.overlapSamples) / sampleCount : 0.0;
    return rep;
}

PencilDecomposition pencil_decompose(const Vecd& xi, const IntegerSubspace& V,
                                     const RegionGeometry& geometry,
                                     const FourierPotential& potential, double cutoffRadius) {
    const Metric& metric = geometry.metric();
    const RegionParameters& params = geometry.params();
    const SpectralWindow& window = geometry.window();
    const int d = metric.dim;
    const int n = V.dim();
    if (n < 1 || n > d - 1) throw NotResonant("subspace dimension must be 1..d-1");

    const ResonanceLabel label = geometry.classify(xi);
    if (!label.resonant) throw NotResonant("point classifies as non-resonant");

    // the subspace must be generated by short integer vectors
    {
        IntMat gens = enumerate_lattice_ball(V.basis, params.theta_radius() * (1.0 - 1e-12));
        IntMat acc;
        for (const auto& g : gens) {
            IntMat trial = acc;
            trial.push_back(g);
            if (gram_det_exact(trial) > 0) acc = std::move(trial);
            if (static_cast<int>(acc.size()) == n) break;
        }
        if (static_cast<int>(acc.size()) != n)
            throw NotResonant("subspace is not an integer 6MR-subspace");
    }
    const RegionGeometry::SubspaceInfo info = geometry.make_info(V);
    if (!geometry.in_Xi1(info, xi)) throw NotResonant("point is not in Xi1 of the subspace");

    PencilDecomposition p;
    p.xi = xi;
    const GDecomposition dec = g_decompose(xi, V, metric);
    if (!dec.dirDefined) throw NotResonant("xi lies in the subspace; cylindrical direction undefined");
    p.r = dec.r;
    p.dir = dec.dir;

    // phase 1: lattice points of the affine slice xi + (V meet Z^d) inside
    // the K-fattened annulus, via a coefficient box in the subspace lattice
    const double qhi = std::pow(std::sqrt(window.lambda + 40.0 * window.v) +
                                    params.K * std::sqrt(metric.gmax),
                                2.0);
    const double bound2 = qhi - metric.quad(dec.xi_perp);
    std::vector<IntVec> coarse;
    {
        const Matd b = basis_columns(V.basis, d);
        const Matd fb = metric.F * b;
        const Matd gram = fb.transpose() * fb;
        const Matd ginv = gram.inverse();
        // center of the box: coordinates of -xi_V
        const Vecd c0 = gram.partialPivLu().solve(fb.transpose() * (metric.F * (-dec.xi_V)));
        const double bnd = std::sqrt(std::max(0.0, bound2));
        std::vector<long long> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) {
            const double half = bnd * std::sqrt(std::max(0.0, ginv(t, t))) + 1.0;
            lo[static_cast<std::size_t>(t)] = static_cast<long long>(std::floor(c0(t) - half));
            hi[static_cast<std::size_t>(t)] = static_cast<long long>(std::ceil(c0(t) + half));
        }
        std::vector<long long> c(static_cast<std::size_t>(n));
        std::function<void(int)> rec = [&](int depth) {
            if (depth == n) {
                IntVec w(static_cast<std::size_t>(d), 0);
                for (int t = 0; t < n; ++t)
                    for (int s = 0; s < d; ++s)
                        w[static_cast<std::size_t>(s)] = checked_ll(
                            static_cast<int128>(w[static_cast<std::size_t>(s)]) +
                                static_cast<int128>(c[static_cast<std::size_t>(t)]) *
                                    V.basis[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)],
                            "pencil slice");
                if (metric.quad(dec.xi_V + intvec_to_vecd(w)) <= bound2)
                    coarse.push_back(std::move(w));
                return;
            }
            for (long long x = lo[static_cast<std::size_t>(depth)];
                 x <= hi[static_cast<std::size_t>(depth)]; ++x) {
                c[static_cast<std::size_t>(depth)] = x;
                rec(depth + 1);
            }
        };
        rec(0);
    }

    // phase 2: restrict to Xi3 membership, with the containing-subspace
    // exclusions gathered once for all probe points
    std::vector<Vecd> probes;
    probes.reserve(coarse.size());
    for (const auto& w : coarse) probes.push_back(xi + intvec_to_vecd(w));
    const auto containing = geometry.containing_candidates(info, probes);
    std::vector<IntVec> slice;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        if (is_zero(coarse[i]) || geometry.in_Xi3(info, containing, probes[i]))
            slice.push_back(coarse[i]);
    }

    // Upsilon = slice + Theta_M, truncated to the ambient cutoff ball
    const double cutoff = cutoffRadius > 0.0
                              ? cutoffRadius
                              : std::sqrt(window.lambda + 40.0 * window.v) +
                                    (params.M * params.R + params.K + 1.0) *
                                        std::sqrt(metric.gmax);
    const auto thetaM = theta_set(params.M, params.R, d);
    std::set<IntVec> offsets;
    for (const auto& w : slice)
        for (const auto& th : thetaM) {
            IntVec off = w;
            for (std::size_t t = 0; t < off.size(); ++t) off[t] += th[t];
            Vecd eta = xi + intvec_to_vecd(off);
            if (metric.fnorm(eta) <= cutoff) offsets.insert(std::move(off));
        }
    p.offsets.assign(offsets.begin(), offsets.end());
    std::sort(p.offsets.begin(), p.offsets.end(), lex_less);

    // classes of (eta - xi) modulo V: keyed by integer functionals that vanish
    // exactly on the subspace
    const IntMat functionals = kernel_lattice(V.basis);
    auto key_of = [&](const IntVec& off) {
        IntVec key;
        key.reserve(functionals.size());
        for (const auto& f : functionals) key.push_back(checked_ll(dot_exact(f, off), "class key"));
        return key;
    };
    std::vector<IntVec> keys;
    for (const auto& off : p.offsets) keys.push_back(key_of(off));
    std::vector<IntVec> uniqueKeys = keys;
    std::sort(uniqueKeys.begin(), uniqueKeys.end(), lex_less);
    uniqueKeys.erase(std::unique(uniqueKeys.begin(), uniqueKeys.end()), uniqueKeys.end());
    const IntVec zeroKey(functionals.size(), 0);
    // class 0 is the subspace itself
    std::map<IntVec, int> classOf;
    classOf[zeroKey] = 0;
    int next = 1;
    for (const auto& k : uniqueKeys)
        if (classOf.find(k) == classOf.end()) classOf[k] = next++;
    p.psiClass.reserve(p.offsets.size());
    for (const auto& k : keys) p.psiClass.push_back(classOf.at(k));

    p.classReps.assign(static_cast<std::size_t>(next), IntVec());
    auto rep_less = [](const IntVec& a, const IntVec& b) {
        const int128 na = norm2_exact(a), nb = norm2_exact(b);
        if (na != nb) return na < nb;
        return lex_less(a, b);
    };
    for (const auto& th : thetaM) {
        const IntVec k = key_of(th);
        const auto it = classOf.find(k);
        if (it == classOf.end()) continue;
        auto& rep = p.classReps[static_cast<std::size_t>(it->second)];
        if (rep.empty() || rep_less(th, rep)) rep = th;
    }
    for (std::size_t c = 0; c < p.classReps.size(); ++c) {
        bool used = false;
        for (int pc : p.psiClass)
            if (pc == static_cast<int>(c)) used = true;
        if (used && p.classReps[c].empty())
            throw InternalError("pencil class without a Theta_M representative");
    }

    const std::size_t m = p.offsets.size();
    p.aDiag.resize(static_cast<Eigen::Index>(m));
    p.B = Matd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const Vecd off = intvec_to_vecd(p.offsets[i]);
        p.aDiag(static_cast<Eigen::Index>(i)) = 2.0 * metric.gdot(p.dir, off);
        p.B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            metric.quad(dec.xi_V + off);
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            IntVec diff(p.offsets[i]);
            for (std::size_t t = 0; t < diff.size(); ++t) diff[t] -= p.offsets[j][t];
            const double c = potential.coeff(diff);
            if (c != 0.0) {
                p.B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
                p.B(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
            }
        }
    return p;
}

Matd pencil_matrix(const PencilDecomposition& p) {
    const Eigen::Index m = static_cast<Eigen::Index>(p.size());
    Matd h = p.B;
    for (Eigen::Index i = 0; i < m; ++i)
        h(i, i) += p.r * p.r + p.r * p.aDiag(i);
    return h;
}

Matd pencil_direct_matrix(const PencilDecomposition& p, const FourierPotential& potential,
                          const Metric& metric) {
    const std::size_t m = p.size();
    Matd h = Matd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            metric.quad(p.frequency(i, metric.dim));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            IntVec diff(p.offsets[i]);
            for (std::size_t t = 0; t < diff.size(); ++t) diff[t] -= p.offsets[j][t];
            const double c = potential.coeff(diff);
            if (c != 0.0) {
                h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
                h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
            }
        }
    return h;
}

double pencil_spectrum_deviation(const PencilDecomposition& p, const FourierPotential& potential,
                                 const Metric& metric) {
    const Eigen::Index m = static_cast<Eigen::Index>(p.size());
    Matd shiftedPencil = p.B;
    for (Eigen::Index i = 0; i < m; ++i) shiftedPencil(i, i) += p.r * p.aDiag(i);
    Matd shiftedDirect = pencil_direct_matrix(p, potential, metric);
    const double r2 = p.r * p.r;
    for (Eigen::Index i = 0; i < m; ++i) shiftedDirect(i, i) -= r2;
    const Vecd a = eigen_sym_values(shiftedPencil);
    const Vecd b = eigen_sym_values(shiftedDirect);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) worst = std::max(worst, std::abs(a(i) - b(i)));
    return worst;
}

VolumeEstimates volume_estimates(const RegionGeometry& geometry, double delta,
                                 long long sampleCount, std::uint64_t seed,
                                 const std::function<double(const Vecd&)>& g, const Vecd* shift,
                                 int threads) {
    const Metric& metric = geometry.metric();
    const SpectralWindow& window = geometry.window();
    const int d = metric.dim;
    const double v = window.v;
    if (!(delta > 0.0)) throw InvalidParameter("delta must be positive");
    if (v > 0.0 && delta > v) throw InvalidParameter("delta must not exceed v");

    // sampling shell in |F xi|^2 covering every estimated set
    const double w = v > 0.0 ? std::min(20.0 * v, 2.0 * v + delta) : 2.0 * delta;
    const double rhi = std::sqrt(window.lambda + w);
    const double rlo = std::sqrt(std::max(0.0, window.lambda - w));
    const double gammaHalf = std::tgamma(static_cast<double>(d) / 2.0 + 1.0);
    const double omega = std::pow(3.14159265358979323846, static_cast<double>(d) / 2.0) / gammaHalf;
    const double shellVol =
        omega * (std::pow(rhi, d) - std::pow(rlo, d)) / metric.F.determinant();

    const std::uint64_t root = Rng(seed).next_u64();
    const int nthreads = std::max(1, threads);
    struct Tally {
        long long inA = 0, inB = 0, inD = 0, inShift = 0, failures = 0;
    };
    std::vector<Tally> tallies(static_cast<std::size_t>(nthreads));

    const double lambda = window.lambda;
    auto g_window = [&](const Vecd& xi) -> bool {
        const double val = g(xi);
        return std::abs(val - lambda) <= delta;
    };
    auto membership = [&](const Vecd& xi, bool& inA, bool& inB, bool& inD) {
        inA = inB = inD = false;
        const bool annulus = v > 0.0 ? window.in_annulus_narrow(metric, xi) : true;
        if (!annulus) return;
        if (!g_window(xi)) return;
        inA = true;
        if (geometry.in_B_tilde(xi))
            inB = true;
        else
            inD = true;
    };

    const Eigen::PartialPivLU<Matd> fLu(metric.F);
    auto worker = [&](int t) {
        Tally& tally = tallies[static_cast<std::size_t>(t)];
        for (long long i = t; i < sampleCount; i += nthreads) {
            Rng rng = per_index_rng(root, i);
            Vecd dir(d);
            double n2 = 0.0;
            while (n2 < 1e-12) {
                for (int q = 0; q < d; ++q) dir(q) = rng.normal();
                n2 = dir.squaredNorm();
            }
            dir /= std::sqrt(n2);
            const double u = rng.uniform();
            const double radius = std::pow(
                std::pow(rlo, d) + u * (std::pow(rhi, d) - std::pow(rlo, d)), 1.0 / d);
            const Vecd xi = fLu.solve(radius * dir);
            bool inA = false, inB = false, inD = false;
            try {
                membership(xi, inA, inB, inD);
            } catch (const Error&) {
                ++tally.failures;
                continue;
            }
            tally.inA += inA;
            tally.inB += inB;
            tally.inD += inD;
            if (shift && inB) {
                bool sA = false, sB = false, sD = false;
                try {
                    membership(xi - *shift, sA, sB, sD);
                } catch (const Error&) {
                    sB = false;
                }
                tally.inShift += (sB ? 1 : 0);
            }
        }
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    long long cA = 0, cB = 0, cD = 0, cS = 0;
    for (const auto& t : tallies) {
        cA += t.inA;
        cB += t.inB;
        cD += t.inD;
        cS += t.inShift;
    }
    auto estimate = [&](long long c, double& vol, double& sigma) {
        const double f = sampleCount > 0 ? static_cast<double>(c) / sampleCount : 0.0;
        vol = shellVol * f;
        sigma = sampleCount > 0 ? shellVol * std::sqrt(f * (1.0 - f) / sampleCount) : 0.0;
    };
    VolumeEstimates est;
    est.samples = sampleCount;
    est.shellVolume = shellVol;
    estimate(cA, est.volA, est.sigmaA);
    estimate(cB, est.volB, est.sigmaB);
    estimate(cD, est.volD, est.sigmaD);
    if (shift) {
        est.shiftRequested = true;
        estimate(cS, est.volShift, est.sigmaShift);
    }
    const double rho = window.rho;
    est.predictedAB = std::pow(rho, d - 2) * delta;
    est.predictedShift = delta * delta * std::pow(rho, d - 3) + delta * std::pow(rho, -d);
    est.ratioA = est.volA / est.predictedAB;
    est.ratioB = est.volB / est.predictedAB;
    est.ratioShift = est.predictedShift > 0.0 ? est.volShift / est.predictedShift : 0.0;
    return est;
}

} // namespace bsgaps
