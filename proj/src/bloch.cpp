#include "bsgaps/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <thread>

namespace bsgaps {

BlochBasis build_basis(const Vecd& k, double cutoffRadius, const Metric& metric,
                       std::size_t maxSize) {
    if (!(cutoffRadius > 0.0)) throw InvalidParameter("cutoff radius must be positive");
    const int d = metric.dim;
    // |F(m+k)| >= sqrt(gmin) |m+k|, so |m| <= cutoff/sqrt(gmin) + |k| bounds the box
    const double boxr = cutoffRadius / std::sqrt(metric.gmin) + std::sqrt(static_cast<double>(d));
    const long long lim = static_cast<long long>(std::floor(boxr)) + 1;

    BlochBasis basis;
    basis.k = k;
    basis.cutoff = cutoffRadius;
    const double c2 = cutoffRadius * cutoffRadius;
    IntVec m(static_cast<std::size_t>(d), 0);
    Vecd xi(d);
    // lexicographic odometer over the box keeps the output sorted
    std::vector<long long> idx(static_cast<std::size_t>(d), -lim);
    while (true) {
        for (int i = 0; i < d; ++i) {
            m[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
            xi(i) = static_cast<double>(idx[static_cast<std::size_t>(i)]) + k(i);
        }
        if (metric.quad(xi) <= c2) {
            basis.points.push_back(m);
            if (basis.points.size() > maxSize)
                throw BasisTooLarge("plane-wave basis exceeds " + std::to_string(maxSize) +
                                    " points");
        }
        int pos = d - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == lim) {
            idx[static_cast<std::size_t>(pos)] = -lim;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
    return basis;
}

Matd assemble(const BlochBasis& basis, const FourierPotential& potential, const Metric& metric) {
    if (basis.points.empty()) throw InvalidInput("empty basis");
    const std::size_t n = basis.size();
    const int d = metric.dim;
    Matd h = Matd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Vecd xi(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int t = 0; t < d; ++t)
            xi(t) = static_cast<double>(basis.points[i][static_cast<std::size_t>(t)]) + basis.k(t);
        h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = metric.quad(xi);
    }
    if (potential.empty()) return h;
    // points are sorted: locate m_i + s by binary search for each support shift
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [s, c] : potential.coeffs) {
            IntVec target(basis.points[i]);
            for (std::size_t t = 0; t < target.size(); ++t) target[t] += s[t];
            const auto it = std::lower_bound(basis.points.begin(), basis.points.end(), target,
                                             lex_less);
            if (it != basis.points.end() && *it == target) {
                const std::size_t j = static_cast<std::size_t>(it - basis.points.begin());
                // entry (j, i) = vhat(m_j - m_i) = vhat(s)
                h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
            }
        }
    }
    return h;
}

Vecd eigenvalues(const Matd& symmetric) { return eigen_sym_values(symmetric); }

std::vector<double> spectrum_at(const Vecd& k, double cutoffRadius,
                                const FourierPotential& potential, const Metric& metric,
                                double keepLimit, std::size_t maxBasis) {
    const BlochBasis basis = build_basis(k, cutoffRadius, metric, maxBasis);
    std::vector<double> kept;
    if (potential.empty()) {
        const int d = metric.dim;
        Vecd xi(d);
        kept.reserve(basis.size());
        for (const auto& m : basis.points) {
            for (int t = 0; t < d; ++t) xi(t) = static_cast<double>(m[static_cast<std::size_t>(t)]) + k(t);
            const double a = metric.quad(xi);
            if (a <= keepLimit) kept.push_back(a);
        }
        std::sort(kept.begin(), kept.end());
        return kept;
    }
    const Vecd ev = eigenvalues(assemble(basis, potential, metric));
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > keepLimit) break;
        kept.push_back(ev(i));
    }
    return kept;
}

std::vector<Vecd> uniform_k_grid(int d, int n) {
    std::vector<Vecd> grid;
    grid.reserve(static_cast<std::size_t>(std::pow(n, d)));
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
        Vecd k(d);
        for (int i = 0; i < d; ++i) k(i) = static_cast<double>(idx[static_cast<std::size_t>(i)]) / n;
        grid.push_back(k);
        int pos = d - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - 1) {
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
    }
    return grid;
}

std::vector<Vecd> midpoint_k_grid(int d, int n) {
    std::vector<Vecd> grid = uniform_k_grid(d, n);
    for (auto& k : grid)
        for (int i = 0; i < d; ++i) k(i) += 0.5 / n;
    return grid;
}

namespace {

// grid key with tolerance-free exactness: k components are i/n or (i+.5)/n,
// stored as rounded multiples of 1/(2n) when possible; fall back to bits
std::vector<long long> k_key(const Vecd& k) {
    std::vector<long long> key(static_cast<std::size_t>(k.size()));
    for (Eigen::Index i = 0; i < k.size(); ++i) {
        const double scaled = k(i) * 1e12;
        key[static_cast<std::size_t>(i)] = static_cast<long long>(std::llround(scaled));
    }
    return key;
}

Vecd mirror_k(const Vecd& k) {
    Vecd out(k.size());
    for (Eigen::Index i = 0; i < k.size(); ++i) {
        const double f = -k(i) - std::floor(-k(i));
        out(i) = (f >= 1.0) ? 0.0 : f;
    }
    return out;
}

} // namespace

BandTable band_table(const std::vector<Vecd>& kGrid, double cutoffRadius,
                     const FourierPotential& potential, const Metric& metric, double lambdaMax,
                     int threads, bool useTimeReversal) {
    if (kGrid.empty()) throw InvalidInput("empty quasi-momentum grid");
    BandTable table;
    table.kGrid = kGrid;
    table.cutoffRadius = cutoffRadius;
    table.lambdaMax = lambdaMax;
    table.keepLimit = 0.5 * cutoffRadius * cutoffRadius;
    if (lambdaMax > table.keepLimit)
        throw Uncertified("lambdaMax " + std::to_string(lambdaMax) +
                          " exceeds the certification limit 0.5*cutoff^2 = " +
                          std::to_string(table.keepLimit));
    table.eigs.resize(kGrid.size());

    // orbit representatives under k -> -k (mod 1)
    std::vector<std::size_t> rep_of(kGrid.size());
    std::vector<std::size_t> reps;
    {
        std::map<std::vector<long long>, std::size_t> seen;
        for (std::size_t i = 0; i < kGrid.size(); ++i) {
            const auto self = k_key(kGrid[i]);
            auto it = seen.find(self);
            if (it == seen.end() && useTimeReversal) it = seen.find(k_key(mirror_k(kGrid[i])));
            if (it != seen.end()) {
                rep_of[i] = it->second;
            } else {
                rep_of[i] = i;
                reps.push_back(i);
                seen[self] = i;
            }
        }
    }

    std::vector<std::vector<double>> rep_spectra(reps.size());
    const int nthreads = std::max(1, threads);
    auto worker = [&](std::size_t t0) {
        for (std::size_t r = t0; r < reps.size(); r += static_cast<std::size_t>(nthreads))
            rep_spectra[r] = spectrum_at(kGrid[reps[r]], cutoffRadius, potential, metric,
                                         table.keepLimit);
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, static_cast<std::size_t>(t));
        for (auto& th : pool) th.join();
    }

    std::map<std::size_t, std::size_t> rep_slot;
    for (std::size_t r = 0; r < reps.size(); ++r) rep_slot[reps[r]] = r;
    std::size_t jcount = SIZE_MAX;
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        table.eigs[i] = rep_spectra[rep_slot[rep_of[i]]];
        jcount = std::min(jcount, table.eigs[i].size());
    }
    table.jCount = static_cast<int>(jcount);
    for (auto& e : table.eigs) e.resize(jcount);
    return table;
}

TruncationReport truncation_check(const Vecd& k, const FourierPotential& potential,
                                  const Metric& metric, const std::vector<double>& cutoffs,
                                  int jLo, int jHi) {
    if (cutoffs.size() < 2) throw InvalidParameter("need at least two cutoffs");
    if (!std::is_sorted(cutoffs.begin(), cutoffs.end()))
        throw InvalidParameter("cutoffs must be ascending");
    TruncationReport rep;
    rep.cutoffs = cutoffs;
    std::vector<std::vector<double>> spectra;
    for (double c : cutoffs)
        spectra.push_back(spectrum_at(k, c, potential, metric, 0.5 * c * c));
    for (std::size_t i = 0; i + 1 < spectra.size(); ++i) {
        double worst = 0.0;
        const int hi = std::min<int>(jHi, static_cast<int>(
                                              std::min(spectra[i].size(), spectra[i + 1].size())));
        for (int j = jLo; j <= hi; ++j)
            worst = std::max(worst, std::abs(spectra[i][static_cast<std::size_t>(j - 1)] -
                                             spectra[i + 1][static_cast<std::size_t>(j - 1)]));
        rep.maxChange.push_back(worst);
    }
    rep.monotone = std::is_sorted(rep.maxChange.rbegin(), rep.maxChange.rend());
    rep.pass = !rep.maxChange.empty() && rep.maxChange.back() <= 1e-8;
    return rep;
}

} // namespace bsgaps
