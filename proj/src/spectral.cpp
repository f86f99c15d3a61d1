#include "bsgaps/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

namespace bsgaps {

namespace {

// neighbor node indices along each axis (wraparound), for a row-major
// uniform grid of side n
std::vector<std::size_t> axis_neighbors(std::size_t node, int d, int n) {
    std::vector<std::size_t> out;
    std::vector<int> coord(static_cast<std::size_t>(d));
    std::size_t rest = node;
    for (int i = d - 1; i >= 0; --i) {
        coord[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(n));
        rest /= static_cast<std::size_t>(n);
    }
    for (int axis = 0; axis < d; ++axis) {
        for (int step : {-1, 1}) {
            std::vector<int> c = coord;
            c[static_cast<std::size_t>(axis)] =
                (c[static_cast<std::size_t>(axis)] + step + n) % n;
            std::size_t idx = 0;
            for (int i = 0; i < d; ++i)
                idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(c[static_cast<std::size_t>(i)]);
            out.push_back(idx);
        }
    }
    return out;
}

double golden_line_extremum(const std::function<double(double)>& f, double a, double b,
                            bool maximize, int iters, double* widthOut) {
    const double phi = 0.6180339887498949;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        const bool moveRight = maximize ? (f1 < f2) : (f1 > f2);
        if (moveRight) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    if (widthOut) *widthOut = std::abs(f1 - f2);
    return maximize ? std::max(f1, f2) : std::min(f1, f2);
}

} // namespace

std::vector<BandInterval> band_intervals(const BandTable& table, bool refine,
                                         const FourierPotential* potential, const Metric* metric,
                                         int gridN) {
    if (table.kGrid.empty()) throw InvalidInput("empty band table");
    const int d = static_cast<int>(table.kGrid[0].size());
    int n = gridN;
    if (n <= 0) {
        n = static_cast<int>(std::llround(std::pow(static_cast<double>(table.kGrid.size()),
                                                   1.0 / d)));
        if (static_cast<std::size_t>(std::pow(n, d)) != table.kGrid.size()) n = 0;
    }

    std::vector<BandInterval> bands(static_cast<std::size_t>(table.jCount));
    for (int j = 0; j < table.jCount; ++j) {
        auto& band = bands[static_cast<std::size_t>(j)];
        band.j = j + 1;
        band.lo = std::numeric_limits<double>::infinity();
        band.hi = -std::numeric_limits<double>::infinity();
        std::size_t argmin = 0, argmax = 0;
        for (std::size_t kx = 0; kx < table.kGrid.size(); ++kx) {
            const double val = table.band_value(kx, j);
            if (val < band.lo) {
                band.lo = val;
                argmin = kx;
            }
            if (val > band.hi) {
                band.hi = val;
                argmax = kx;
            }
        }
        if (n > 1) {
            for (std::size_t kx = 0; kx < table.kGrid.size(); ++kx) {
                const double val = table.band_value(kx, j);
                for (std::size_t nb : axis_neighbors(kx, d, n))
                    band.uncertainty = std::max(band.uncertainty,
                                                std::abs(val - table.band_value(nb, j)));
            }
        }
        if (refine && potential && metric && n > 1) {
            const double h = 1.0 / n;
            auto value_at = [&](const Vecd& k) {
                const auto spec = spectrum_at(k, table.cutoffRadius, *potential, *metric,
                                              table.keepLimit);
                return spec[static_cast<std::size_t>(j)];
            };
            for (int which = 0; which < 2; ++which) {
                const bool maximize = which == 1;
                const Vecd base = table.kGrid[maximize ? argmax : argmin];
                double best = maximize ? band.hi : band.lo;
                double width = band.uncertainty;
                for (int axis = 0; axis < d; ++axis) {
                    double w = 0.0;
                    auto line = [&](double t) {
                        Vecd k = base;
                        k(axis) += t;
                        return value_at(k);
                    };
                    const double v = golden_line_extremum(line, -h, h, maximize, 12, &w);
                    if (maximize ? v > best : v < best) best = v;
                    width = std::min(width, w);
                }
                if (maximize)
                    band.hi = std::max(band.hi, best);
                else
                    band.lo = std::min(band.lo, best);
                band.uncertainty = std::min(band.uncertainty, std::max(width, 1e-14));
            }
        }
    }
    return bands;
}

std::vector<Gap> detect_gaps(const std::vector<BandInterval>& bands, double windowLo,
                             double windowHi, double certifiedLambdaMax) {
    if (windowHi > certifiedLambdaMax)
        throw Uncertified("window extends beyond the certified lambda range");
    struct Seg {
        double lo, hi, unc;
    };
    std::vector<Seg> segs;
    for (const auto& b : bands) {
        const double lo = std::max(b.lo, windowLo);
        const double hi = std::min(b.hi, windowHi);
        if (hi > lo) segs.push_back({lo, hi, b.uncertainty});
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.lo < b.lo; });
    std::vector<Gap> gaps;
    double covered = windowLo;
    double uncLeft = 0.0;
    for (const auto& s : segs) {
        if (s.lo > covered) {
            Gap g;
            g.lo = covered;
            g.hi = s.lo;
            g.uncertainty = std::max(uncLeft, s.unc);
            g.resolved = (g.hi - g.lo) > 2.0 * g.uncertainty;
            gaps.push_back(g);
        }
        if (s.hi > covered) {
            covered = s.hi;
            uncLeft = s.unc;
        } else {
            uncLeft = std::min(uncLeft, s.unc);
        }
    }
    if (covered < windowHi) {
        Gap g;
        g.lo = covered;
        g.hi = windowHi;
        g.uncertainty = uncLeft;
        g.resolved = (g.hi - g.lo) > 2.0 * g.uncertainty;
        gaps.push_back(g);
    }
    return gaps;
}

double overlap_function(const std::vector<BandInterval>& bands, double lambda) {
    double best = 0.0;
    for (const auto& b : bands)
        if (lambda >= b.lo && lambda <= b.hi)
            best = std::max(best, std::min(lambda - b.lo, b.hi - lambda));
    return best;
}

int overlap_multiplicity(const std::vector<BandInterval>& bands, double lambda) {
    int count = 0;
    for (const auto& b : bands)
        if (lambda >= b.lo && lambda <= b.hi) ++count;
    return count;
}

double integrated_density_of_states(const FourierPotential& potential, const Metric& metric,
                                    double lambda, int kGridN, double cutoffRadius, int threads) {
    if (lambda >= 0.5 * cutoffRadius * cutoffRadius)
        throw Uncertified("lambda is above the certification limit of the cutoff");
    const auto grid = midpoint_k_grid(metric.dim, kGridN);
    const int nthreads = std::max(1, threads);
    std::vector<long long> counts(static_cast<std::size_t>(nthreads), 0);
    auto worker = [&](int t) {
        long long local = 0;
        for (std::size_t i = static_cast<std::size_t>(t); i < grid.size();
             i += static_cast<std::size_t>(nthreads)) {
            const auto spec = spectrum_at(grid[i], cutoffRadius, potential, metric, lambda);
            for (double x : spec)
                if (x < lambda) ++local;
        }
        counts[static_cast<std::size_t>(t)] = local;
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    long long total = 0;
    for (long long c : counts) total += c;
    return static_cast<double>(total) / static_cast<double>(grid.size());
}

ClusterCheck cluster_check(const FourierPotential& potential, const Metric& metric,
                           const std::vector<double>& lambdaList, int n, int kGridN,
                           double cutoffMargin, int threads) {
    ClusterCheck out;
    out.predictedExponent = 0.5 * metric.dim - n - 1;
    std::vector<double> lx, ly;
    for (double lambda : lambdaList) {
        ClusterRow row;
        row.lambda = lambda;
        row.delta = std::pow(lambda, -static_cast<double>(n));
        const double radius = std::sqrt(lambda + row.delta) + cutoffMargin;
        const double hi = integrated_density_of_states(potential, metric, lambda + row.delta,
                                                       kGridN, radius, threads);
        const double lo = integrated_density_of_states(potential, metric, lambda - row.delta,
                                                       kGridN, radius, threads);
        row.count = hi - lo;
        out.rows.push_back(row);
        if (row.count > 0.0) {
            lx.push_back(std::log(lambda));
            ly.push_back(std::log(row.count));
        }
    }
    if (lx.size() >= 2) {
        out.slope = fit_slope(lx, ly);
        out.slopeValid = true;
    }
    return out;
}

std::vector<ZetaRow> zeta_scaling_check(const std::vector<BandInterval>& bands,
                                        const std::vector<Gap>& gaps, int dim,
                                        const std::vector<double>& lambdaList) {
    std::vector<ZetaRow> rows;
    for (double lambda : lambdaList) {
        ZetaRow row;
        row.lambda = lambda;
        bool unresolved = false;
        for (const auto& g : gaps)
            if (!g.resolved && lambda >= g.lo && lambda <= g.hi) unresolved = true;
        row.zeta = overlap_function(bands, lambda);
        if (unresolved && row.zeta == 0.0) {
            row.skipped = true;
            row.note = "inside an unresolved region";
        } else if (row.zeta == 0.0) {
            row.skipped = true;
            row.note = "inside a gap";
        } else {
            row.scaled = row.zeta * std::pow(lambda, 0.5 * (dim - 1));
        }
        rows.push_back(row);
    }
    return rows;
}

SpectralReport gaps_pipeline(const FourierPotential& potential, const Metric& metric,
                             double windowLo, double windowHi, int kGridN, double cutoffMargin,
                             int threads, bool refine) {
    if (!(windowHi > windowLo)) throw InvalidParameter("empty spectral window");
    SpectralReport rep;
    rep.windowLo = windowLo;
    rep.windowHi = windowHi;
    rep.kGridN = kGridN;
    rep.cutoffRadius = std::sqrt(windowHi) + cutoffMargin;
    rep.certifiedLambdaMax = 0.5 * rep.cutoffRadius * rep.cutoffRadius;
    if (windowHi >= rep.certifiedLambdaMax)
        throw Uncertified("cutoff margin too small to certify the requested window");

    // Cutoff-refinement confirmation at k = 0. Bands within a few coupling
    // hops of the smaller shell cannot be stable to 1e-8, so the comparison
    // covers lambda <= (small - 6)^2; beyond that the 0.5 cutoff^2 rule is
    // the certificate.
    if (!potential.empty()) {
        const Vecd k0 = Vecd::Zero(metric.dim);
        const double small = std::max(rep.cutoffRadius - 2.0, 0.75 * rep.cutoffRadius);
        const double confirmLimit =
            std::min(windowHi, std::pow(std::max(0.0, small - 6.0), 2.0));
        const auto probe = spectrum_at(k0, small, potential, metric, confirmLimit);
        if (!probe.empty()) {
            rep.truncation = truncation_check(k0, potential, metric, {small, rep.cutoffRadius}, 1,
                                              static_cast<int>(probe.size()));
            if (!rep.truncation.pass)
                throw Uncertified("truncation check failed for the requested window");
        }
    }

    const auto grid = uniform_k_grid(metric.dim, kGridN);
    rep.table = band_table(grid, rep.cutoffRadius, potential, metric, windowHi, threads);
    rep.bands = band_intervals(rep.table, refine, &potential, &metric, kGridN);
    rep.gaps = detect_gaps(rep.bands, windowLo, windowHi, rep.certifiedLambdaMax);
    return rep;
}

} // namespace bsgaps
