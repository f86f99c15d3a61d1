#include "bsgaps/intlat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "bsgaps/linalg.hpp"

namespace bsgaps {

namespace {

constexpr int128 kAbsLimit = static_cast<int128>(1) << 62;

int128 iabs128(int128 v) { return v < 0 ? -v : v; }

} // namespace

long long checked_ll(int128 v, const char* where) {
    if (iabs128(v) >= kAbsLimit)
        throw InternalError(std::string("integer overflow in ") + where);
    return static_cast<long long>(v);
}

long long gcd_ll(long long a, long long b) {
    a = std::llabs(a);
    b = std::llabs(b);
    while (b) {
        const long long t = a % b;
        a = b;
        b = t;
    }
    return a;
}

bool lex_less(const IntVec& a, const IntVec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool is_zero(const IntVec& v) {
    for (long long x : v)
        if (x != 0) return false;
    return true;
}

IntVec negate(const IntVec& v) {
    IntVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
}

void sign_normalize(IntVec& v) {
    for (long long x : v) {
        if (x > 0) return;
        if (x < 0) {
            for (auto& y : v) y = -y;
            return;
        }
    }
}

void primitivize(IntVec& v) {
    long long g = 0;
    for (long long x : v) g = gcd_ll(g, x);
    if (g > 1)
        for (auto& x : v) x /= g;
    sign_normalize(v);
}

int128 dot_exact(const IntVec& a, const IntVec& b) {
    int128 s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<int128>(a[i]) * static_cast<int128>(b[i]);
    return s;
}

int128 norm2_exact(const IntVec& v) { return dot_exact(v, v); }

double norm(const IntVec& v) {
    return std::sqrt(static_cast<double>(norm2_exact(v)));
}

int128 det_exact(std::vector<std::vector<int128>> m) {
    const std::size_t n = m.size();
    if (n == 0) return 1;
    int128 prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        while (piv < n && m[piv][k] == 0) ++piv;
        if (piv == n) return 0;
        if (piv != k) {
            std::swap(m[piv], m[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                int128 t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                m[i][j] = t / prev; // exact division (Bareiss)
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

int128 gram_det_exact(const IntMat& vectors) {
    const std::size_t k = vectors.size();
    std::vector<std::vector<int128>> g(k, std::vector<int128>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) g[i][j] = dot_exact(vectors[i], vectors[j]);
    return det_exact(std::move(g));
}

int rank_int(const IntMat& rows) {
    IntMat h = hnf_rows(rows);
    return static_cast<int>(h.size());
}

IntMat hnf_rows(IntMat rows) {
    rows.erase(std::remove_if(rows.begin(), rows.end(), [](const IntVec& r) { return is_zero(r); }),
               rows.end());
    if (rows.empty()) return rows;
    const std::size_t d = rows[0].size();
    std::size_t pivot_row = 0;
    std::vector<std::size_t> pivot_cols;
    for (std::size_t col = 0; col < d && pivot_row < rows.size(); ++col) {
        // gcd of the column below pivot_row via row operations
        while (true) {
            std::size_t best = rows.size();
            for (std::size_t i = pivot_row; i < rows.size(); ++i) {
                if (rows[i][col] != 0 &&
                    (best == rows.size() || std::llabs(rows[i][col]) < std::llabs(rows[best][col])))
                    best = i;
            }
            if (best == rows.size()) break; // column clear
            std::swap(rows[pivot_row], rows[best]);
            bool clear = true;
            for (std::size_t i = pivot_row + 1; i < rows.size(); ++i) {
                if (rows[i][col] == 0) continue;
                const long long q = rows[i][col] / rows[pivot_row][col];
                if (q != 0)
                    for (std::size_t j = 0; j < d; ++j)
                        rows[i][j] = checked_ll(static_cast<int128>(rows[i][j]) -
                                                    static_cast<int128>(q) * rows[pivot_row][j],
                                                "hnf_rows");
                if (rows[i][col] != 0) clear = false;
            }
            if (clear) break;
        }
        if (rows[pivot_row][col] != 0) {
            if (rows[pivot_row][col] < 0)
                for (auto& x : rows[pivot_row]) x = -x;
            pivot_cols.push_back(col);
            ++pivot_row;
        }
    }
    rows.resize(pivot_row);
    // reduce entries above each pivot into [0, pivot); ascending pivot order,
    // so a later reduction never disturbs an earlier pivot column
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::size_t col = pivot_cols[i];
        const long long p = rows[i][col];
        for (std::size_t k = 0; k < i; ++k) {
            long long q = rows[k][col] / p;
            if (rows[k][col] - q * p < 0) q -= 1; // floor division
            if (q != 0)
                for (std::size_t j = 0; j < rows[0].size(); ++j)
                    rows[k][j] = checked_ll(static_cast<int128>(rows[k][j]) -
                                                static_cast<int128>(q) * rows[i][j],
                                            "hnf_rows reduce");
        }
    }
    return rows;
}

IntMat kernel_lattice(const IntMat& rows_rxc) {
    if (rows_rxc.empty()) return IntMat{};
    const std::size_t r = rows_rxc.size();
    const std::size_t c = rows_rxc[0].size();
    // column echelon with a tracked unimodular column transform
    IntMat a = rows_rxc;
    IntMat u(c, IntVec(c, 0));
    for (std::size_t i = 0; i < c; ++i) u[i][i] = 1;

    auto col_sub = [&](std::size_t dst, std::size_t src, long long q) {
        for (std::size_t i = 0; i < r; ++i)
            a[i][dst] = checked_ll(static_cast<int128>(a[i][dst]) -
                                       static_cast<int128>(q) * a[i][src],
                                   "kernel_lattice");
        for (std::size_t i = 0; i < c; ++i)
            u[i][dst] = checked_ll(static_cast<int128>(u[i][dst]) -
                                       static_cast<int128>(q) * u[i][src],
                                   "kernel_lattice");
    };
    auto col_swap = [&](std::size_t x, std::size_t y) {
        if (x == y) return;
        for (std::size_t i = 0; i < r; ++i) std::swap(a[i][x], a[i][y]);
        for (std::size_t i = 0; i < c; ++i) std::swap(u[i][x], u[i][y]);
    };

    std::size_t pc = 0;
    for (std::size_t row = 0; row < r && pc < c; ++row) {
        while (true) {
            std::size_t best = c;
            for (std::size_t j = pc; j < c; ++j)
                if (a[row][j] != 0 && (best == c || std::llabs(a[row][j]) < std::llabs(a[row][best])))
                    best = j;
            if (best == c) break;
            col_swap(pc, best);
            bool clear = true;
            for (std::size_t j = pc + 1; j < c; ++j) {
                if (a[row][j] == 0) continue;
                col_sub(j, pc, a[row][j] / a[row][pc]);
                if (a[row][j] != 0) clear = false;
            }
            if (clear) break;
        }
        if (a[row][pc] != 0) ++pc;
    }
    IntMat kernel;
    for (std::size_t j = pc; j < c; ++j) {
        IntVec v(c);
        for (std::size_t i = 0; i < c; ++i) v[i] = u[i][j];
        kernel.push_back(std::move(v));
    }
    return hnf_rows(std::move(kernel));
}

IntMat saturate_rows(const IntMat& rows) {
    IntMat h = hnf_rows(rows);
    if (h.empty()) return h;
    const IntMat ortho = kernel_lattice(h); // integer basis of the orthogonal space
    if (ortho.empty()) {
        // full rank: saturation is Z^d
        const std::size_t d = h[0].size();
        IntMat idm(d, IntVec(d, 0));
        for (std::size_t i = 0; i < d; ++i) idm[i][i] = 1;
        return idm;
    }
    return kernel_lattice(ortho);
}

Rat::Rat(long long n) : num(n), den(1) {}

Rat::Rat(long long n, long long d) {
    if (d == 0) throw InternalError("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const long long g = gcd_ll(n, d);
    num = g ? n / g : n;
    den = g ? d / g : d;
}

namespace {
Rat make_rat_128(int128 n, int128 d) {
    if (d == 0) throw InternalError("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    int128 a = iabs128(n), b = d;
    while (b) {
        const int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        n /= a;
        d /= a;
    }
    Rat r;
    r.num = checked_ll(n, "rational");
    r.den = checked_ll(d, "rational");
    return r;
}
} // namespace

Rat rat_add(const Rat& a, const Rat& b) {
    return make_rat_128(static_cast<int128>(a.num) * b.den + static_cast<int128>(b.num) * a.den,
                        static_cast<int128>(a.den) * b.den);
}
Rat rat_sub(const Rat& a, const Rat& b) {
    return make_rat_128(static_cast<int128>(a.num) * b.den - static_cast<int128>(b.num) * a.den,
                        static_cast<int128>(a.den) * b.den);
}
Rat rat_mul(const Rat& a, const Rat& b) {
    return make_rat_128(static_cast<int128>(a.num) * b.num, static_cast<int128>(a.den) * b.den);
}
Rat rat_div(const Rat& a, const Rat& b) {
    if (b.num == 0) throw InternalError("rational division by zero");
    return make_rat_128(static_cast<int128>(a.num) * b.den, static_cast<int128>(a.den) * b.num);
}

std::optional<std::vector<Rat>> rational_coordinates(const IntMat& rows, const IntVec& v) {
    const std::size_t k = rows.size();
    const std::size_t d = v.size();
    // solve A c = v with A = rows^T (d x k), Gaussian elimination over Q
    std::vector<std::vector<Rat>> a(d, std::vector<Rat>(k + 1));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < k; ++j) a[i][j] = Rat(rows[j][i]);
        a[i][k] = Rat(v[i]);
    }
    std::vector<long long> pivot_of_col(k, -1);
    std::size_t row = 0;
    for (std::size_t col = 0; col < k && row < d; ++col) {
        std::size_t piv = row;
        while (piv < d && a[piv][col].is_zero()) ++piv;
        if (piv == d) continue;
        std::swap(a[piv], a[row]);
        const Rat p = a[row][col];
        for (std::size_t j = col; j <= k; ++j) a[row][j] = rat_div(a[row][j], p);
        for (std::size_t i = 0; i < d; ++i) {
            if (i == row || a[i][col].is_zero()) continue;
            const Rat f = a[i][col];
            for (std::size_t j = col; j <= k; ++j)
                a[i][j] = rat_sub(a[i][j], rat_mul(f, a[row][j]));
        }
        pivot_of_col[col] = static_cast<long long>(row);
        ++row;
    }
    for (std::size_t i = row; i < d; ++i)
        if (!a[i][k].is_zero()) return std::nullopt; // inconsistent
    std::vector<Rat> c(k, Rat(0));
    for (std::size_t col = 0; col < k; ++col)
        if (pivot_of_col[col] >= 0) c[col] = a[static_cast<std::size_t>(pivot_of_col[col])][k];
    return c;
}

std::vector<IntVec> enumerate_ball(int d, double r) {
    if (r < 0) return {};
    const long long lim = static_cast<long long>(std::floor(r + 1e-12));
    const int128 r2 = static_cast<int128>(std::floor(r * r + 1e-9));
    std::vector<IntVec> out;
    IntVec cur(static_cast<std::size_t>(d), 0);
    // odometer over the box [-lim, lim]^d
    std::function<void(int, int128)> rec = [&](int dim, int128 partial) {
        if (dim == d) {
            if (partial <= r2) out.push_back(cur);
            return;
        }
        for (long long x = -lim; x <= lim; ++x) {
            const int128 p = partial + static_cast<int128>(x) * x;
            if (p > r2) continue;
            cur[static_cast<std::size_t>(dim)] = x;
            rec(dim + 1, p);
        }
        cur[static_cast<std::size_t>(dim)] = 0;
    };
    rec(0, 0);
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

void lagrange_reduce(IntMat& basis) {
    if (basis.size() < 2) return;
    bool changed = true;
    int guard = 0;
    while (changed && ++guard < 200) {
        changed = false;
        std::sort(basis.begin(), basis.end(),
                  [](const IntVec& a, const IntVec& b) { return norm2_exact(a) < norm2_exact(b); });
        for (std::size_t i = 0; i < basis.size(); ++i) {
            for (std::size_t j = 0; j < basis.size(); ++j) {
                if (i == j) continue;
                const int128 n2 = norm2_exact(basis[j]);
                if (n2 == 0) continue;
                const double q = static_cast<double>(dot_exact(basis[i], basis[j])) /
                                 static_cast<double>(n2);
                const long long qi = static_cast<long long>(std::llround(q));
                if (qi == 0) continue;
                IntVec cand = basis[i];
                for (std::size_t t = 0; t < cand.size(); ++t)
                    cand[t] = checked_ll(static_cast<int128>(cand[t]) -
                                             static_cast<int128>(qi) * basis[j][t],
                                         "lagrange_reduce");
                if (norm2_exact(cand) < norm2_exact(basis[i])) {
                    basis[i] = std::move(cand);
                    changed = true;
                }
            }
        }
    }
}

std::vector<IntVec> enumerate_lattice_ball(const IntMat& basis_in, double r) {
    IntMat basis = basis_in;
    lagrange_reduce(basis);
    const std::size_t k = basis.size();
    if (k == 0) return {};
    const std::size_t d = basis[0].size();
    // coefficient bounds from the inverse Gram: c = Gram^{-1} B x, |x| <= r
    Matd gram(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<double>(dot_exact(basis[i], basis[j]));
    const Matd ginv = gram.inverse();
    std::vector<long long> lim(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double gii = std::max(0.0, ginv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
        lim[i] = static_cast<long long>(std::floor(r * std::sqrt(gii) + 1e-9)) + 1;
    }
    const int128 r2 = static_cast<int128>(std::floor(r * r + 1e-9));
    std::vector<IntVec> out;
    IntVec coeff(k, 0);
    IntVec point(d, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t dim) {
        if (dim == k) {
            if (!is_zero(point) && norm2_exact(point) <= r2) out.push_back(point);
            return;
        }
        for (long long x = -lim[dim]; x <= lim[dim]; ++x) {
            coeff[dim] = x;
            for (std::size_t t = 0; t < d; ++t)
                point[t] = checked_ll(static_cast<int128>(point[t]) +
                                          static_cast<int128>(x) * basis[dim][t],
                                      "enumerate_lattice_ball");
            rec(dim + 1);
            for (std::size_t t = 0; t < d; ++t)
                point[t] = checked_ll(static_cast<int128>(point[t]) -
                                          static_cast<int128>(x) * basis[dim][t],
                                      "enumerate_lattice_ball");
        }
        coeff[dim] = 0;
    };
    rec(0);
    std::sort(out.begin(), out.end(), [](const IntVec& a, const IntVec& b) {
        const int128 na = norm2_exact(a), nb = norm2_exact(b);
        if (na != nb) return na < nb;
        return lex_less(a, b);
    });
    return out;
}

std::string format_intvec(const IntVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    s += ")";
    return s;
}

} // namespace bsgaps
