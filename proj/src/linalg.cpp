#include "bsgaps/linalg.hpp"

#include <cmath>

namespace bsgaps {

Vecd to_vecd(const std::vector<double>& v) {
    Vecd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

std::vector<double> to_std(const Vecd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vecd eigen_sym_values(const Matd& A) {
    Eigen::SelfAdjointEigenSolver<Matd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw EigenFailure("symmetric eigensolver failed to converge (n=" +
                           std::to_string(A.rows()) + ")");
    return es.eigenvalues();
}

EigenSym eigen_sym(const Matd& A) {
    Eigen::SelfAdjointEigenSolver<Matd> es(A);
    if (es.info() != Eigen::Success)
        throw EigenFailure("symmetric eigensolver failed to converge (n=" +
                           std::to_string(A.rows()) + ")");
    return EigenSym{es.eigenvalues(), es.eigenvectors()};
}

double spectral_norm_sym(const Matd& A) {
    if (A.rows() == 0) return 0.0;
    const Vecd ev = eigen_sym_values(A);
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

LinearSolver::LinearSolver(const Matd& A) : lu_(A) {
    const Vecd d = lu_.matrixLU().diagonal().cwiseAbs();
    min_abs_pivot_ = d.size() ? d.minCoeff() : 0.0;
    max_abs_pivot_ = d.size() ? d.maxCoeff() : 0.0;
    rcond_ = lu_.rcond();
}

Vecd LinearSolver::solve(const Vecd& b) const { return lu_.solve(b); }

bool LinearSolver::near_singular() const {
    return min_abs_pivot_ <= 1e-12 * (1.0 + max_abs_pivot_) || rcond_ < 1e-14;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) throw InvalidParameter("fit_slope needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw InvalidParameter("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

} // namespace bsgaps
