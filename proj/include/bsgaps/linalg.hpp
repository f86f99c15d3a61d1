#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bsgaps/errors.hpp"

namespace bsgaps {

using Matd = Eigen::MatrixXd;
using Vecd = Eigen::VectorXd;

Vecd to_vecd(const std::vector<double>& v);
std::vector<double> to_std(const Vecd& v);

// Full spectrum of a real symmetric matrix, ascending, multiplicity kept.
// Throws EigenFailure if the backend does not converge (should not happen
// for symmetric input).
Vecd eigen_sym_values(const Matd& A);

struct EigenSym {
    Vecd values;  // ascending
    Matd vectors; // column j pairs with values(j)
};
EigenSym eigen_sym(const Matd& A);

double spectral_norm_sym(const Matd& A);

// Dense LU with partial pivoting for the resolvent solves. Keeps the
// smallest |pivot| and a reciprocal condition estimate around as a
// resonance alarm.
class LinearSolver {
  public:
    explicit LinearSolver(const Matd& A);
    Vecd solve(const Vecd& b) const;
    double min_abs_pivot() const { return min_abs_pivot_; }
    double rcond() const { return rcond_; }
    bool near_singular() const;

  private:
    Eigen::PartialPivLU<Matd> lu_;
    double min_abs_pivot_ = 0.0;
    double max_abs_pivot_ = 0.0;
    double rcond_ = 0.0;
};

// least-squares slope of y against x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace bsgaps
