#ifndef PGOV_LEAST_SQUARES_HPP
#define PGOV_LEAST_SQUARES_HPP

#include <Eigen/Dense>

namespace pgov {

struct LeastSquaresResult {
    Eigen::VectorXd solution;
    double residual_norm = 0.0;
    // Numerical rank of the full design matrix, before any column is dropped.
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

/// Nonnegative least squares by clamp-and-re-solve: ordinary least squares
/// (minimum-norm when rank deficient), then columns whose coefficient came out
/// negative are pinned to zero and the remaining active set is solved again.
/// Adequate for the handful of unknowns used here; not a general NNLS.
LeastSquaresResult nonnegative_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& target);

}  // namespace pgov

#endif  // PGOV_LEAST_SQUARES_HPP
