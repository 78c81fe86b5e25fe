#include "pgov/least_squares.hpp"

#include <stdexcept>
#include <vector>

namespace pgov {

namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Eigen::Index* rank) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kRankThreshold);
    cod.compute(a);
    if (rank != nullptr) *rank = cod.rank();
    return cod.solve(b);
}

}  // namespace

LeastSquaresResult nonnegative_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
    if (design.rows() != target.size()) throw std::invalid_argument("design/target row mismatch");
    const Eigen::Index n = design.cols();

    LeastSquaresResult result;
    result.solution = Eigen::VectorXd::Zero(n);
    if (n == 0) {
        result.residual_norm = target.norm();
        return result;
    }

    std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) active[static_cast<std::size_t>(j)] = j;

    bool first = true;
    while (!active.empty()) {
        Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(active.size()));
        for (std::size_t c = 0; c < active.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = design.col(active[c]);

        Eigen::Index rank = 0;
        Eigen::VectorXd x = min_norm_solve(sub, target, &rank);
        if (first) {
            result.rank = rank;
            result.rank_deficient = rank < n;
            first = false;
        }

        std::vector<Eigen::Index> keep;
        for (std::size_t c = 0; c < active.size(); ++c)
            if (x(static_cast<Eigen::Index>(c)) >= 0.0) keep.push_back(active[c]);

        if (keep.size() == active.size()) {
            result.solution.setZero();
            for (std::size_t c = 0; c < active.size(); ++c) result.solution(active[c]) = x(static_cast<Eigen::Index>(c));
            break;
        }
        active = std::move(keep);
        result.solution.setZero();
    }

    result.residual_norm = (design * result.solution - target).norm();
    return result;
}

}  // namespace pgov
