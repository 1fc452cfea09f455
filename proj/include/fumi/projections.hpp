#ifndef FUMI_PROJECTIONS_HPP
#define FUMI_PROJECTIONS_HPP

// Euclidean projections onto the constraint sets: the unit simplex (per
// abundance column), the nonnegative orthant, and the [0,1] box.
//
// The simplex projection is the classic sort-and-threshold rule: sort the
// column descending, find the largest k whose prefix average gap
// (sum_{r<=k} y_r - 1)/k still lies below y_k, subtract that threshold and
// clip. O(p log p) per column, exact up to roundoff.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fumi/core.hpp"

namespace fumi {

inline VectorXd project_simplex(const VectorXd& y) {
    const int p = static_cast<int>(y.size());
    if (p == 0) throw std::invalid_argument("project_simplex: empty vector");
    std::vector<double> sorted(y.data(), y.data() + p);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double prefix = 0.0, tau = sorted[0] - 1.0;
    for (int k = 0; k < p; ++k) {
        prefix += sorted[k];
        const double cand = (prefix - 1.0) / (k + 1);
        if (cand < sorted[k]) tau = cand;
    }
    return (y.array() - tau).max(0.0);
}

inline MatrixXd project_simplex_columns(const MatrixXd& y) {
    MatrixXd out(y.rows(), y.cols());
    for (Eigen::Index j = 0; j < y.cols(); ++j) out.col(j) = project_simplex(y.col(j));
    return out;
}

inline MatrixXd project_nonneg(const MatrixXd& y) { return y.cwiseMax(0.0); }

inline MatrixXd project_box_unit(const MatrixXd& y) { return y.cwiseMax(0.0).cwiseMin(1.0); }

} // namespace fumi

#endif
