#ifndef FUMI_SUBSPACE_HPP
#define FUMI_SUBSPACE_HPP

// Spectral subspace reduction: hyperspectral pixels of a p-endmember scene
// live (up to noise) in a low-dimensional span, so the solvers can work on
// E^T Y_H with the covariance and response projected accordingly. E holds the
// top left singular vectors of the observed image.

#include <algorithm>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fumi/core.hpp"
#include "fumi/covariance.hpp"

namespace fumi {

struct Subspace {
    MatrixXd E; // bands x rank, orthonormal columns
    int rank() const { return static_cast<int>(E.cols()); }
};

inline Subspace identify_subspace(const SpectralImage& y_h, int rank) {
    const int max_rank = static_cast<int>(std::min(y_h.data.rows(), y_h.data.cols()));
    if (rank < 1 || rank > max_rank)
        throw std::invalid_argument("identify_subspace: rank " + std::to_string(rank) +
                                    " outside [1, " + std::to_string(max_rank) + "]");
    Eigen::BDCSVD<MatrixXd> svd(y_h.data, Eigen::ComputeThinU);
    Subspace s;
    s.E = svd.matrixU().leftCols(rank);
    return s;
}

struct ProjectedModel {
    SpectralImage y_h;   // rank x pixels
    BandCovariance lam_h; // full SPD in the reduced coordinates
    MatrixXd R;           // n_lambda x rank
};

inline ProjectedModel project_model(const Subspace& s, const SpectralImage& y_h,
                                    const BandCovariance& lam_h, const MatrixXd& r) {
    if (s.E.rows() != y_h.bands() || s.E.rows() != lam_h.dim() || s.E.rows() != r.cols())
        throw std::invalid_argument("project_model: subspace has " + std::to_string(s.E.rows()) +
                                    " bands, inputs have " + std::to_string(y_h.bands()) + "/" +
                                    std::to_string(lam_h.dim()) + "/" + std::to_string(r.cols()));
    ProjectedModel p;
    p.y_h = SpectralImage(s.E.transpose() * y_h.data, y_h.n_rows, y_h.n_cols);
    p.lam_h = BandCovariance::full(s.E.transpose() * lam_h.matrix() * s.E);
    p.R = r * s.E;
    return p;
}

} // namespace fumi

#endif
