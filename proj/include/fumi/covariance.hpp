#ifndef FUMI_COVARIANCE_HPP
#define FUMI_COVARIANCE_HPP

// Symmetric positive-definite band covariance used to weight data-fit terms.
//
// The common case is a diagonal covariance built from per-band noise powers;
// subspace projection turns the high-resolution covariance into a full SPD
// matrix, so both representations are supported behind one interface. All
// derived operators (inverse, square root, inverse square root) are
// precomputed at construction — dimensions are band counts, never pixels.

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fumi/core.hpp"

namespace fumi {

class BandCovariance {
public:
    BandCovariance() = default;

    static BandCovariance diagonal(const VectorXd& var) {
        for (Eigen::Index i = 0; i < var.size(); ++i)
            if (!(var[i] > 0.0))
                throw std::invalid_argument("BandCovariance: variance of band " +
                                            std::to_string(i) + " must be positive, got " +
                                            std::to_string(var[i]));
        BandCovariance c;
        c.diag_ = true;
        c.var_ = var;
        return c;
    }

    static BandCovariance full(const MatrixXd& cov, double sym_tol = 1e-10) {
        if (cov.rows() != cov.cols())
            throw std::invalid_argument("BandCovariance: matrix must be square");
        const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
        if (asym > sym_tol * std::max(1.0, cov.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("BandCovariance: matrix is not symmetric (skew " +
                                        std::to_string(asym) + ")");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (cov + cov.transpose()));
        const VectorXd ev = es.eigenvalues();
        if (!(ev.minCoeff() > 1e-14 * std::max(1.0, ev.maxCoeff())))
            throw std::invalid_argument("BandCovariance: matrix is not positive definite "
                                        "(min eigenvalue " + std::to_string(ev.minCoeff()) + ")");
        BandCovariance c;
        c.diag_ = false;
        c.cov_ = 0.5 * (cov + cov.transpose());
        const MatrixXd& U = es.eigenvectors();
        c.inv_ = U * ev.cwiseInverse().asDiagonal() * U.transpose();
        c.sqrt_ = U * ev.cwiseSqrt().asDiagonal() * U.transpose();
        c.inv_sqrt_ = U * ev.cwiseSqrt().cwiseInverse().asDiagonal() * U.transpose();
        return c;
    }

    // Noise powers of zero are allowed when generating data but carry no
    // information for weighting: an all-zero noise model degrades to identity
    // weights (plain least squares). A mix of zero and positive bands has no
    // sensible weighting and is rejected.
    static BandCovariance from_noise(const BandNoise& noise) {
        if (noise.bands() == 0)
            throw std::invalid_argument("BandCovariance: empty noise model");
        const bool any_zero = (noise.variances.array() <= 0.0).any();
        const bool all_zero = (noise.variances.array() <= 0.0).all();
        if (all_zero) return diagonal(VectorXd::Ones(noise.bands()));
        if (any_zero)
            throw std::invalid_argument("BandCovariance: cannot mix zero and positive band "
                                        "variances in a solver weighting");
        return diagonal(noise.variances);
    }

    bool is_diagonal() const { return diag_; }
    int dim() const { return diag_ ? static_cast<int>(var_.size()) : static_cast<int>(cov_.rows()); }
    double mean_diagonal() const {
        return diag_ ? var_.mean() : cov_.diagonal().mean();
    }

    MatrixXd matrix() const { return diag_ ? MatrixXd(var_.asDiagonal()) : cov_; }
    MatrixXd inverse() const { return diag_ ? MatrixXd(var_.cwiseInverse().asDiagonal()) : inv_; }
    MatrixXd sqrt() const { return diag_ ? MatrixXd(var_.cwiseSqrt().asDiagonal()) : sqrt_; }
    MatrixXd inv_sqrt() const {
        return diag_ ? MatrixXd(var_.cwiseSqrt().cwiseInverse().asDiagonal()) : inv_sqrt_;
    }

    MatrixXd apply_inv(const MatrixXd& x) const {
        check(x);
        return diag_ ? MatrixXd(var_.cwiseInverse().asDiagonal() * x) : MatrixXd(inv_ * x);
    }
    MatrixXd apply_sqrt(const MatrixXd& x) const {
        check(x);
        return diag_ ? MatrixXd(var_.cwiseSqrt().asDiagonal() * x) : MatrixXd(sqrt_ * x);
    }
    MatrixXd apply_inv_sqrt(const MatrixXd& x) const {
        check(x);
        return diag_ ? MatrixXd(var_.cwiseSqrt().cwiseInverse().asDiagonal() * x)
                     : MatrixXd(inv_sqrt_ * x);
    }

private:
    void check(const MatrixXd& x) const {
        if (x.rows() != dim())
            throw std::invalid_argument("BandCovariance: operand has " + std::to_string(x.rows()) +
                                        " rows, covariance is " + std::to_string(dim()) + "-band");
    }

    bool diag_ = true;
    VectorXd var_;
    MatrixXd cov_, inv_, sqrt_, inv_sqrt_;
};

} // namespace fumi

#endif
