#ifndef FUMI_EIGEN_TOOLS_HPP
#define FUMI_EIGEN_TOOLS_HPP

// Eigendecompositions of products of symmetric positive (semi-)definite
// matrices. Such products are diagonalizable with real spectra even though
// they are not symmetric themselves; when the factors are known the
// decomposition is computed through a symmetric similarity transform
// (e.g. K^{-1}N = K^{-1/2} (K^{-1/2} N K^{-1/2}) K^{1/2}), which keeps
// everything real by construction. A general-matrix fallback uses the
// nonsymmetric eigensolver and strips imaginary parts only when they are
// provably numerical noise.

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fumi {

struct EigenPair {
    Eigen::MatrixXd V;      // right eigenvectors, one per column
    Eigen::MatrixXd V_inv;
    Eigen::VectorXd values;
};

namespace detail {

struct SpdRoots {
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
};

inline SpdRoots spd_roots(const Eigen::MatrixXd& s, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const Eigen::VectorXd ev = es.eigenvalues();
    if (!(ev.minCoeff() > 1e-14 * std::max(1.0, ev.maxCoeff())))
        throw std::runtime_error(std::string(what) + ": matrix is not positive definite "
                                 "(min eigenvalue " + std::to_string(ev.minCoeff()) + ")");
    SpdRoots r;
    const Eigen::MatrixXd& u = es.eigenvectors();
    r.sqrt = u * ev.cwiseSqrt().asDiagonal() * u.transpose();
    r.inv_sqrt = u * ev.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
    return r;
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

} // namespace detail

// Eigendecomposition of K^{-1} N for SPD K and symmetric PSD N.
inline EigenPair eig_spd_inv_times(const Eigen::MatrixXd& k, const Eigen::MatrixXd& n) {
    const auto roots = detail::spd_roots(detail::symmetrized(k), "eig_spd_inv_times");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        detail::symmetrized(roots.inv_sqrt * n * roots.inv_sqrt));
    EigenPair p;
    p.values = es.eigenvalues();
    p.V = roots.inv_sqrt * es.eigenvectors();
    p.V_inv = es.eigenvectors().transpose() * roots.sqrt;
    return p;
}

// Eigendecomposition of N K^{-1} for SPD K and symmetric PSD N.
inline EigenPair eig_times_spd_inv(const Eigen::MatrixXd& n, const Eigen::MatrixXd& k) {
    const auto roots = detail::spd_roots(detail::symmetrized(k), "eig_times_spd_inv");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        detail::symmetrized(roots.inv_sqrt * n * roots.inv_sqrt));
    EigenPair p;
    p.values = es.eigenvalues();
    p.V = roots.sqrt * es.eigenvectors();
    p.V_inv = es.eigenvectors().transpose() * roots.inv_sqrt;
    return p;
}

// Eigendecomposition of S G for SPD S and symmetric PSD G.
inline EigenPair eig_spd_times_psd(const Eigen::MatrixXd& s, const Eigen::MatrixXd& g) {
    const auto roots = detail::spd_roots(detail::symmetrized(s), "eig_spd_times_psd");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        detail::symmetrized(roots.sqrt * g * roots.sqrt));
    EigenPair p;
    p.values = es.eigenvalues();
    p.V = roots.sqrt * es.eigenvectors();
    p.V_inv = es.eigenvectors().transpose() * roots.inv_sqrt;
    return p;
}

// Nonsymmetric route for a matrix known (by provenance, not by form) to have
// a real spectrum. The real pseudo-eigendecomposition represents roundoff-
// induced conjugate pairs as 2x2 blocks whose off-diagonals are exactly the
// imaginary components; those are discarded when below tol relative to the
// spectrum scale and rejected loudly otherwise.
inline EigenPair eig_real_spectrum(const Eigen::MatrixXd& h, double tol = 1e-10) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("eig_real_spectrum: matrix must be square");
    Eigen::EigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_real_spectrum: eigensolver did not converge");
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    const Eigen::MatrixXd d = es.pseudoEigenvalueMatrix();
    const double max_imag =
        (d - Eigen::MatrixXd(d.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
    if (max_imag > tol * scale)
        throw std::runtime_error("eig_real_spectrum: spectrum is materially complex "
                                 "(imag magnitude " + std::to_string(max_imag) +
                                 "); matrix is not an SPD product");
    EigenPair p;
    p.values = d.diagonal();
    p.V = es.pseudoEigenvectors();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(p.V);
    if (!lu.isInvertible())
        throw std::runtime_error("eig_real_spectrum: eigenvector matrix is singular");
    p.V_inv = lu.inverse();
    return p;
}

// Condition-triggered Tikhonov ridge for small symmetric Gram matrices.
inline Eigen::MatrixXd ridge_if_ill_conditioned(const Eigen::MatrixXd& gram,
                                                double cond_limit = 1e12,
                                                double ridge_scale = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::symmetrized(gram),
                                                      Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    const double hi = ev.maxCoeff(), lo = ev.minCoeff();
    if (lo > 0.0 && hi / lo <= cond_limit) return gram;
    const double tau = ridge_scale * gram.trace() / static_cast<double>(gram.rows());
    return gram + tau * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
}

} // namespace fumi

#endif
