#ifndef FUMI_SYLVESTER_HPP
#define FUMI_SYLVESTER_HPP

// Closed-form solvers for the two generalized Sylvester equations at the
// heart of the alternating scheme.
//
// Abundance side:  C1 A + A C2 = C3, with C1 (p x p) an SPD product and
// C2 = B S S^T B^T the decimated-blur normal operator (n x n, never formed).
// Diagonalizing C1 = V diag(l) V^{-1} decouples the rows; each row equation
// (l_k I + C2) z = r is solved in the frequency domain, where C2 is a rank-m
// update of zero: (1/d^2) * conj(Dbar) Dbar^T with Dbar the aliasing-block
// stack of the blur eigenvalues. The Woodbury identity reduces the row solve
// to elementwise work plus one m-point correction:
//   u = sum_t D_t .* rhat_t
//   w = u ./ (l_k d^2 + sum_t |D_t|^2)
//   zhat_t = (rhat_t - conj(D_t) .* w) / l_k .
//
// Endmember side:  H1 M + M H2 = H3, with H1 (m_lambda x m_lambda) and H2
// (p x p) both SPD products. Joint diagonalization H1 = V1 diag(s) V1^{-1},
// H2 = V2 diag(t) V2^{-1} gives M = V1 [ (V1^{-1} H3 V2) ./ (s_i + t_j) ] V2^{-1}.
//
// kron_solve is the dense reference: it vectorizes P X + X Q = C into
// (I (x) P + Q^T (x) I) vec(X) = vec(C) and LU-solves. It exists for tests
// and documentation and is deliberately independent of the fast paths.

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fumi/eigen_tools.hpp"
#include "fumi/fft.hpp"
#include "fumi/spectrum.hpp"

namespace fumi {

struct AbundanceSylvesterSystem {
    MatrixXd C1;        // p x p
    EigenPair c1_eig;
    MatrixXd C3;        // p x n
    CirculantSpectrum spec;
};

// Primary construction: C1 = K^{-1} N from its SPD factors.
inline AbundanceSylvesterSystem make_abundance_system(const MatrixXd& k, const MatrixXd& n,
                                                      MatrixXd c3, CirculantSpectrum spec) {
    AbundanceSylvesterSystem sys;
    sys.c1_eig = eig_spd_inv_times(k, n);
    sys.C1 = k.llt().solve(n);
    sys.C3 = std::move(c3);
    sys.spec = std::move(spec);
    if (sys.C1.rows() != sys.C3.rows())
        throw std::invalid_argument("abundance system: C1 is " + std::to_string(sys.C1.rows()) +
                                    "-row but C3 has " + std::to_string(sys.C3.rows()) + " rows");
    if (sys.C3.cols() != static_cast<Eigen::Index>(sys.spec.n_rows) * sys.spec.n_cols)
        throw std::invalid_argument("abundance system: C3 has " + std::to_string(sys.C3.cols()) +
                                    " pixels, spectrum grid is " + std::to_string(sys.spec.n_rows) +
                                    "x" + std::to_string(sys.spec.n_cols));
    return sys;
}

// Fallback construction from a plain C1 with real spectrum (SPD product by
// provenance); uses the nonsymmetric eigensolver with imaginary-part cleanup.
inline AbundanceSylvesterSystem make_abundance_system_general(MatrixXd c1, MatrixXd c3,
                                                              CirculantSpectrum spec) {
    AbundanceSylvesterSystem sys;
    sys.c1_eig = eig_real_spectrum(c1);
    sys.C1 = std::move(c1);
    sys.C3 = std::move(c3);
    sys.spec = std::move(spec);
    return sys;
}

inline MatrixXd solve_abundance_sylvester(const AbundanceSylvesterSystem& sys, Fft2D& fft) {
    const CirculantSpectrum& sp = sys.spec;
    const int p = static_cast<int>(sys.C1.rows());
    const int n = sp.n_rows * sp.n_cols;
    const int m = sp.coarse_pixels();
    const int blocks = sp.d_total();
    const double dd = static_cast<double>(blocks);

    const MatrixXd rhs = sys.c1_eig.V_inv * sys.C3; // decoupled row systems
    MatrixXd z(p, n);
    VectorXcd rhat, u(m), w(m), zhat(n);
    for (int k = 0; k < p; ++k) {
        const double lam = sys.c1_eig.values[k];
        if (!(lam > 0.0))
            throw std::runtime_error("solve_abundance_sylvester: C1 eigenvalue " +
                                     std::to_string(lam) + " is not positive; system is singular");
        rhat = fft.forward(VectorXd(rhs.row(k)));

        u.setZero();
        for (int t = 0; t < blocks; ++t)
            for (int f = 0; f < m; ++f)
                u[f] += sp.blocks[t][f] * rhat[sp.fine_index[static_cast<Eigen::Index>(t) * m + f]];
        w = u.cwiseQuotient((lam * dd + sp.power_sum.array()).matrix().cast<std::complex<double>>());
        for (int t = 0; t < blocks; ++t)
            for (int f = 0; f < m; ++f) {
                const int fine = sp.fine_index[static_cast<Eigen::Index>(t) * m + f];
                zhat[fine] = (rhat[fine] - std::conj(sp.blocks[t][f]) * w[f]) / lam;
            }
        // zhat is conjugate-symmetric only up to rounding: when lam is orders
        // of magnitude below the blur power (tiny penalty, near-singular data
        // term) the cancellation above amplifies roundoff past the strict
        // inverse_real tolerance.  The solution is real by construction, so
        // project onto it instead of rejecting.
        z.row(k) = fft.inverse(zhat).real();
    }
    return sys.c1_eig.V * z;
}

inline MatrixXd solve_abundance_sylvester(const AbundanceSylvesterSystem& sys) {
    Fft2D fft(sys.spec.n_rows, sys.spec.n_cols);
    return solve_abundance_sylvester(sys, fft);
}

struct EndmemberSylvesterSystem {
    MatrixXd H1; // m_lambda x m_lambda
    MatrixXd H2; // p x p
    MatrixXd H3; // m_lambda x p
    EigenPair e1, e2;
};

// Core solve given the two diagonalizations; the per-entry divisor s_i + t_j
// must stay away from zero or the equation has no unique solution.
inline MatrixXd sylvester_eig_solve(const EigenPair& e1, const EigenPair& e2, const MatrixXd& h3) {
    if (h3.rows() != e1.values.size() || h3.cols() != e2.values.size())
        throw std::invalid_argument("sylvester_eig_solve: H3 is " + std::to_string(h3.rows()) +
                                    "x" + std::to_string(h3.cols()) + ", expected " +
                                    std::to_string(e1.values.size()) + "x" +
                                    std::to_string(e2.values.size()));
    const double scale =
        std::max(1.0, std::max(e1.values.cwiseAbs().maxCoeff(), e2.values.cwiseAbs().maxCoeff()));
    MatrixXd mt = e1.V_inv * h3 * e2.V;
    for (Eigen::Index j = 0; j < mt.cols(); ++j)
        for (Eigen::Index i = 0; i < mt.rows(); ++i) {
            const double div = e1.values[i] + e2.values[j];
            if (std::abs(div) < 1e-14 * scale)
                throw std::runtime_error("sylvester_eig_solve: eigenvalue sum " +
                                         std::to_string(div) + " at (" + std::to_string(i) + "," +
                                         std::to_string(j) + ") makes the system singular");
            mt(i, j) /= div;
        }
    return e1.V * mt * e2.V_inv;
}

inline EndmemberSylvesterSystem make_endmember_system_general(MatrixXd h1, MatrixXd h2,
                                                              MatrixXd h3) {
    EndmemberSylvesterSystem sys;
    sys.e1 = eig_real_spectrum(h1);
    sys.e2 = eig_real_spectrum(h2);
    sys.H1 = std::move(h1);
    sys.H2 = std::move(h2);
    sys.H3 = std::move(h3);
    return sys;
}

inline MatrixXd solve_endmember_sylvester(const EndmemberSylvesterSystem& sys) {
    return sylvester_eig_solve(sys.e1, sys.e2, sys.H3);
}

// Dense reference solver for P X + X Q = C via Kronecker vectorization.
// Cubic in p*n; refuses anything beyond small test instances.
inline MatrixXd kron_solve(const MatrixXd& p_mat, const MatrixXd& q_mat, const MatrixXd& c) {
    const Eigen::Index p = p_mat.rows(), n = q_mat.rows();
    if (p_mat.cols() != p || q_mat.cols() != n || c.rows() != p || c.cols() != n)
        throw std::invalid_argument("kron_solve: inconsistent shapes");
    if (p * n > 4096)
        throw std::invalid_argument("kron_solve: system dimension " + std::to_string(p * n) +
                                    " exceeds the 4096 reference-solver limit");
    MatrixXd big = MatrixXd::Zero(p * n, p * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        big.block(j * p, j * p, p, p) += p_mat;
        for (Eigen::Index i = 0; i < n; ++i)
            big.block(i * p, j * p, p, p).diagonal().array() += q_mat(j, i); // Q^T (x) I
    }
    Eigen::VectorXd vec_c(p * n);
    for (Eigen::Index j = 0; j < n; ++j) vec_c.segment(j * p, p) = c.col(j);
    Eigen::VectorXd vec_x = big.partialPivLu().solve(vec_c);
    MatrixXd x(p, n);
    for (Eigen::Index j = 0; j < n; ++j) x.col(j) = vec_x.segment(j * p, p);
    return x;
}

} // namespace fumi

#endif
