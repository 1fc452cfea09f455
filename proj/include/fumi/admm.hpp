#ifndef FUMI_ADMM_HPP
#define FUMI_ADMM_HPP

// The two inner ADMM solvers of the alternating scheme and the MAP objective
// they descend.
//
// Abundance step (fixed M): minimize over simplex-constrained A
//   1/2 ||Lh^{-1/2}(Y_H - M A B S)||_F^2 + 1/2 ||Lm^{-1/2}(Y_M - R M A)||_F^2
// by splitting A = V. Each cycle solves an unconstrained Sylvester system in
// A (closed form, frequency domain), projects V = Pi_simplex(A - G) and takes
// a scaled dual step. The feasible V is the returned estimate.
//
// Endmember step (fixed A): same template for box-constrained M with the
// splitting Lh^{-1/2} M = T; the M-update is a Sylvester solve via joint
// diagonalization, the T-update a weighted clip onto [0,1].
//
// Both solvers run a fixed iteration budget (no inner stopping test) and
// warm-start from the state they are handed, which the outer driver carries
// across its iterations.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fumi/core.hpp"
#include "fumi/degrade.hpp"
#include "fumi/eigen_tools.hpp"
#include "fumi/projections.hpp"
#include "fumi/sylvester.hpp"

namespace fumi {

struct Objective {
    double value = 0.0;
    double hs_term = 0.0;
    double ms_term = 0.0;
};

inline Objective objective(const MatrixXd& m, const MatrixXd& a, const SpectralImage& y_h,
                           const SpectralImage& y_m, const DegradationModel& model, Fft2D& fft) {
    const int nr = model.blur.n_rows, nc = model.blur.n_cols;
    if (m.cols() != a.rows())
        throw std::invalid_argument("objective: M has " + std::to_string(m.cols()) +
                                    " endmembers, A has " + std::to_string(a.rows()) + " rows");
    if (a.cols() != static_cast<Eigen::Index>(nr) * nc)
        throw std::invalid_argument("objective: A covers " + std::to_string(a.cols()) +
                                    " pixels, model grid is " + std::to_string(nr) + "x" +
                                    std::to_string(nc));
    if (y_h.bands() != m.rows() || y_m.bands() != model.R.rows())
        throw std::invalid_argument("objective: observation band counts do not match the model");

    const SpectralImage a_coarse = apply_bs(model, SpectralImage(a, nr, nc), fft);
    const MatrixXd res_h = y_h.data - m * a_coarse.data;
    const MatrixXd res_m = y_m.data - (model.R * m) * a;
    Objective obj;
    obj.hs_term = 0.5 * model.lam_h.apply_inv_sqrt(res_h).squaredNorm();
    obj.ms_term = 0.5 * model.lam_m.apply_inv_sqrt(res_m).squaredNorm();
    obj.value = obj.hs_term + obj.ms_term;
    return obj;
}

inline Objective objective(const MatrixXd& m, const MatrixXd& a, const SpectralImage& y_h,
                           const SpectralImage& y_m, const DegradationModel& model) {
    Fft2D fft(model.blur.n_rows, model.blur.n_cols);
    return objective(m, a, y_h, y_m, model, fft);
}

struct AdmmAbundanceState {
    MatrixXd V; // feasible splitting variable, p x n
    MatrixXd G; // scaled dual, p x n
    double mu = 0.0;
    int iter = 0;
    std::vector<double> primal_trace, dual_trace;
};

inline AdmmAbundanceState init_abundance_state(int p, int n, double mu) {
    if (p < 1 || n < 1 || !(mu > 0.0))
        throw std::invalid_argument("init_abundance_state: need p, n >= 1 and mu > 0");
    AdmmAbundanceState st;
    st.V = MatrixXd::Constant(p, n, 1.0 / p);
    st.G = MatrixXd::Zero(p, n);
    st.mu = mu;
    return st;
}

struct AdmmEndmemberState {
    MatrixXd T; // splitting variable in the whitened domain, bands x p
    MatrixXd G; // scaled dual, bands x p
    double mu = 0.0;
    int iter = 0;
    std::vector<double> primal_trace, dual_trace;
};

inline AdmmEndmemberState init_endmember_state(const MatrixXd& m0, const BandCovariance& lam_h,
                                               double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("init_endmember_state: mu must be positive");
    AdmmEndmemberState st;
    st.T = lam_h.apply_inv_sqrt(m0);
    st.G = MatrixXd::Zero(m0.rows(), m0.cols());
    st.mu = mu;
    return st;
}

// One abundance ADMM run at fixed M. Optionally reuses an FFT plan and the
// M-independent adjoint observation term Y_H (BS)^T, which the outer driver
// precomputes once.
inline MatrixXd admm_abundance(const MatrixXd& m, const SpectralImage& y_h,
                               const SpectralImage& y_m, const DegradationModel& model,
                               AdmmAbundanceState& st, int n_iters, Fft2D* fft_in = nullptr,
                               const MatrixXd* yh_bs_adj = nullptr) {
    const int nr = model.blur.n_rows, nc = model.blur.n_cols;
    const int p = static_cast<int>(m.cols());
    if (st.V.rows() != p || st.V.cols() != static_cast<Eigen::Index>(nr) * nc)
        throw std::invalid_argument("admm_abundance: state is " + std::to_string(st.V.rows()) +
                                    "x" + std::to_string(st.V.cols()) + ", expected " +
                                    std::to_string(p) + "x" + std::to_string(nr * nc));
    if (n_iters == 0) return project_simplex_columns(st.V);
    if (!(st.mu > 0.0)) throw std::invalid_argument("admm_abundance: state.mu must be positive");

    Fft2D local_fft = fft_in ? Fft2D(1, 1) : Fft2D(nr, nc);
    Fft2D& fft = fft_in ? *fft_in : local_fft;

    const MatrixXd gram = m.transpose() * model.lam_h.apply_inv(m);
    const MatrixXd k = ridge_if_ill_conditioned(gram);
    Eigen::LLT<MatrixXd> k_llt(k);
    if (k_llt.info() != Eigen::Success)
        throw std::runtime_error("admm_abundance: M^T Lh^{-1} M is rank deficient even after the "
                                 "ridge fallback; endmembers are collinear");
    const MatrixXd rm = model.R * m;
    const MatrixXd n_fac =
        rm.transpose() * model.lam_m.apply_inv(rm) + st.mu * MatrixXd::Identity(p, p);

    AbundanceSylvesterSystem sys;
    sys.c1_eig = eig_spd_inv_times(k, n_fac);
    sys.C1 = k_llt.solve(n_fac);
    sys.spec = circulant_spectrum(model.blur, model.down.d);

    const MatrixXd p_h = yh_bs_adj ? *yh_bs_adj : apply_bs_adjoint(model, y_h, fft).data;
    const MatrixXd f0 =
        m.transpose() * model.lam_h.apply_inv(p_h) + rm.transpose() * model.lam_m.apply_inv(y_m.data);

    for (int it = 0; it < n_iters; ++it) {
        sys.C3 = k_llt.solve(f0 + st.mu * (st.V + st.G));
        const MatrixXd a = solve_abundance_sylvester(sys, fft);
        if (!a.allFinite())
            throw std::runtime_error("admm_abundance: non-finite iterate at inner iteration " +
                                     std::to_string(st.iter));
        MatrixXd v_new = project_simplex_columns(a - st.G);
        st.primal_trace.push_back((a - v_new).norm());
        st.dual_trace.push_back(st.mu * (v_new - st.V).norm());
        st.G -= a - v_new;
        st.V = std::move(v_new);
        ++st.iter;
    }
    return st.V;
}

// One endmember ADMM run at fixed A. h1_eig is the decomposition of
// Lh R^T Lm^{-1} R, which depends only on the model; callers that iterate
// pass it in to avoid re-decomposing a bands x bands matrix every time.
// In subspace mode `lift` carries the basis used to enforce the box
// constraint in the full spectral domain (clip there, project back).
inline MatrixXd admm_endmember(const MatrixXd& a, const SpectralImage& y_h,
                               const SpectralImage& y_m, const DegradationModel& model,
                               AdmmEndmemberState& st, int n_iters, Fft2D* fft_in = nullptr,
                               const EigenPair* h1_eig = nullptr, const MatrixXd* lift = nullptr) {
    const int nr = model.blur.n_rows, nc = model.blur.n_cols;
    const int p = static_cast<int>(a.rows());
    const int bands = model.lam_h.dim();
    if (st.T.rows() != bands || st.T.cols() != p)
        throw std::invalid_argument("admm_endmember: state is " + std::to_string(st.T.rows()) +
                                    "x" + std::to_string(st.T.cols()) + ", expected " +
                                    std::to_string(bands) + "x" + std::to_string(p));

    auto clip_feasible = [&](const MatrixXd& w) {
        return lift ? MatrixXd(lift->transpose() * project_box_unit(*lift * w))
                    : project_box_unit(w);
    };
    if (n_iters == 0) return clip_feasible(model.lam_h.apply_sqrt(st.T));
    if (!(st.mu > 0.0)) throw std::invalid_argument("admm_endmember: state.mu must be positive");

    Fft2D local_fft = fft_in ? Fft2D(1, 1) : Fft2D(nr, nc);
    Fft2D& fft = fft_in ? *fft_in : local_fft;

    const SpectralImage a_h = apply_bs(model, SpectralImage(a, nr, nc), fft);
    const MatrixXd aat = ridge_if_ill_conditioned(a * a.transpose());
    Eigen::LLT<MatrixXd> aat_llt(aat);
    if (aat_llt.info() != Eigen::Success)
        throw std::runtime_error("admm_endmember: A A^T is singular even after the ridge "
                                 "fallback; abundances are degenerate");

    EigenPair h1_local;
    if (!h1_eig) {
        const MatrixXd g_r = model.R.transpose() * model.lam_m.apply_inv(model.R);
        h1_local = eig_spd_times_psd(model.lam_h.matrix(), g_r);
        h1_eig = &h1_local;
    }
    const EigenPair e2 = eig_times_spd_inv(
        a_h.data * a_h.data.transpose() + st.mu * MatrixXd::Identity(p, p), aat);

    // H3 numerator terms that do not move during the inner loop
    const MatrixXd fixed = y_h.data * a_h.data.transpose() +
                           model.lam_h.matrix() *
                               (model.R.transpose() *
                                (model.lam_m.apply_inv(y_m.data) * a.transpose()));

    MatrixXd m_est;
    for (int it = 0; it < n_iters; ++it) {
        const MatrixXd bracket = fixed + st.mu * model.lam_h.apply_sqrt(st.T + st.G);
        const MatrixXd h3 = aat_llt.solve(bracket.transpose()).transpose();
        m_est = sylvester_eig_solve(*h1_eig, e2, h3);
        if (!m_est.allFinite())
            throw std::runtime_error("admm_endmember: non-finite iterate at inner iteration " +
                                     std::to_string(st.iter));
        const MatrixXd w = clip_feasible(m_est - model.lam_h.apply_sqrt(st.G));
        MatrixXd t_new = model.lam_h.apply_inv_sqrt(w);
        const MatrixXd m_whitened = model.lam_h.apply_inv_sqrt(m_est);
        st.primal_trace.push_back((m_whitened - t_new).norm());
        st.dual_trace.push_back(st.mu * (t_new - st.T).norm());
        st.G -= m_whitened - t_new;
        st.T = std::move(t_new);
        ++st.iter;
    }
    return clip_feasible(model.lam_h.apply_sqrt(st.T));
}

} // namespace fumi

#endif
