#ifndef FUMI_DRIVER_HPP
#define FUMI_DRIVER_HPP

// Outer alternating driver. Starting from a deterministic endmember
// initialization it alternates the abundance and endmember ADMM solvers
// (warm-starting both across outer iterations) until the objective's
// relative change falls below outer_tol, the fit is numerically exact, or
// max_outer is reached, and returns the best iterate seen along the way.
// Supervised mode keeps M fixed and only refines abundances. At least one
// abundance solve always runs, so A_hat is defined even for max_outer = 0.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fumi/admm.hpp"
#include "fumi/core.hpp"
#include "fumi/degrade.hpp"
#include "fumi/eea.hpp"
#include "fumi/projections.hpp"
#include "fumi/subspace.hpp"

namespace fumi {

enum class FusionMode { supervised, unsupervised };

struct FumiConfig {
    int p = 1;
    FusionMode mode = FusionMode::unsupervised;
    bool use_subspace = false;
    int subspace_rank = 0; // <= 0 picks the endmember count
    double mu = 0.0;       // <= 0 picks the mean band-noise power
    int inner_iters = 30;
    double outer_tol = 1e-4;
    int max_outer = 100;
    std::uint64_t seed = 0;
    bool random_init = false; // jitter the abundance start instead of uniform 1/p
};

struct FumiResult {
    MatrixXd M_hat;       // full spectral domain
    MatrixXd A_hat;       // feasible (columns on the simplex)
    SpectralImage X_hat;  // M_hat * A_hat on the fine grid
    std::vector<Objective> objective_trace; // one entry per outer iteration
    int iterations = 0;
    double wall_time = 0.0; // seconds
};

// Penalty default: pooled mean of the band covariance diagonals. All-zero
// noise maps to identity covariances upstream, so this degrades to 1.
inline double pooled_noise_power(const BandCovariance& lam_h, const BandCovariance& lam_m) {
    const double mean = (lam_h.mean_diagonal() * lam_h.dim() + lam_m.mean_diagonal() * lam_m.dim()) /
                        (lam_h.dim() + lam_m.dim());
    return (std::isfinite(mean) && mean > 0.0) ? mean : 1.0;
}

namespace detail {

inline MatrixXd random_simplex_init(int p, Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    MatrixXd v(p, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < p; ++i) {
            v(i, j) = expo(rng);
            s += v(i, j);
        }
        v.col(j) /= s;
    }
    return v;
}

} // namespace detail

// m_fixed supplies the endmembers: mandatory meaning in supervised mode (they
// are never updated), starting point in unsupervised mode. When omitted the
// successive-projection initializer runs on Y_H.
inline FumiResult run_fumi(const SpectralImage& y_h, const SpectralImage& y_m,
                           const DegradationModel& model, const FumiConfig& cfg,
                           const MatrixXd* m_fixed = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    const int nr = model.blur.n_rows, nc = model.blur.n_cols;
    const Eigen::Index n = static_cast<Eigen::Index>(nr) * nc;

    if (cfg.p < 1) throw std::invalid_argument("run_fumi: p must be >= 1");
    if (cfg.inner_iters < 1) throw std::invalid_argument("run_fumi: inner_iters must be >= 1");
    if (!(cfg.outer_tol > 0.0)) throw std::invalid_argument("run_fumi: outer_tol must be > 0");
    if (cfg.max_outer < 0) throw std::invalid_argument("run_fumi: max_outer must be >= 0");
    if (y_m.n_rows != nr || y_m.n_cols != nc)
        throw std::invalid_argument("run_fumi: multispectral image is " +
                                    std::to_string(y_m.n_rows) + "x" + std::to_string(y_m.n_cols) +
                                    ", model grid is " + std::to_string(nr) + "x" +
                                    std::to_string(nc));
    if (y_h.n_rows * model.down.d != nr || y_h.n_cols * model.down.d != nc)
        throw std::invalid_argument("run_fumi: hyperspectral grid does not match the model's "
                                    "decimation factor");
    if (y_h.bands() != model.lam_h.dim() || y_m.bands() != model.lam_m.dim() ||
        y_m.bands() != model.R.rows())
        throw std::invalid_argument("run_fumi: band counts disagree with the model");

    MatrixXd m0_full;
    if (m_fixed) {
        if (m_fixed->rows() != y_h.bands() || m_fixed->cols() != cfg.p)
            throw std::invalid_argument("run_fumi: fixed endmembers are " +
                                        std::to_string(m_fixed->rows()) + "x" +
                                        std::to_string(m_fixed->cols()) + ", expected " +
                                        std::to_string(y_h.bands()) + "x" + std::to_string(cfg.p));
        validate_endmembers(*m_fixed);
        m0_full = *m_fixed;
    } else {
        m0_full = initialize_endmembers(y_h, cfg.p);
    }

    // Solvers run in the working domain: either the full spectral space or
    // the span of the top singular vectors of Y_H.
    Subspace sub;
    SpectralImage y_h_w = y_h;
    DegradationModel work = model;
    MatrixXd m_work = m0_full;
    const MatrixXd* lift = nullptr;
    if (cfg.use_subspace) {
        const int max_rank = std::min(y_h.bands(), y_h.pixels());
        const int rank = cfg.subspace_rank > 0 ? cfg.subspace_rank : std::min(cfg.p, max_rank);
        sub = identify_subspace(y_h, rank);
        ProjectedModel proj = project_model(sub, y_h, model.lam_h, model.R);
        y_h_w = std::move(proj.y_h);
        work.lam_h = std::move(proj.lam_h);
        work.R = std::move(proj.R);
        m_work = sub.E.transpose() * m0_full;
        lift = &sub.E;
    }

    const double mu = cfg.mu > 0.0 ? cfg.mu : pooled_noise_power(work.lam_h, work.lam_m);
    const bool supervised = cfg.mode == FusionMode::supervised;

    Fft2D fft(nr, nc);
    // Both of these depend only on the model and observations, not on the
    // iterates, so they are shared by every outer iteration.
    const MatrixXd p_h = apply_bs_adjoint(work, y_h_w, fft).data;
    EigenPair h1_eig;
    if (!supervised) {
        const MatrixXd g_r = work.R.transpose() * work.lam_m.apply_inv(work.R);
        h1_eig = eig_spd_times_psd(work.lam_h.matrix(), g_r);
    }

    AdmmAbundanceState ast = init_abundance_state(cfg.p, static_cast<int>(n), mu);
    if (cfg.random_init) ast.V = detail::random_simplex_init(cfg.p, n, cfg.seed);
    AdmmEndmemberState est;
    if (!supervised) est = init_endmember_state(m_work, work.lam_h, mu);

    FumiResult res;
    MatrixXd a_hat;
    // The inner solvers run a fixed budget, so late outer iterations can
    // wobble by a fraction of outer_tol instead of descending exactly.  The
    // returned iterate is therefore the best one seen, and only an objective
    // that blows past twice the best value counts as divergence.
    MatrixXd m_best, a_best;
    double best_val = std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::quiet_NaN();
    const bool init_only = cfg.max_outer == 0;
    const int outer_cap = std::max(1, cfg.max_outer);
    int outer = 0;
    while (true) {
        a_hat = admm_abundance(m_work, y_h_w, y_m, work, ast, cfg.inner_iters, &fft, &p_h);
        if (!supervised && !init_only)
            m_work = admm_endmember(a_hat, y_h_w, y_m, work, est, cfg.inner_iters, &fft, &h1_eig,
                                    lift);
        const Objective obj = objective(m_work, a_hat, y_h_w, y_m, work, fft);
        res.objective_trace.push_back(obj);
        ++outer;
        if (obj.value < best_val) {
            best_val = obj.value;
            m_best = m_work;
            a_best = a_hat;
        } else if (obj.value > 2.0 * best_val + 1e-6) {
            throw std::runtime_error(
                "run_fumi: objective rose from " + std::to_string(best_val) + " to " +
                std::to_string(obj.value) + " at outer iteration " + std::to_string(outer) +
                "; the alternating scheme is diverging (suspect mu or the noise covariances)");
        }
        if (outer >= 2 && std::abs(prev - obj.value) <= cfg.outer_tol * std::abs(prev)) break;
        if (obj.value < 1e-18) break;
        if (outer >= outer_cap) break;
        prev = obj.value;
    }

    res.iterations = outer;
    if (supervised)
        res.M_hat = m0_full;
    else
        res.M_hat = cfg.use_subspace ? MatrixXd(project_box_unit(sub.E * m_best))
                                     : std::move(m_best);
    res.A_hat = std::move(a_best);
    res.X_hat = SpectralImage(res.M_hat * res.A_hat, nr, nc);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace fumi

#endif
