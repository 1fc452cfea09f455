#ifndef FUMI_METRICS_HPP
#define FUMI_METRICS_HPP

// Fusion- and unmixing-quality scores.  Fusion metrics compare a restored
// image against the reference band-by-band and pixel-by-pixel; unmixing
// metrics first align the estimated endmembers to the references (the
// factorization is identifiable only up to a permutation) and score the
// aligned pair.
//
// Definitions used here:
//   RSNR  = 10 log10(||X||_F^2 / ||Xhat - X||_F^2), capped at 300 dB
//   SAM   = mean over pixels of the angle between x_j and xhat_j, degrees
//   UIQI  = mean over bands of the universal image-quality index computed
//           on the whole band as a single window
//   ERGAS = 100 (1/d) sqrt(mean_i (RMSE_i / mean_i)^2)  over bands i
//   DD    = mean absolute entry-wise difference
//   NMSE  = 10 log10(||Ahat - A||_F^2 / ||A||_F^2), capped at -300 dB

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fumi/core.hpp"

namespace fumi {

struct FusionReport {
    double rsnr_db = 0.0;
    double uiqi = 0.0;
    double sam_deg = 0.0;
    double ergas = 0.0;
    double dd = 0.0;
    double wall_time_s = 0.0;
    int skipped_pixels = 0; // zero-norm pixels left out of the SAM average
};

struct UnmixReport {
    double sam_M_deg = 0.0;
    double nmse_M_db = 0.0;
    double nmse_A_db = 0.0;
    std::vector<int> permutation; // estimate column k matches reference column permutation[k]
};

namespace detail {

constexpr double kRsnrCapDb = 300.0;
constexpr double kNmseFloorDb = -300.0;

inline double angle_deg(const VectorXd& a, const VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    // atan2 of the half-angle chords instead of acos of the cosine: the
    // acos form loses half the significant digits near zero angle and
    // cannot return exactly 0 for identical directions.
    const VectorXd u = a / na, v = b / nb;
    return 2.0 * std::atan2((u - v).norm(), (u + v).norm()) * 180.0 / std::numbers::pi;
}

// Universal image-quality index of one band over a single global window:
// correlation, luminance, and contrast factors combined as
// (4 sxy mx my) / ((sx2 + sy2)(mx^2 + my^2)).  Sample (n-1) variances.
inline double uiqi_band(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        const Eigen::Ref<const Eigen::RowVectorXd>& y) {
    const double n = static_cast<double>(x.size());
    if (n < 2.0) return 1.0;
    const double mx = x.mean(), my = y.mean();
    const double sx2 = (x.array() - mx).square().sum() / (n - 1.0);
    const double sy2 = (y.array() - my).square().sum() / (n - 1.0);
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum() / (n - 1.0);
    const double denom = (sx2 + sy2) * (mx * mx + my * my);
    if (denom == 0.0) return sxy == 0.0 && mx == my ? 1.0 : 0.0;
    return 4.0 * sxy * mx * my / denom;
}

inline double nmse_db(const MatrixXd& est, const MatrixXd& ref) {
    const double ref2 = ref.squaredNorm();
    if (ref2 == 0.0) throw std::invalid_argument("nmse_db: reference is all zero");
    const double err2 = (est - ref).squaredNorm();
    if (err2 == 0.0) return kNmseFloorDb;
    return std::max(10.0 * std::log10(err2 / ref2), kNmseFloorDb);
}

} // namespace detail

inline FusionReport fusion_metrics(const SpectralImage& x_hat, const SpectralImage& x_ref,
                                   int d) {
    if (x_hat.data.rows() != x_ref.data.rows() || x_hat.data.cols() != x_ref.data.cols())
        throw std::invalid_argument("fusion_metrics: image shapes differ");
    if (d <= 0) throw std::invalid_argument("fusion_metrics: resolution ratio must be >= 1");
    const MatrixXd& xh = x_hat.data;
    const MatrixXd& xr = x_ref.data;
    const Eigen::Index bands = xr.rows(), n = xr.cols();

    FusionReport rep;

    const double err2 = (xh - xr).squaredNorm();
    rep.rsnr_db = err2 == 0.0 ? detail::kRsnrCapDb
                              : std::min(10.0 * std::log10(xr.squaredNorm() / err2),
                                         detail::kRsnrCapDb);

    double sam_sum = 0.0;
    int sam_count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (xr.col(j).norm() == 0.0 || xh.col(j).norm() == 0.0) {
            ++rep.skipped_pixels;
            continue;
        }
        sam_sum += detail::angle_deg(xr.col(j), xh.col(j));
        ++sam_count;
    }
    rep.sam_deg = sam_count > 0 ? sam_sum / sam_count : 0.0;

    double uiqi_sum = 0.0, ergas_sum = 0.0;
    for (Eigen::Index i = 0; i < bands; ++i) {
        uiqi_sum += detail::uiqi_band(xr.row(i), xh.row(i));
        const double mean_i = xr.row(i).mean();
        const double rmse_i = std::sqrt((xh.row(i) - xr.row(i)).squaredNorm() / double(n));
        if (mean_i != 0.0) {
            const double r = rmse_i / mean_i;
            ergas_sum += r * r;
        }
    }
    rep.uiqi = bands > 0 ? uiqi_sum / double(bands) : 0.0;
    rep.ergas = bands > 0 ? 100.0 / double(d) * std::sqrt(ergas_sum / double(bands)) : 0.0;
    rep.dd = (xh - xr).cwiseAbs().sum() / double(bands * n);
    return rep;
}

namespace detail {

// Cost of assigning estimate column k to reference column v: their angle.
inline MatrixXd pairwise_angles(const MatrixXd& m_hat, const MatrixXd& m_ref) {
    const Eigen::Index p = m_ref.cols();
    MatrixXd ang(p, p);
    for (Eigen::Index k = 0; k < p; ++k)
        for (Eigen::Index v = 0; v < p; ++v) ang(k, v) = angle_deg(m_hat.col(k), m_ref.col(v));
    return ang;
}

// Greedy assignment: repeatedly take the globally smallest remaining angle.
inline std::vector<int> greedy_assignment(const MatrixXd& ang) {
    const int p = static_cast<int>(ang.rows());
    std::vector<int> perm(p, -1);
    std::vector<bool> row_done(p, false), col_done(p, false);
    for (int step = 0; step < p; ++step) {
        double best = std::numeric_limits<double>::infinity();
        int bk = -1, bv = -1;
        for (int k = 0; k < p; ++k) {
            if (row_done[k]) continue;
            for (int v = 0; v < p; ++v) {
                if (col_done[v]) continue;
                if (ang(k, v) < best) {
                    best = ang(k, v);
                    bk = k;
                    bv = v;
                }
            }
        }
        perm[bk] = bv;
        row_done[bk] = true;
        col_done[bv] = true;
    }
    return perm;
}

// Exhaustive best-total-angle assignment; feasible for small p only.
inline std::vector<int> exhaustive_assignment(const MatrixXd& ang) {
    const int p = static_cast<int>(ang.rows());
    std::vector<int> perm(p), best_perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    best_perm = perm;
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int k = 0; k < p; ++k) total += ang(k, perm[k]);
        if (total < best) {
            best = total;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best_perm;
}

} // namespace detail

// Align estimated endmembers to the references by smallest spectral angle
// (greedy, upgraded to the exhaustive optimum when p is small enough to
// enumerate), carry the same permutation to the abundance rows, and score.
inline UnmixReport unmix_metrics(const MatrixXd& m_hat, const MatrixXd& a_hat,
                                 const MatrixXd& m_ref, const MatrixXd& a_ref) {
    const Eigen::Index p = m_ref.cols();
    if (m_hat.cols() != p || a_hat.rows() != p || a_ref.rows() != p)
        throw std::invalid_argument("unmix_metrics: endmember counts differ");
    if (m_hat.rows() != m_ref.rows())
        throw std::invalid_argument("unmix_metrics: endmember band counts differ");
    if (a_hat.cols() != a_ref.cols())
        throw std::invalid_argument("unmix_metrics: abundance pixel counts differ");

    const MatrixXd ang = detail::pairwise_angles(m_hat, m_ref);
    std::vector<int> perm =
        p <= 8 ? detail::exhaustive_assignment(ang) : detail::greedy_assignment(ang);

    // Reorder the estimate into reference order: column v of the aligned
    // estimate is the estimate column assigned to reference v.
    MatrixXd m_al(m_ref.rows(), p);
    MatrixXd a_al(p, a_ref.cols());
    for (int k = 0; k < p; ++k) {
        m_al.col(perm[static_cast<std::size_t>(k)]) = m_hat.col(k);
        a_al.row(perm[static_cast<std::size_t>(k)]) = a_hat.row(k);
    }

    UnmixReport rep;
    rep.permutation.assign(perm.begin(), perm.end());
    double sam_sum = 0.0;
    for (Eigen::Index v = 0; v < p; ++v)
        sam_sum += detail::angle_deg(m_al.col(v), m_ref.col(v));
    rep.sam_M_deg = sam_sum / double(p);
    rep.nmse_M_db = detail::nmse_db(m_al, m_ref);
    rep.nmse_A_db = detail::nmse_db(a_al, a_ref);
    return rep;
}

} // namespace fumi

#endif
