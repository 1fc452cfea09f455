#ifndef FUMI_DEGRADE_HPP
#define FUMI_DEGRADE_HPP

// Forward observation model: a reference scene X produces
//   Y_H = blur + decimate + noise   (low spatial, full spectral resolution)
//   Y_M = band-integrate + noise    (full spatial, few bands)
// plus the composite spatial operator and its adjoint used by the solvers.

#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fumi/blur.hpp"
#include "fumi/core.hpp"
#include "fumi/covariance.hpp"
#include "fumi/fft.hpp"

namespace fumi {

struct DegradationModel {
    BlurOperator blur;   // built for the fine grid
    Downsampler down;
    MatrixXd R;          // n_lambda x m_lambda (plain matrix: may be subspace-projected)
    BandNoise noise_h;   // used when simulating observations
    BandNoise noise_m;
    BandCovariance lam_h; // used when weighting data-fit terms
    BandCovariance lam_m;
};

inline DegradationModel make_degradation_model(BlurOperator blur, Downsampler down,
                                               const SpectralResponse& response,
                                               BandNoise noise_h, BandNoise noise_m) {
    check_divisible(down, blur.n_rows, blur.n_cols);
    if (noise_m.bands() != response.out_bands())
        throw std::invalid_argument("degradation model: noise_m has " +
                                    std::to_string(noise_m.bands()) + " bands, response has " +
                                    std::to_string(response.out_bands()));
    DegradationModel m;
    m.blur = std::move(blur);
    m.down = down;
    m.R = response.weights;
    m.lam_h = BandCovariance::from_noise(noise_h);
    m.lam_m = BandCovariance::from_noise(noise_m);
    m.noise_h = std::move(noise_h);
    m.noise_m = std::move(noise_m);
    return m;
}

// X * BS: blur every band, then decimate.
inline SpectralImage apply_bs(const DegradationModel& m, const SpectralImage& x, Fft2D& fft) {
    return downsample(m.down, apply_blur(m.blur, x, fft));
}

inline SpectralImage apply_bs(const DegradationModel& m, const SpectralImage& x) {
    Fft2D fft(m.blur.n_rows, m.blur.n_cols);
    return apply_bs(m, x, fft);
}

// Z * (BS)^T: zero-fill to the fine grid, then adjoint blur.
inline SpectralImage apply_bs_adjoint(const DegradationModel& m, const SpectralImage& z,
                                      Fft2D& fft) {
    return apply_blur_adjoint(m.blur, upsample_zero(m.down, z), fft);
}

inline SpectralImage apply_bs_adjoint(const DegradationModel& m, const SpectralImage& z) {
    Fft2D fft(m.blur.n_rows, m.blur.n_cols);
    return apply_bs_adjoint(m, z, fft);
}

// Per-band noise variance reproducing a target SNR (in dB) on a given
// noiseless signal: variance_i = ||row_i||^2 / (count * 10^(snr/10)).
inline VectorXd snr_to_variance(const MatrixXd& signal, double snr_db) {
    if (signal.cols() == 0)
        throw std::invalid_argument("snr_to_variance: empty signal");
    const double gain = std::pow(10.0, snr_db / 10.0);
    VectorXd var(signal.rows());
    for (Eigen::Index i = 0; i < signal.rows(); ++i) {
        const double energy = signal.row(i).squaredNorm();
        if (energy <= 0.0)
            throw std::invalid_argument("snr_to_variance: band " + std::to_string(i) +
                                        " has zero energy, SNR undefined");
        var[i] = energy / (static_cast<double>(signal.cols()) * gain);
    }
    return var;
}

namespace detail {

// Additive Gaussian noise, one variance per band, drawn in a fixed
// column-major order so a seed pins every sample.
inline void add_band_noise(MatrixXd& y, const BandNoise& noise, std::mt19937_64& rng) {
    if (noise.bands() != y.rows())
        throw std::invalid_argument("degrade: noise model has " + std::to_string(noise.bands()) +
                                    " bands, observation has " + std::to_string(y.rows()));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const VectorXd sdev = noise.variances.cwiseSqrt();
    for (Eigen::Index j = 0; j < y.cols(); ++j)
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            const double g = gauss(rng);
            if (sdev[i] > 0.0) y(i, j) += sdev[i] * g;
        }
}

} // namespace detail

struct Observations {
    SpectralImage y_h;
    SpectralImage y_m;
};

inline Observations degrade(const DegradationModel& m, const SpectralImage& x, std::uint64_t seed) {
    if (m.R.cols() != x.bands())
        throw std::invalid_argument("degrade: response expects " + std::to_string(m.R.cols()) +
                                    " bands, scene has " + std::to_string(x.bands()));
    if (m.noise_h.bands() != x.bands())
        throw std::invalid_argument("degrade: noise_h has " + std::to_string(m.noise_h.bands()) +
                                    " bands, scene has " + std::to_string(x.bands()));
    Observations obs;
    obs.y_h = apply_bs(m, x);
    obs.y_m = apply_spectral_response(m.R, x);
    std::mt19937_64 rng(seed);
    detail::add_band_noise(obs.y_h.data, m.noise_h, rng);
    detail::add_band_noise(obs.y_m.data, m.noise_m, rng);
    return obs;
}

} // namespace fumi

#endif
