#ifndef FUMI_CORE_HPP
#define FUMI_CORE_HPP

// Core data types of the fusion model.
//
// A scene is a matrix of spectra: one row per band, one column per pixel,
// with pixels flattened column-major (pixel j = col * n_rows + row).
// Endmember matrices are (bands x p) with entries in [0,1]; abundance
// matrices are (p x pixels) with columns on the unit simplex.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fumi {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct SpectralImage {
    MatrixXd data; // bands x pixels
    int n_rows = 0;
    int n_cols = 0;

    SpectralImage() = default;
    SpectralImage(MatrixXd d, int rows, int cols) : data(std::move(d)), n_rows(rows), n_cols(cols) {
        if (rows < 1 || cols < 1 || data.cols() != static_cast<Eigen::Index>(rows) * cols)
            throw std::invalid_argument("SpectralImage: " + std::to_string(data.cols()) +
                                        " pixels do not fill a " + std::to_string(rows) + "x" +
                                        std::to_string(cols) + " grid");
    }

    int bands() const { return static_cast<int>(data.rows()); }
    int pixels() const { return static_cast<int>(data.cols()); }
    int pixel_index(int row, int col) const { return col * n_rows + row; }
};

// Columns of M are reflectance signatures; entries must stay in [0,1].
inline void validate_endmembers(const MatrixXd& M, double tol = 1e-12) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            const double v = M(i, j);
            if (!(v >= -tol && v <= 1.0 + tol))
                throw std::invalid_argument("endmember matrix entry (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") = " + std::to_string(v) +
                                            " outside [0,1]");
        }
}

// Columns of A must be nonnegative and sum to one.
inline void validate_abundances(const MatrixXd& A, double tol = 1e-9) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            if (A(i, j) < -tol)
                throw std::invalid_argument("abundance (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") = " + std::to_string(A(i, j)) +
                                            " negative");
            s += A(i, j);
        }
        if (std::abs(s - 1.0) > tol)
            throw std::invalid_argument("abundance column " + std::to_string(j) + " sums to " +
                                        std::to_string(s) + ", expected 1");
    }
}

// X = M * A, shaped onto the given grid.
inline SpectralImage mix(const MatrixXd& M, const MatrixXd& A, int n_rows, int n_cols) {
    if (M.cols() != A.rows())
        throw std::invalid_argument("mix: M has " + std::to_string(M.cols()) +
                                    " endmembers but A has " + std::to_string(A.rows()) + " rows");
    return SpectralImage(M * A, n_rows, n_cols);
}

// Band-integration matrix R (n_lambda x m_lambda): each output band is a
// nonnegative combination of input bands.
struct SpectralResponse {
    MatrixXd weights;

    SpectralResponse() = default;
    explicit SpectralResponse(MatrixXd w) : weights(std::move(w)) {
        // Square is allowed: the degenerate one-window-per-band partition is
        // the identity and shows up in exact-recovery setups.
        if (weights.rows() < 1 || weights.rows() > weights.cols())
            throw std::invalid_argument("SpectralResponse: need 1 <= n_lambda <= m_lambda, got " +
                                        std::to_string(weights.rows()) + " x " +
                                        std::to_string(weights.cols()));
        for (Eigen::Index i = 0; i < weights.rows(); ++i) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < weights.cols(); ++j) {
                if (weights(i, j) < 0.0)
                    throw std::invalid_argument("SpectralResponse: negative weight at (" +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
                s += weights(i, j);
            }
            if (s <= 0.0)
                throw std::invalid_argument("SpectralResponse: row " + std::to_string(i) +
                                            " is all zero");
        }
    }

    int out_bands() const { return static_cast<int>(weights.rows()); }
    int in_bands() const { return static_cast<int>(weights.cols()); }
};

inline SpectralImage apply_spectral_response(const MatrixXd& R, const SpectralImage& x) {
    if (R.cols() != x.data.rows())
        throw std::invalid_argument("apply_spectral_response: R expects " +
                                    std::to_string(R.cols()) + " bands, image has " +
                                    std::to_string(x.data.rows()));
    return SpectralImage(R * x.data, x.n_rows, x.n_cols);
}

// Uniform decimation keeping sample (phase_r, phase_c) of every d x d block.
// With that convention S^T S = I on the coarse grid and upsample_zero is the
// exact adjoint of downsample.
struct Downsampler {
    int d = 1;
    int phase_r = 0;
    int phase_c = 0;

    explicit Downsampler(int factor = 1, int pr = 0, int pc = 0)
        : d(factor), phase_r(pr), phase_c(pc) {
        if (d < 1) throw std::invalid_argument("Downsampler: factor must be >= 1");
        if (pr < 0 || pr >= d || pc < 0 || pc >= d)
            throw std::invalid_argument("Downsampler: phase (" + std::to_string(pr) + "," +
                                        std::to_string(pc) + ") outside [0," + std::to_string(d) +
                                        ")^2");
    }
};

inline void check_divisible(const Downsampler& s, int n_rows, int n_cols) {
    if (n_rows % s.d != 0 || n_cols % s.d != 0)
        throw std::invalid_argument("downsample: grid " + std::to_string(n_rows) + "x" +
                                    std::to_string(n_cols) + " not divisible by d = " +
                                    std::to_string(s.d));
}

inline SpectralImage downsample(const Downsampler& s, const SpectralImage& x) {
    check_divisible(s, x.n_rows, x.n_cols);
    const int mr = x.n_rows / s.d, mc = x.n_cols / s.d;
    MatrixXd out(x.bands(), static_cast<Eigen::Index>(mr) * mc);
    for (int c = 0; c < mc; ++c)
        for (int r = 0; r < mr; ++r)
            out.col(c * mr + r) = x.data.col(x.pixel_index(s.phase_r + r * s.d, s.phase_c + c * s.d));
    return SpectralImage(std::move(out), mr, mc);
}

inline SpectralImage upsample_zero(const Downsampler& s, const SpectralImage& x) {
    const int nr = x.n_rows * s.d, nc = x.n_cols * s.d;
    SpectralImage out(MatrixXd::Zero(x.bands(), static_cast<Eigen::Index>(nr) * nc), nr, nc);
    for (int c = 0; c < x.n_cols; ++c)
        for (int r = 0; r < x.n_rows; ++r)
            out.data.col(out.pixel_index(s.phase_r + r * s.d, s.phase_c + c * s.d)) =
                x.data.col(x.pixel_index(r, c));
    return out;
}

// Per-band noise powers; zero means that band is noiseless.
struct BandNoise {
    VectorXd variances;

    BandNoise() = default;
    explicit BandNoise(VectorXd v) : variances(std::move(v)) {
        for (Eigen::Index i = 0; i < variances.size(); ++i)
            if (!(variances[i] >= 0.0) || !std::isfinite(variances[i]))
                throw std::invalid_argument("BandNoise: variance of band " + std::to_string(i) +
                                            " is " + std::to_string(variances[i]));
    }

    int bands() const { return static_cast<int>(variances.size()); }
};

} // namespace fumi

#endif
