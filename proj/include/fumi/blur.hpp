#ifndef FUMI_BLUR_HPP
#define FUMI_BLUR_HPP

// Cyclic (periodic-boundary) convolution of every band with a fixed kernel.
//
// The kernel is zero-padded onto the image grid and circularly shifted so its
// center lands at pixel (0,0); the 2-D DFT of that padded image is the blur
// spectrum, i.e. the eigenvalues of the circulant operator. Applying the blur
// is then forward FFT, pointwise multiply, inverse FFT per band; the adjoint
// multiplies by the conjugate spectrum.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "fumi/core.hpp"
#include "fumi/fft.hpp"

namespace fumi {

struct BlurOperator {
    MatrixXd kernel;    // odd-sized, sums to 1
    int n_rows = 0;     // fine grid the spectrum was built for
    int n_cols = 0;
    VectorXcd spectrum; // length n_rows * n_cols, column-major frequency layout
};

// Sampled isotropic Gaussian, normalized to unit sum. size must be odd.
inline MatrixXd gaussian_kernel(double sigma, int size) {
    if (size < 1 || size % 2 == 0)
        throw std::invalid_argument("gaussian_kernel: size must be odd and positive, got " +
                                    std::to_string(size));
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    MatrixXd k(size, size);
    const int h = size / 2;
    for (int c = 0; c < size; ++c)
        for (int r = 0; r < size; ++r)
            k(r, c) = std::exp(-((r - h) * (r - h) + (c - h) * (c - h)) / (2.0 * sigma * sigma));
    k /= k.sum();
    return k;
}

inline MatrixXd delta_kernel() { return MatrixXd::Ones(1, 1); }

inline BlurOperator make_blur_operator(const MatrixXd& kernel, int n_rows, int n_cols) {
    if (kernel.rows() != kernel.cols() || kernel.rows() % 2 == 0)
        throw std::invalid_argument("make_blur_operator: kernel must be square with odd size, got " +
                                    std::to_string(kernel.rows()) + "x" +
                                    std::to_string(kernel.cols()));
    if (kernel.rows() > n_rows || kernel.cols() > n_cols)
        throw std::invalid_argument("make_blur_operator: kernel " + std::to_string(kernel.rows()) +
                                    "x" + std::to_string(kernel.cols()) + " exceeds grid " +
                                    std::to_string(n_rows) + "x" + std::to_string(n_cols));
    if (std::abs(kernel.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("make_blur_operator: kernel sums to " +
                                    std::to_string(kernel.sum()) + ", expected 1");

    // Pad and rotate so the kernel center sits at index (0,0) with wraparound.
    const int h = static_cast<int>(kernel.rows()) / 2;
    VectorXd padded = VectorXd::Zero(static_cast<Eigen::Index>(n_rows) * n_cols);
    for (int c = 0; c < kernel.cols(); ++c)
        for (int r = 0; r < kernel.rows(); ++r) {
            const int rr = ((r - h) % n_rows + n_rows) % n_rows;
            const int cc = ((c - h) % n_cols + n_cols) % n_cols;
            padded[cc * n_rows + rr] += kernel(r, c);
        }

    BlurOperator op;
    op.kernel = kernel;
    op.n_rows = n_rows;
    op.n_cols = n_cols;
    op.spectrum = Fft2D(n_rows, n_cols).forward(padded);
    return op;
}

namespace detail {

inline void check_blur_image(const BlurOperator& b, const SpectralImage& x) {
    if (x.n_rows != b.n_rows || x.n_cols != b.n_cols)
        throw std::invalid_argument("apply_blur: image grid " + std::to_string(x.n_rows) + "x" +
                                    std::to_string(x.n_cols) + " does not match operator grid " +
                                    std::to_string(b.n_rows) + "x" + std::to_string(b.n_cols));
}

inline SpectralImage blur_with_spectrum(const BlurOperator& b, const SpectralImage& x,
                                        Fft2D& fft, bool conjugate) {
    check_blur_image(b, x);
    MatrixXd out(x.bands(), x.pixels());
    for (int i = 0; i < x.bands(); ++i) {
        VectorXcd spec = fft.forward(VectorXd(x.data.row(i)));
        if (conjugate)
            spec.array() *= b.spectrum.conjugate().array();
        else
            spec.array() *= b.spectrum.array();
        out.row(i) = fft.inverse_real(spec);
    }
    return SpectralImage(std::move(out), x.n_rows, x.n_cols);
}

} // namespace detail

inline SpectralImage apply_blur(const BlurOperator& b, const SpectralImage& x, Fft2D& fft) {
    return detail::blur_with_spectrum(b, x, fft, false);
}

inline SpectralImage apply_blur(const BlurOperator& b, const SpectralImage& x) {
    Fft2D fft(b.n_rows, b.n_cols);
    return detail::blur_with_spectrum(b, x, fft, false);
}

inline SpectralImage apply_blur_adjoint(const BlurOperator& b, const SpectralImage& x, Fft2D& fft) {
    return detail::blur_with_spectrum(b, x, fft, true);
}

inline SpectralImage apply_blur_adjoint(const BlurOperator& b, const SpectralImage& x) {
    Fft2D fft(b.n_rows, b.n_cols);
    return detail::blur_with_spectrum(b, x, fft, true);
}

} // namespace fumi

#endif
