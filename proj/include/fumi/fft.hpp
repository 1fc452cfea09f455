#ifndef FUMI_FFT_HPP
#define FUMI_FFT_HPP

// Thin RAII wrapper around FFTW double-precision complex 2-D transforms.
//
// Images are stored column-major (pixel j = col * n_rows + row). FFTW expects
// row-major arrays, so a column-major (n_rows x n_cols) buffer is handed to
// FFTW as a row-major (n_cols x n_rows) array; the 2-D DFT commutes with that
// transposition, which keeps frequency (f_r, f_c) at index f_c * n_rows + f_r.
//
// Forward transforms are unnormalized, inverse transforms divide by the pixel
// count, so inverse(forward(x)) == x. A single Fft2D instance must not be
// used from two threads at once (the plans execute on internal buffers);
// plan creation/destruction is serialized globally, so distinct instances
// may live on distinct threads.

#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <fftw3.h>

namespace fumi {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class Fft2D {
public:
    Fft2D(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols) {
        if (n_rows < 1 || n_cols < 1)
            throw std::invalid_argument("Fft2D: grid must be at least 1x1, got " +
                                        std::to_string(n_rows) + "x" + std::to_string(n_cols));
        const std::size_t n = static_cast<std::size_t>(n_rows) * n_cols;
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        in_ = fftw_alloc_complex(n);
        out_ = fftw_alloc_complex(n);
        if (!in_ || !out_) {
            release();
            throw std::bad_alloc();
        }
        // Column-major (n_rows x n_cols) seen by FFTW as row-major (n_cols x n_rows).
        fwd_ = fftw_plan_dft_2d(n_cols, n_rows, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(n_cols, n_rows, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) {
            release();
            throw std::runtime_error("Fft2D: FFTW plan creation failed");
        }
    }

    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    Fft2D(Fft2D&& other) noexcept
        : n_rows_(other.n_rows_), n_cols_(other.n_cols_), in_(other.in_), out_(other.out_),
          fwd_(other.fwd_), bwd_(other.bwd_) {
        other.in_ = other.out_ = nullptr;
        other.fwd_ = other.bwd_ = nullptr;
    }
    Fft2D& operator=(Fft2D&&) = delete;

    ~Fft2D() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        release();
    }

    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    int size() const { return n_rows_ * n_cols_; }

    Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXd>& img) const {
        check_len(img.size());
        for (int i = 0; i < size(); ++i) {
            in_[i][0] = img[i];
            in_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        return read_out();
    }

    Eigen::VectorXcd forward(const Eigen::Ref<const Eigen::VectorXcd>& img) const {
        check_len(img.size());
        load(img);
        fftw_execute(fwd_);
        return read_out();
    }

    // Normalized inverse: inverse(forward(x)) == x.
    Eigen::VectorXcd inverse(const Eigen::Ref<const Eigen::VectorXcd>& spec) const {
        check_len(spec.size());
        load(spec);
        fftw_execute(bwd_);
        Eigen::VectorXcd res = read_out();
        res /= static_cast<double>(size());
        return res;
    }

    // Inverse of a conjugate-symmetric spectrum; the imaginary residue must be
    // numerical noise and is checked before being discarded.
    Eigen::VectorXd inverse_real(const Eigen::Ref<const Eigen::VectorXcd>& spec) const {
        check_len(spec.size());
        load(spec);
        fftw_execute(bwd_);
        const double scale = 1.0 / static_cast<double>(size());
        Eigen::VectorXd res(size());
        double max_im = 0.0, max_re = 0.0;
        for (int i = 0; i < size(); ++i) {
            res[i] = out_[i][0] * scale;
            max_im = std::max(max_im, std::abs(out_[i][1]) * scale);
            max_re = std::max(max_re, std::abs(res[i]));
        }
        if (max_im > 1e-10 * std::max(1.0, max_re))
            throw std::runtime_error("Fft2D::inverse_real: spectrum is not conjugate-symmetric "
                                     "(imaginary residue " + std::to_string(max_im) + ")");
        return res;
    }

private:
    void check_len(Eigen::Index len) const {
        if (len != size())
            throw std::invalid_argument("Fft2D: buffer length " + std::to_string(len) +
                                        " does not match grid " + std::to_string(n_rows_) + "x" +
                                        std::to_string(n_cols_));
    }

    void load(const Eigen::Ref<const Eigen::VectorXcd>& v) const {
        for (int i = 0; i < size(); ++i) {
            in_[i][0] = v[i].real();
            in_[i][1] = v[i].imag();
        }
    }

    Eigen::VectorXcd read_out() const {
        Eigen::VectorXcd res(size());
        for (int i = 0; i < size(); ++i) res[i] = std::complex<double>(out_[i][0], out_[i][1]);
        return res;
    }

    void release() {
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
        if (in_) fftw_free(in_);
        if (out_) fftw_free(out_);
        fwd_ = bwd_ = nullptr;
        in_ = out_ = nullptr;
    }

    int n_rows_ = 0, n_cols_ = 0;
    fftw_complex* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

} // namespace fumi

#endif
