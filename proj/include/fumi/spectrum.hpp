#ifndef FUMI_SPECTRUM_HPP
#define FUMI_SPECTRUM_HPP

// Aliasing-block view of a circulant blur spectrum.
//
// Decimating a cyclically blurred image by d per axis folds the fine-grid
// spectrum: frequency (f_r + t_r*m_r, f_c + t_c*m_c) of the fine grid lands
// on coarse frequency (f_r, f_c) for every block offset (t_r, t_c) in
// [0,d)^2, where m_r = n_rows/d and m_c = n_cols/d. Grouping the blur
// eigenvalues by block turns the decimated normal operator into a rank-m
// correction of a scaled identity, which is what the closed-form Sylvester
// solver exploits. Blocks are indexed t = t_c * d + t_r; entries within a
// block are column-major over the coarse grid (f_c * m_r + f_r).

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fumi/blur.hpp"
#include "fumi/core.hpp"

namespace fumi {

struct CirculantSpectrum {
    VectorXcd full;                // all n eigenvalues, column-major frequency layout
    std::vector<VectorXcd> blocks; // d^2 blocks of length m = m_rows * m_cols
    VectorXd power_sum;            // sum_t |D_t|^2, length m
    Eigen::VectorXi fine_index;    // fine-grid position of (block t, coarse f), at t*m + f
    int n_rows = 0, n_cols = 0;
    int d = 1;
    int m_rows = 0, m_cols = 0;

    int d_total() const { return d * d; }
    int coarse_pixels() const { return m_rows * m_cols; }
};

inline CirculantSpectrum circulant_spectrum(const BlurOperator& blur, int d) {
    if (d < 1 || blur.n_rows % d != 0 || blur.n_cols % d != 0)
        throw std::invalid_argument("circulant_spectrum: grid " + std::to_string(blur.n_rows) +
                                    "x" + std::to_string(blur.n_cols) +
                                    " not divisible by d = " + std::to_string(d));
    CirculantSpectrum s;
    s.full = blur.spectrum;
    s.n_rows = blur.n_rows;
    s.n_cols = blur.n_cols;
    s.d = d;
    s.m_rows = blur.n_rows / d;
    s.m_cols = blur.n_cols / d;

    const int m = s.coarse_pixels();
    s.blocks.assign(static_cast<std::size_t>(d) * d, VectorXcd(m));
    s.power_sum = VectorXd::Zero(m);
    s.fine_index.resize(static_cast<Eigen::Index>(d) * d * m);
    for (int tc = 0; tc < d; ++tc)
        for (int tr = 0; tr < d; ++tr) {
            const int t = tc * d + tr;
            VectorXcd& blk = s.blocks[t];
            for (int fc = 0; fc < s.m_cols; ++fc)
                for (int fr = 0; fr < s.m_rows; ++fr) {
                    const int fine = (fc + tc * s.m_cols) * s.n_rows + (fr + tr * s.m_rows);
                    blk[fc * s.m_rows + fr] = s.full[fine];
                    s.fine_index[static_cast<Eigen::Index>(t) * m + fc * s.m_rows + fr] = fine;
                }
            s.power_sum += blk.cwiseAbs2().real();
        }
    return s;
}

} // namespace fumi

#endif
