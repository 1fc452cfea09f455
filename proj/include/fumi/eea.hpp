#ifndef FUMI_EEA_HPP
#define FUMI_EEA_HPP

// Deterministic pure-pixel endmember initialization by successive orthogonal
// projection: take the pixel of largest norm, then repeatedly the pixel whose
// residual after projecting out the span of previous picks is largest. Ties
// go to the lowest pixel index, so the result is reproducible. Picked spectra
// are clipped to [0,1] to satisfy the endmember box constraint.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fumi/core.hpp"

namespace fumi {

inline MatrixXd initialize_endmembers(const SpectralImage& y_h, int p) {
    const MatrixXd& y = y_h.data;
    const int n = static_cast<int>(y.cols());
    if (p < 1) throw std::invalid_argument("initialize_endmembers: p must be >= 1");
    if (p > n)
        throw std::invalid_argument("initialize_endmembers: p = " + std::to_string(p) +
                                    " exceeds the " + std::to_string(n) + " available pixels");

    const double scale = y.cwiseAbs().maxCoeff();
    const double degenerate = 1e-10 * (1.0 + scale); // residual below this is span noise
    const double identical = 1e-12 * (1.0 + scale);  // entrywise duplicate threshold

    MatrixXd q(y.rows(), p); // orthonormal basis of the picked span
    std::vector<int> picks;
    picks.reserve(p);

    while (static_cast<int>(picks.size()) < p) {
        const int k = static_cast<int>(picks.size());
        int best_idx = -1;
        double best_norm = -1.0;
        VectorXd best_res;
        for (int j = 0; j < n; ++j) {
            VectorXd r = y.col(j);
            if (k > 0) r -= q.leftCols(k) * (q.leftCols(k).transpose() * r);
            const double rn = r.norm();
            if (rn > best_norm) {
                best_norm = rn;
                best_idx = j;
                best_res = std::move(r);
            }
        }
        if (best_norm > degenerate) {
            q.col(k) = best_res / best_norm;
            picks.push_back(best_idx);
            continue;
        }
        // Every pixel sits in the current span. Fall back to the first pixel
        // that is not a copy of an earlier pick so duplicates are never
        // selected twice; the basis is left as-is (nothing new to span).
        int fallback = -1;
        for (int j = 0; j < n && fallback < 0; ++j) {
            bool duplicate = false;
            for (int i : picks)
                if ((y.col(j) - y.col(i)).cwiseAbs().maxCoeff() <= identical) {
                    duplicate = true;
                    break;
                }
            if (!duplicate) fallback = j;
        }
        if (fallback < 0)
            throw std::runtime_error("initialize_endmembers: image has fewer than " +
                                     std::to_string(p) + " distinct pixel spectra");
        picks.push_back(fallback);
    }

    MatrixXd m(y.rows(), p);
    for (int k = 0; k < p; ++k) m.col(k) = y.col(picks[k]);
    return m.cwiseMax(0.0).cwiseMin(1.0);
}

} // namespace fumi

#endif
