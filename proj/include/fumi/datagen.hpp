#ifndef FUMI_DATAGEN_HPP
#define FUMI_DATAGEN_HPP

// Synthetic experiment construction: spectral libraries (loaded from CSV or
// generated as smooth random spectra), Dirichlet abundance fields, and the
// standard degradation pieces (band-partition responses, panchromatic
// averaging, Gaussian blur defaults).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fumi/blur.hpp"
#include "fumi/core.hpp"

namespace fumi {

struct SpectralLibrary {
    std::vector<std::string> names; // one per material column
    MatrixXd spectra;               // bands x materials, reflectance in [0, 1]
    VectorXd wavelengths;           // nm, strictly increasing

    int bands() const { return static_cast<int>(spectra.rows()); }
    int size() const { return static_cast<int>(spectra.cols()); }
};

inline void validate_library(const SpectralLibrary& lib) {
    if (lib.spectra.cols() != static_cast<Eigen::Index>(lib.names.size()))
        throw std::invalid_argument("spectral library: name count does not match spectra");
    if (lib.wavelengths.size() != lib.spectra.rows())
        throw std::invalid_argument("spectral library: wavelength count does not match bands");
    for (Eigen::Index i = 1; i < lib.wavelengths.size(); ++i)
        if (!(lib.wavelengths[i] > lib.wavelengths[i - 1]))
            throw std::invalid_argument("spectral library: wavelengths must be strictly "
                                        "increasing (row " + std::to_string(i + 1) + ")");
    for (Eigen::Index j = 0; j < lib.spectra.cols(); ++j)
        for (Eigen::Index i = 0; i < lib.spectra.rows(); ++i) {
            const double v = lib.spectra(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("spectral library: reflectance out of [0,1] at row " +
                                            std::to_string(i + 1) + ", material '" +
                                            lib.names[static_cast<std::size_t>(j)] + "'");
        }
}

struct SceneSpec {
    int n_rows = 0;
    int n_cols = 0;
    int p = 0;
    VectorXd dirichlet_alpha; // empty means symmetric alpha = 1
    std::uint64_t seed = 0;
};

// --- library I/O ------------------------------------------------------------
//
// CSV schema: a header "wavelength_nm,<name>,<name>,..." followed by one row
// per band: the wavelength then one reflectance per material.

inline SpectralLibrary load_library(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_library: cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_library: " + path + " is empty");

    SpectralLibrary lib;
    {
        std::stringstream header(line);
        std::string cell;
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (first) {
                first = false;
                continue; // wavelength column label
            }
            lib.names.push_back(cell);
        }
    }
    if (lib.names.empty())
        throw std::runtime_error("load_library: header has no material columns");

    std::vector<double> wl;
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::runtime_error("load_library: non-numeric cell '" + cell + "' at line " +
                                         std::to_string(line_no));
            }
            if (used != cell.size())
                throw std::runtime_error("load_library: trailing junk in cell '" + cell +
                                         "' at line " + std::to_string(line_no));
            vals.push_back(v);
        }
        if (vals.size() != lib.names.size() + 1)
            throw std::runtime_error("load_library: line " + std::to_string(line_no) + " has " +
                                     std::to_string(vals.size()) + " cells, expected " +
                                     std::to_string(lib.names.size() + 1));
        wl.push_back(vals[0]);
        rows.push_back(std::vector<double>(vals.begin() + 1, vals.end()));
    }
    if (rows.empty()) throw std::runtime_error("load_library: no data rows in " + path);

    const int bands = static_cast<int>(rows.size());
    const int mats = static_cast<int>(lib.names.size());
    lib.wavelengths.resize(bands);
    lib.spectra.resize(bands, mats);
    for (int i = 0; i < bands; ++i) {
        lib.wavelengths[i] = wl[static_cast<std::size_t>(i)];
        for (int j = 0; j < mats; ++j)
            lib.spectra(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    validate_library(lib);
    return lib;
}

inline void save_library(const SpectralLibrary& lib, const std::string& path) {
    validate_library(lib);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_library: cannot open " + path);
    out.precision(17);
    out << "wavelength_nm";
    for (const std::string& n : lib.names) out << ',' << n;
    out << '\n';
    for (int i = 0; i < lib.bands(); ++i) {
        out << lib.wavelengths[i];
        for (int j = 0; j < lib.size(); ++j) out << ',' << lib.spectra(i, j);
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_library: write failed for " + path);
}

// --- synthetic spectra ------------------------------------------------------

// Smooth random reflectance curves: each spectrum is a sum of a few positive
// Gaussian bumps at random positions and widths, rescaled into [0.05, 0.95].
// Wavelength axis spans 383-2508 nm regardless of the band count.
inline SpectralLibrary synth_library(int bands, int count, std::uint64_t seed) {
    if (bands < 2) throw std::invalid_argument("synth_library: need at least 2 bands");
    if (count < 1) throw std::invalid_argument("synth_library: need at least 1 spectrum");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n_bumps(2, 5);
    std::uniform_real_distribution<double> center(0.0, 1.0), width(0.03, 0.25), height(0.2, 1.0);

    SpectralLibrary lib;
    lib.spectra.resize(bands, count);
    lib.wavelengths.setLinSpaced(bands, 383.0, 2508.0);
    for (int j = 0; j < count; ++j) {
        lib.names.push_back("synth_" + std::to_string(j));
        VectorXd s = VectorXd::Zero(bands);
        const int nb = n_bumps(rng);
        for (int b = 0; b < nb; ++b) {
            const double c = center(rng), w = width(rng), h = height(rng);
            for (int i = 0; i < bands; ++i) {
                const double t = double(i) / double(bands - 1);
                s[i] += h * std::exp(-0.5 * (t - c) * (t - c) / (w * w));
            }
        }
        const double lo = s.minCoeff(), hi = s.maxCoeff();
        const double span = hi - lo;
        if (span > 0.0)
            s = ((s.array() - lo) / span * 0.9 + 0.05).cwiseMin(0.95).cwiseMax(0.05).matrix();
        else
            s.setConstant(0.5);
        lib.spectra.col(j) = s;
    }
    validate_library(lib);
    return lib;
}

// --- scenes -----------------------------------------------------------------

namespace detail {

// One Dirichlet(alpha) draw via normalized gamma variates.  The last
// coordinate is set to 1 minus the left-to-right partial sum of the others,
// so summing the column in index order returns exactly one: the subtraction
// is exact for prefixes in [0.5, 1] (Sterbenz) and otherwise off by at most
// 2^-54, which the final addition rounds back onto 1.0.
inline void dirichlet_column(std::mt19937_64& rng, const VectorXd& alpha,
                             Eigen::Ref<Eigen::VectorXd> out) {
    const int p = static_cast<int>(alpha.size());
    double total = 0.0;
    for (int i = 0; i < p; ++i) {
        std::gamma_distribution<double> g(alpha[i], 1.0);
        out[i] = g(rng);
        total += out[i];
    }
    if (!(total > 0.0) || !std::isfinite(total))
        out.setConstant(1.0 / p);
    else
        out /= total;
    if (p == 1) {
        out[0] = 1.0;
        return;
    }
    for (int attempt = 0; attempt < 4; ++attempt) {
        double prefix = 0.0;
        for (int i = 0; i < p - 1; ++i) prefix += out[i];
        const double rest = 1.0 - prefix;
        if (rest >= 0.0) {
            out[p - 1] = rest;
            return;
        }
        // Rounding pushed the prefix past one (needs the true last coordinate
        // to be ~1e-16); shave the excess off the largest coordinate and retry.
        int jmax = 0;
        out.head(p - 1).maxCoeff(&jmax);
        out[jmax] -= prefix - 1.0;
        out[p - 1] = 0.0;
    }
}

} // namespace detail

struct SceneData {
    MatrixXd M;      // bands x p reference endmembers
    MatrixXd A;      // p x pixels reference abundances
    SpectralImage x; // M * A with the scene's spatial shape
    std::vector<int> picks; // library columns used, in endmember order
};

inline SceneData sample_scene(const SceneSpec& spec, const SpectralLibrary& lib) {
    if (spec.n_rows <= 0 || spec.n_cols <= 0)
        throw std::invalid_argument("sample_scene: scene dimensions must be positive");
    if (spec.p <= 0) throw std::invalid_argument("sample_scene: p must be positive");
    if (spec.p > lib.size())
        throw std::invalid_argument("sample_scene: p = " + std::to_string(spec.p) +
                                    " exceeds library size " + std::to_string(lib.size()));
    VectorXd alpha = spec.dirichlet_alpha;
    if (alpha.size() == 0) alpha = VectorXd::Ones(spec.p);
    if (alpha.size() != spec.p)
        throw std::invalid_argument("sample_scene: dirichlet_alpha length must equal p");
    if (alpha.minCoeff() <= 0.0)
        throw std::invalid_argument("sample_scene: dirichlet_alpha entries must be positive");

    std::mt19937_64 rng(spec.seed);

    // Seeded draw without replacement from the library columns.
    std::vector<int> pool(static_cast<std::size_t>(lib.size()));
    std::iota(pool.begin(), pool.end(), 0);
    SceneData sc;
    for (int k = 0; k < spec.p; ++k) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
        const int at = pick(rng);
        sc.picks.push_back(pool[static_cast<std::size_t>(at)]);
        pool.erase(pool.begin() + at);
    }
    sc.M.resize(lib.bands(), spec.p);
    for (int k = 0; k < spec.p; ++k) sc.M.col(k) = lib.spectra.col(sc.picks[static_cast<std::size_t>(k)]);

    const int n = spec.n_rows * spec.n_cols;
    sc.A.resize(spec.p, n);
    for (int j = 0; j < n; ++j) detail::dirichlet_column(rng, alpha, sc.A.col(j));
    sc.x = mix(sc.M, sc.A, spec.n_rows, spec.n_cols);
    return sc;
}

// --- degradation pieces -----------------------------------------------------

// Contiguous boxcar windows partitioning the band axis into n_bands nearly
// equal pieces (the first bands % n_bands windows are one band wider).  Each
// row averages its window; with n_bands == bands this is the identity.
inline SpectralResponse landsat_like_response(int bands, int n_bands) {
    if (n_bands < 1 || n_bands > bands)
        throw std::invalid_argument("landsat_like_response: need 1 <= n_bands <= bands");
    MatrixXd w = MatrixXd::Zero(n_bands, bands);
    const int base = bands / n_bands, rem = bands % n_bands;
    int start = 0;
    for (int i = 0; i < n_bands; ++i) {
        const int len = base + (i < rem ? 1 : 0);
        const double v = 1.0 / len;
        double prefix = 0.0;
        for (int k = 0; k < len - 1; ++k) {
            w(i, start + k) = v;
            prefix += v;
        }
        // The last window entry closes the running sum, so adding the row up
        // left to right gives exactly one (prefix >= 1/2, Sterbenz).
        w(i, start + len - 1) = 1.0 - prefix;
        start += len;
    }
    return SpectralResponse(w);
}

// Single panchromatic band: the mean of the first n_avg bands.
inline SpectralResponse pan_response(int bands, int n_avg) {
    if (n_avg < 1 || n_avg > bands)
        throw std::invalid_argument("pan_response: need 1 <= n_avg <= bands");
    MatrixXd w = MatrixXd::Zero(1, bands);
    const double v = 1.0 / n_avg;
    double prefix = 0.0;
    for (int k = 0; k < n_avg - 1; ++k) {
        w(0, k) = v;
        prefix += v;
    }
    w(0, n_avg - 1) = 1.0 - prefix;
    return SpectralResponse(w);
}

inline BlurOperator default_blur(int n_rows, int n_cols, double sigma = 1.7, int size = 7) {
    return make_blur_operator(gaussian_kernel(sigma, size), n_rows, n_cols);
}

} // namespace fumi

#endif
