#ifndef FUMI_IO_HPP
#define FUMI_IO_HPP

// On-disk artifact formats.
//
//   *.bin   spectral cube: "FUMICUBE" magic, three little-endian int64
//           (bands, n_rows, n_cols), then bands*n_rows*n_cols float64 in
//           column-major pixel order (pixel j = col*n_rows + row).
//   *.csv   dense matrix, 17 significant digits (lossless round trip).
//   *.pgm   plain (P2) 8-bit grayscale, min-max scaled; the scale lives in
//           a "<name>.pgm.json" sidecar so the quantization is invertible.
//
// A scene bundle is a directory holding M.csv, A.bin, X.bin, YH.bin, YM.bin
// and meta.json with everything needed to rebuild the degradation model.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fumi/core.hpp"
#include "fumi/datagen.hpp"
#include "fumi/degrade.hpp"
#include "fumi/metrics.hpp"

static_assert(std::endian::native == std::endian::little,
              "cube files are little-endian; this platform is not");

namespace fumi {

using nlohmann::json;

// --- binary cubes -----------------------------------------------------------

inline void save_cube(const SpectralImage& x, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_cube: cannot open " + path);
    const char magic[8] = {'F', 'U', 'M', 'I', 'C', 'U', 'B', 'E'};
    out.write(magic, 8);
    const std::int64_t dims[3] = {x.data.rows(), x.n_rows, x.n_cols};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(x.data.data()),
              static_cast<std::streamsize>(sizeof(double)) * x.data.size());
    if (!out) throw std::runtime_error("save_cube: write failed for " + path);
}

inline SpectralImage load_cube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_cube: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "FUMICUBE")
        throw std::runtime_error("load_cube: " + path + " is not a cube file");
    std::int64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw std::runtime_error("load_cube: bad header in " + path);
    MatrixXd data(dims[0], dims[1] * dims[2]);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(sizeof(double)) * data.size());
    if (!in) throw std::runtime_error("load_cube: truncated data in " + path);
    return SpectralImage(std::move(data), static_cast<int>(dims[1]), static_cast<int>(dims[2]));
}

// --- CSV matrices -----------------------------------------------------------

inline void save_matrix_csv(const MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_matrix_csv: cannot open " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_matrix_csv: write failed for " + path);
}

inline MatrixXd load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_matrix_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("load_matrix_csv: bad cell '" + cell + "' at line " +
                                         std::to_string(line_no) + " of " + path);
            }
        }
        if (!rows.empty() && vals.size() != rows.front().size())
            throw std::runtime_error("load_matrix_csv: ragged row at line " +
                                     std::to_string(line_no) + " of " + path);
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error("load_matrix_csv: " + path + " is empty");
    MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

// --- PGM maps ---------------------------------------------------------------

// One spatial map (n_rows x n_cols values laid out like a SpectralImage row):
// min-max scaled to 0..255 and written as plain P2, with the scale recorded
// in <path>.json so tests can undo the quantization.
inline void save_pgm(const VectorXd& values, int n_rows, int n_cols, const std::string& path) {
    if (values.size() != static_cast<Eigen::Index>(n_rows) * n_cols)
        throw std::invalid_argument("save_pgm: value count does not match the map shape");
    const double lo = values.minCoeff(), hi = values.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_pgm: cannot open " + path);
    out << "P2\n" << n_cols << ' ' << n_rows << "\n255\n";
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            const double v = values[static_cast<Eigen::Index>(c) * n_rows + r];
            const int g = static_cast<int>(std::lround((v - lo) / span * 255.0));
            out << (c ? " " : "") << std::min(255, std::max(0, g));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_pgm: write failed for " + path);

    json side;
    side["min"] = lo;
    side["max"] = hi;
    std::ofstream sj(path + ".json");
    sj << side.dump(2) << '\n';
    if (!sj) throw std::runtime_error("save_pgm: sidecar write failed for " + path);
}

struct PgmImage {
    int n_rows = 0, n_cols = 0;
    Eigen::MatrixXi gray; // n_rows x n_cols
    double min = 0.0, max = 0.0;
};

inline PgmImage load_pgm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pgm: cannot open " + path);
    std::string tag;
    int w = 0, h = 0, maxval = 0;
    in >> tag >> w >> h >> maxval;
    if (!in || tag != "P2" || w < 1 || h < 1 || maxval != 255)
        throw std::runtime_error("load_pgm: " + path + " is not a plain 8-bit PGM");
    PgmImage img;
    img.n_rows = h;
    img.n_cols = w;
    img.gray.resize(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (!(in >> img.gray(r, c)))
                throw std::runtime_error("load_pgm: truncated pixel data in " + path);

    std::ifstream sj(path + ".json");
    if (sj) {
        json side = json::parse(sj);
        img.min = side.at("min").get<double>();
        img.max = side.at("max").get<double>();
    }
    return img;
}

// --- reports ----------------------------------------------------------------

inline json to_json(const FusionReport& r) {
    return json{{"rsnr_db", r.rsnr_db}, {"uiqi", r.uiqi},       {"sam_deg", r.sam_deg},
                {"ergas", r.ergas},     {"dd", r.dd},           {"wall_time_s", r.wall_time_s}};
}

inline json to_json(const UnmixReport& r) {
    return json{{"sam_M_deg", r.sam_M_deg},
                {"nmse_M_db", r.nmse_M_db},
                {"nmse_A_db", r.nmse_A_db},
                {"permutation", r.permutation}};
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_json: cannot open " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("save_json: write failed for " + path);
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_json: cannot open " + path);
    return json::parse(in);
}

// --- scene bundles ----------------------------------------------------------

// Everything a solver run needs to rebuild the degradation model.  The
// response is stored by kind + parameter ("landsat": band count, "pan":
// bands averaged, "identity": none) and the noise by per-band variances.
struct SceneMeta {
    int bands = 0, n_rows = 0, n_cols = 0, p = 0, d = 1;
    double blur_sigma = 1.7;
    int blur_size = 7;
    std::string response_kind = "landsat";
    int response_param = 7;
    double snr_h_db = 0.0, snr_m_db = 0.0; // 0 means noiseless
    std::uint64_t seed = 0;
    VectorXd var_h, var_m;
};

inline SpectralResponse build_response(const SceneMeta& meta) {
    if (meta.response_kind == "landsat")
        return landsat_like_response(meta.bands, meta.response_param);
    if (meta.response_kind == "pan") return pan_response(meta.bands, meta.response_param);
    if (meta.response_kind == "identity")
        return SpectralResponse(MatrixXd::Identity(meta.bands, meta.bands));
    throw std::invalid_argument("build_response: unknown response kind '" + meta.response_kind +
                                "'");
}

inline DegradationModel build_model(const SceneMeta& meta) {
    const MatrixXd kernel = meta.blur_sigma > 0.0 ? gaussian_kernel(meta.blur_sigma, meta.blur_size)
                                                  : delta_kernel();
    return make_degradation_model(make_blur_operator(kernel, meta.n_rows, meta.n_cols),
                                  Downsampler(meta.d), build_response(meta), BandNoise(meta.var_h),
                                  BandNoise(meta.var_m));
}

inline json to_json(const SceneMeta& m) {
    json j;
    j["bands"] = m.bands;
    j["n_rows"] = m.n_rows;
    j["n_cols"] = m.n_cols;
    j["p"] = m.p;
    j["d"] = m.d;
    j["blur_sigma"] = m.blur_sigma;
    j["blur_size"] = m.blur_size;
    j["response_kind"] = m.response_kind;
    j["response_param"] = m.response_param;
    j["snr_h_db"] = m.snr_h_db;
    j["snr_m_db"] = m.snr_m_db;
    j["seed"] = m.seed;
    j["var_h"] = std::vector<double>(m.var_h.data(), m.var_h.data() + m.var_h.size());
    j["var_m"] = std::vector<double>(m.var_m.data(), m.var_m.data() + m.var_m.size());
    return j;
}

inline SceneMeta scene_meta_from_json(const json& j) {
    SceneMeta m;
    m.bands = j.at("bands").get<int>();
    m.n_rows = j.at("n_rows").get<int>();
    m.n_cols = j.at("n_cols").get<int>();
    m.p = j.at("p").get<int>();
    m.d = j.at("d").get<int>();
    m.blur_sigma = j.at("blur_sigma").get<double>();
    m.blur_size = j.at("blur_size").get<int>();
    m.response_kind = j.at("response_kind").get<std::string>();
    m.response_param = j.at("response_param").get<int>();
    m.snr_h_db = j.at("snr_h_db").get<double>();
    m.snr_m_db = j.at("snr_m_db").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto vh = j.at("var_h").get<std::vector<double>>();
    const auto vm = j.at("var_m").get<std::vector<double>>();
    m.var_h = Eigen::Map<const VectorXd>(vh.data(), static_cast<Eigen::Index>(vh.size()));
    m.var_m = Eigen::Map<const VectorXd>(vm.data(), static_cast<Eigen::Index>(vm.size()));
    return m;
}

struct SceneBundle {
    SceneMeta meta;
    MatrixXd M;        // reference endmembers
    SpectralImage A;   // reference abundances stored as a p-band cube
    SpectralImage X;   // reference scene
    SpectralImage y_h; // degraded observations
    SpectralImage y_m;
};

inline void save_scene_bundle(const SceneBundle& b, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);
    save_matrix_csv(b.M, (root / "M.csv").string());
    save_cube(b.A, (root / "A.bin").string());
    save_cube(b.X, (root / "X.bin").string());
    save_cube(b.y_h, (root / "YH.bin").string());
    save_cube(b.y_m, (root / "YM.bin").string());
    save_json(to_json(b.meta), (root / "meta.json").string());
}

inline SceneBundle load_scene_bundle(const std::string& dir) {
    const std::filesystem::path root(dir);
    SceneBundle b;
    b.meta = scene_meta_from_json(load_json((root / "meta.json").string()));
    b.M = load_matrix_csv((root / "M.csv").string());
    b.A = load_cube((root / "A.bin").string());
    b.X = load_cube((root / "X.bin").string());
    b.y_h = load_cube((root / "YH.bin").string());
    b.y_m = load_cube((root / "YM.bin").string());
    if (b.X.n_rows != b.meta.n_rows || b.X.n_cols != b.meta.n_cols)
        throw std::runtime_error("load_scene_bundle: X.bin shape disagrees with meta.json");
    if (b.M.cols() != b.meta.p || b.A.bands() != b.meta.p)
        throw std::runtime_error("load_scene_bundle: endmember count disagrees with meta.json");
    return b;
}

} // namespace fumi

#endif
