#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fumi/sylvester.hpp"
#include "oracles.hpp"

using namespace fumi;

namespace {

struct AbundanceCase {
    AbundanceSylvesterSystem sys;
    MatrixXd c1_dense;
    MatrixXd c2_dense;
};

AbundanceCase random_abundance_case(std::mt19937_64& rng, int p, int nr, int nc, int d,
                                    const MatrixXd& kernel) {
    BlurOperator blur = make_blur_operator(kernel, nr, nc);
    MatrixXd k = oracle::random_spd(rng, p, 1.5);
    MatrixXd n = oracle::random_spd(rng, p, 1.5);
    MatrixXd c3 = oracle::random_matrix(rng, p, nr * nc);
    AbundanceCase out{make_abundance_system(k, n, c3, circulant_spectrum(blur, d)),
                      k.llt().solve(n), oracle::dense_c2_matrix(kernel, nr, nc, d)};
    return out;
}

double rel_err(const MatrixXd& got, const MatrixXd& want) {
    return (got - want).norm() / want.norm();
}

} // namespace

TEST_CASE("frequency-domain abundance solve matches the dense reference", "[sylvester]") {
    std::mt19937_64 rng(41);
    const MatrixXd gauss = gaussian_kernel(1.2, 5);
    for (auto [p, nr, nc, d] : {std::tuple{3, 8, 8, 2}, std::tuple{2, 12, 8, 2},
                                std::tuple{4, 6, 6, 1}, std::tuple{3, 9, 9, 3}}) {
        AbundanceCase c = random_abundance_case(rng, p, nr, nc, d, gauss);
        MatrixXd a = solve_abundance_sylvester(c.sys);
        MatrixXd ref = kron_solve(c.c1_dense, c.c2_dense, c.sys.C3);
        INFO("p=" << p << " grid=" << nr << "x" << nc << " d=" << d);
        REQUIRE(rel_err(a, ref) < 1e-8);
        REQUIRE((c.c1_dense * a + a * c.c2_dense - c.sys.C3).norm() / c.sys.C3.norm() < 1e-9);
    }
}

TEST_CASE("abundance solve handles asymmetric kernels", "[sylvester]") {
    // an asymmetric kernel makes conj(D) != D, so this pins the side of the
    // normal operator each factor acts on
    std::mt19937_64 rng(42);
    MatrixXd kernel(3, 3);
    kernel << 0.30, 0.10, 0.05,
              0.15, 0.20, 0.02,
              0.08, 0.06, 0.04;
    AbundanceCase c = random_abundance_case(rng, 3, 8, 8, 2, kernel);
    MatrixXd a = solve_abundance_sylvester(c.sys);
    REQUIRE(rel_err(a, kron_solve(c.c1_dense, c.c2_dense, c.sys.C3)) < 1e-8);
}

TEST_CASE("general-matrix construction agrees with the factored one", "[sylvester]") {
    std::mt19937_64 rng(43);
    const MatrixXd kernel = gaussian_kernel(1.5, 5);
    BlurOperator blur = make_blur_operator(kernel, 8, 8);
    MatrixXd k = oracle::random_spd(rng, 3, 1.0);
    MatrixXd n = oracle::random_spd(rng, 3, 1.0);
    MatrixXd c3 = oracle::random_matrix(rng, 3, 64);

    auto factored = make_abundance_system(k, n, c3, circulant_spectrum(blur, 2));
    auto general = make_abundance_system_general(k.llt().solve(n), c3, circulant_spectrum(blur, 2));
    REQUIRE(rel_err(solve_abundance_sylvester(general), solve_abundance_sylvester(factored)) <
            1e-9);
}

TEST_CASE("endmember solve matches the dense reference", "[sylvester]") {
    std::mt19937_64 rng(44);
    for (auto [mb, p, nl] : {std::tuple{12, 5, 3}, std::tuple{8, 3, 1}, std::tuple{10, 4, 4}}) {
        // H1 = SPD * PSD with rank nl <= mb, as produced by a wide response
        MatrixXd lam = oracle::random_spd(rng, mb, 1.0);
        MatrixXd w = oracle::random_matrix(rng, nl, mb);
        MatrixXd g = w.transpose() * w;
        MatrixXd h1 = lam * g;

        MatrixXd h2n = oracle::random_spd(rng, p, 1.0);
        MatrixXd h2k = oracle::random_spd(rng, p, 1.0);
        MatrixXd h2 = h2n * h2k.inverse();
        MatrixXd h3 = oracle::random_matrix(rng, mb, p);

        EndmemberSylvesterSystem sys;
        sys.e1 = eig_spd_times_psd(lam, g);
        sys.e2 = eig_times_spd_inv(h2n, h2k);
        sys.H1 = h1;
        sys.H2 = h2;
        sys.H3 = h3;

        MatrixXd m = solve_endmember_sylvester(sys);
        INFO("bands=" << mb << " p=" << p << " rank=" << nl);
        REQUIRE((h1 * m + m * h2 - h3).norm() / h3.norm() < 1e-9);
        REQUIRE(rel_err(m, kron_solve(h1, h2, h3)) < 1e-8);

        // the two eigendecomposition routes agree
        EndmemberSylvesterSystem gen = make_endmember_system_general(h1, h2, h3);
        REQUIRE(rel_err(solve_endmember_sylvester(gen), m) < 1e-8);
    }
}

TEST_CASE("SPD-product spectra are real and correctly signed", "[sylvester][eigen]") {
    std::mt19937_64 rng(45);
    MatrixXd lam = oracle::random_spd(rng, 9, 2.0);
    MatrixXd w = oracle::random_matrix(rng, 4, 9);
    MatrixXd g = w.transpose() * w;

    EigenPair e = eig_spd_times_psd(lam, g);
    REQUIRE(e.values.minCoeff() > -1e-12);
    REQUIRE((e.values.array() > 1e-12).count() == 4); // rank of G
    REQUIRE((e.V * e.values.asDiagonal() * e.V_inv - lam * g).cwiseAbs().maxCoeff() < 1e-9);

    MatrixXd k = oracle::random_spd(rng, 5, 2.0);
    MatrixXd n = oracle::random_spd(rng, 5, 2.0);
    EigenPair q = eig_spd_inv_times(k, n);
    REQUIRE(q.values.minCoeff() > 0.0);
    REQUIRE((q.V * q.values.asDiagonal() * q.V_inv - k.inverse() * n).cwiseAbs().maxCoeff() <
            1e-9);

    EigenPair r = eig_times_spd_inv(n, k);
    REQUIRE(r.values.minCoeff() > 0.0);
    REQUIRE((r.V * r.values.asDiagonal() * r.V_inv - n * k.inverse()).cwiseAbs().maxCoeff() <
            1e-9);
}

TEST_CASE("materially complex spectra are rejected, not silently truncated", "[sylvester][eigen]") {
    MatrixXd rot(2, 2);
    rot << 0.0, -1.0, 1.0, 0.0; // eigenvalues +/- i
    REQUIRE_THROWS_AS(eig_real_spectrum(rot), std::runtime_error);
}

TEST_CASE("singular eigenvalue sums are refused", "[sylvester]") {
    EigenPair e1, e2;
    e1.V = e1.V_inv = MatrixXd::Identity(2, 2);
    e2.V = e2.V_inv = MatrixXd::Identity(2, 2);
    e1.values = VectorXd::Zero(2);
    e2.values = VectorXd::Zero(2);
    REQUIRE_THROWS_AS(sylvester_eig_solve(e1, e2, MatrixXd::Ones(2, 2)), std::runtime_error);
}

TEST_CASE("the dense reference solver enforces its size budget", "[sylvester]") {
    REQUIRE_THROWS_AS(kron_solve(MatrixXd::Identity(5, 5), MatrixXd::Identity(1000, 1000),
                                 MatrixXd::Zero(5, 1000)),
                      std::invalid_argument);
    // and solves a trivial pinned case: P = I, Q = I => X = C / 2
    MatrixXd c = MatrixXd::Constant(2, 3, 4.0);
    REQUIRE((kron_solve(MatrixXd::Identity(2, 2), MatrixXd::Identity(3, 3), c) - c / 2.0)
                .cwiseAbs()
                .maxCoeff() < 1e-14);
}
