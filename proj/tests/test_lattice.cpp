#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "magbloch/bands.hpp"
#include "magbloch/errors.hpp"
#include "magbloch/lattice.hpp"
#include "magbloch/quantum.hpp"
#include "test_util.hpp"

using namespace magbloch;
using testutil::max_abs;

TEST_CASE("flux parsing and canonical form") {
    CHECK(parse_flux("1/3") == FluxRational::make(1, 3));
    CHECK(parse_flux("4/6") == FluxRational::make(2, 3));
    CHECK(parse_flux("-1/3") == FluxRational::make(2, 3));
    CHECK(parse_flux("0") == FluxRational::make(0, 1));
    CHECK(FluxRational::make(7, 5).str() == "2/5");
    CHECK_THROWS_AS(parse_flux("1/0"), ConfigError);
    CHECK_THROWS_AS(parse_flux("x"), ConfigError);
    CHECK(snap_flux(2 * M_PI / 3, 10) == FluxRational::make(1, 3));
    CHECK_THROWS_AS(snap_flux(2 * M_PI * 0.1234567, 5), ConfigError);
}

TEST_CASE("bloch matrix closed forms") {
    CMat h = bloch_matrix(FluxRational::make(0, 1), Vec2(0, 0));
    REQUIRE(h.rows() == 1);
    CHECK(h(0, 0).real() == doctest::Approx(4.0));

    for (int i = 0; i < 5; ++i) {
        Vec2 k = testutil::random_k();
        CHECK(std::abs(bloch_matrix(FluxRational::make(1, 3), k).trace()) < 1e-14);
        CMat s = bloch_matrix(FluxRational::make(0, 1), k);
        CHECK(s(0, 0).real() == doctest::Approx(2 * std::cos(k[0]) + 2 * std::cos(k[1])));
    }

    Eigen::SelfAdjointEigenSolver<CMat> es(bloch_matrix(FluxRational::make(1, 2), Vec2(M_PI / 2, M_PI / 2)));
    CHECK(std::abs(es.eigenvalues()[0]) < 1e-14);
    CHECK(std::abs(es.eigenvalues()[1]) < 1e-14);
}

TEST_CASE("bloch matrix is Hermitian and its derivative matches finite differences") {
    for (auto flux : {FluxRational::make(1, 3), FluxRational::make(2, 5), FluxRational::make(1, 2)}) {
        for (int i = 0; i < 10; ++i) {
            Vec2 k = testutil::random_k();
            CMat h = bloch_matrix(flux, k);
            CHECK(max_abs(h - h.adjoint()) == 0.0);
            for (int a = 0; a < 2; ++a) {
                Vec2 d = Vec2::Zero();
                d[a] = 1e-6;
                CMat fd = (bloch_matrix(flux, k + d) - bloch_matrix(flux, k - d)) / 2e-6;
                CHECK(max_abs(fd - bloch_derivative(flux, k, a)) < 1e-8);
            }
        }
    }
}

TEST_CASE("tau equivariance") {
    auto f3 = FluxRational::make(1, 3);
    CHECK(tau_equivariance_residual(f3, Vec2(0.3, 0.7), Vec2(2 * M_PI / 3, 0)) < 1e-12);
    CHECK(tau_equivariance_residual(f3, testutil::random_k(), Vec2(0, 2 * M_PI)) < 1e-12);
    auto f5 = FluxRational::make(2, 5);
    CHECK(tau_equivariance_residual(f5, testutil::random_k(), Vec2(4 * M_PI / 5, 2 * M_PI)) < 1e-12);
    CHECK_THROWS_AS(tau_equivariance_residual(f3, Vec2(0, 0), Vec2(0.5, 0)), ConfigError);
}

TEST_CASE("eigenvalues are periodic on the reduced torus") {
    for (auto flux : {FluxRational::make(1, 3), FluxRational::make(2, 5)}) {
        const double h = 2 * M_PI / flux.q;
        for (int i = 0; i < 10; ++i) {
            Vec2 k = testutil::random_k();
            Eigen::SelfAdjointEigenSolver<CMat> a(bloch_matrix(flux, k), Eigen::EigenvaluesOnly);
            Eigen::SelfAdjointEigenSolver<CMat> b(bloch_matrix(flux, k + Vec2(h, 0)), Eigen::EigenvaluesOnly);
            Eigen::SelfAdjointEigenSolver<CMat> c(bloch_matrix(flux, k + Vec2(0, h)), Eigen::EigenvaluesOnly);
            CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((a.eigenvalues() - c.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("zero-field torus spectrum is the band on the discrete grid") {
    FiniteLattice lat;
    lat.L1 = lat.L2 = 3;
    lat.B = 0.0;
    Eigen::VectorXd w = exact_spectrum(lat);
    std::vector<double> expect;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) expect.push_back(2 * std::cos(2 * M_PI * a / 3) + 2 * std::cos(2 * M_PI * b / 3));
    std::sort(expect.begin(), expect.end());
    REQUIRE(w.size() == 9);
    for (int i = 0; i < 9; ++i) CHECK(w[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("torus spectrum at rational flux lies in the Bloch bands") {
    auto flux = FluxRational::make(1, 3);
    FiniteLattice lat;
    lat.L1 = lat.L2 = 6;
    lat.B = flux.B0();
    Eigen::VectorXd w = exact_spectrum(lat);
    CHECK(w.size() == 36);
    std::vector<double> lo(3), hi(3);
    for (int j = 0; j < 3; ++j) {
        BandData d = band_data(flux, j, 48);
        lo[j] = *std::min_element(d.energy.begin(), d.energy.end());
        hi[j] = *std::max_element(d.energy.begin(), d.energy.end());
    }
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        bool inside = false;
        for (int j = 0; j < 3; ++j) inside = inside || (w[i] >= lo[j] - 1e-8 && w[i] <= hi[j] + 1e-8);
        CHECK(inside);
    }
}

TEST_CASE("finite Hamiltonian is Hermitian for torus and box") {
    FiniteLattice t;
    t.L1 = 6;
    t.L2 = 9;
    t.B = 2 * M_PI * 2 / 27;
    CMat h = finite_hamiltonian_dense(t);
    CHECK(max_abs(h - h.adjoint()) < 1e-15);

    FiniteLattice box;
    box.boundary = Boundary::open_box;
    box.L1 = 7;
    box.L2 = 5;
    box.B = 0.37;
    box.epsilon = 0.1;
    box.origin1 = -3;
    box.origin2 = 4;
    box.potential = PotentialSpec::cosine(0.3, 1, 2, 0.1);
    box.potential.field = Vec2(0.2, -0.1);
    CMat hb = finite_hamiltonian_dense(box);
    CHECK(max_abs(hb - hb.adjoint()) < 1e-15);
    CHECK(hb(0, 0).real() == doctest::Approx(box.potential.value(Vec2(-0.3, 0.4))));
}

TEST_CASE("walk counting on the torus") {
    FiniteLattice lat;
    lat.L1 = lat.L2 = 6;
    lat.B = 2 * M_PI / 3;
    CMat h = finite_hamiltonian_dense(lat);
    CHECK(std::abs(h.trace()) < 1e-14);
    CHECK(std::abs((h * h).trace() / 36.0 - 4.0) < 1e-12);
}

TEST_CASE("lattice admissibility") {
    FiniteLattice lat;
    lat.L1 = lat.L2 = 5;
    lat.B = 2 * M_PI / 3;
    CHECK_THROWS_AS(lat.validate(), AdmissibilityError);
    lat.L1 = lat.L2 = 6;
    lat.potential = PotentialSpec::cosine(0.1, 1, 0, 0.0);
    lat.epsilon = 0.3;
    CHECK_THROWS_AS(lat.validate(), AdmissibilityError);
    lat.epsilon = 2 * M_PI / 6;
    CHECK_NOTHROW(lat.validate());
    lat.L1 = 0;
    CHECK_THROWS_AS(lat.validate(), ConfigError);
}

TEST_CASE("dual magnetic translations commute with H") {
    FiniteLattice lat;
    lat.L1 = lat.L2 = 6;
    lat.B = 2 * M_PI / 3;
    CHECK(dual_translation_residual(lat) < 1e-12);
    SpMat H = finite_hamiltonian(lat);
    SpMat T = dual_translation(lat, 3, 0);
    CHECK(CMat(H * T - T * H).cwiseAbs().maxCoeff() < 1e-12);
    lat.L1 = lat.L2 = 5;
    CHECK_THROWS(dual_translation_residual(lat));
}

TEST_CASE("potential specs") {
    PotentialSpec v = PotentialSpec::cosine(0.5, 1, -2, 0.3);
    Vec2 x(0.7, -1.1);
    CHECK(v.value(x) == doctest::Approx(0.5 * std::cos(x[0] - 2 * x[1] + 0.3)));
    Vec2 g = v.gradient(x);
    CHECK(g[0] == doctest::Approx(-0.5 * std::sin(x[0] - 2 * x[1] + 0.3)));
    CHECK(g[1] == doctest::Approx(1.0 * std::sin(x[0] - 2 * x[1] + 0.3)));
    CHECK(v.mirrored().value(Vec2(-x[0], x[1])) == doctest::Approx(v.value(x)));
    PotentialSpec bad;
    bad.bulk.push_back({1, 0, cplx(1.0, 0.0)});
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
