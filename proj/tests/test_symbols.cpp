#include <cmath>

#include "doctest.h"
#include "magbloch/bands.hpp"
#include "magbloch/classical.hpp"
#include "magbloch/symbols.hpp"
#include "test_util.hpp"

using namespace magbloch;
using testutil::max_abs;

namespace {

const FluxRational kThird = FluxRational::make(1, 3);

Vec2 rand2(double s = 2.0) { return Vec2(testutil::uniform(-s, s), testutil::uniform(-s, s)); }

// Hermitian matrix symbol with smooth random coefficients; derivatives by the finite-difference fallback.
MatrixSymbol random_symbol(int n) {
    CMat a = CMat::Random(n, n), b = CMat::Random(n, n), c = CMat::Random(n, n);
    a = a + a.adjoint().eval();
    b = b + b.adjoint().eval();
    c = c + c.adjoint().eval();
    const Vec2 w1 = rand2(), w2 = rand2();
    MatrixSymbol s;
    s.self_adjoint = true;
    s.value = [=](const Vec2& k, const Vec2& r) {
        return CMat(a * std::cos(w1.dot(k) + r[0]) + b * std::sin(w2.dot(r) - k[1]) + c * (k[0] * r[1]));
    };
    return s;
}

}  // namespace

TEST_CASE("Poisson bracket basics") {
    MatrixSymbol s = scalar_symbol([](const Vec2& k, const Vec2& r) { return std::sin(k[0]) * r[1] + k[1] * r[0]; }, 3);
    MatrixSymbol t = scalar_symbol([](const Vec2& k, const Vec2& r) { return std::cos(k[1] - r[0]); }, 3);
    for (int i = 0; i < 10; ++i) {
        Vec2 k = rand2(), r = rand2();
        CHECK(max_abs(poisson_bracket_matrix(s, s, k, r)) < 1e-12);
        CHECK(max_abs(poisson_bracket_matrix(s, t, k, r) + poisson_bracket_matrix(t, s, k, r)) < 1e-9);
    }
    MatrixSymbol kr = scalar_symbol([](const Vec2& k, const Vec2&) { return k[0]; }, 1);
    MatrixSymbol rr = scalar_symbol([](const Vec2&, const Vec2& r) { return r[0]; }, 1);
    CHECK(std::abs(poisson_bracket_matrix(kr, rr, Vec2(0, 0), Vec2(0, 0))(0, 0) - 1.0) < 1e-9);
}

TEST_CASE("trace of {A, A} vanishes") {
    for (int i = 0; i < 10; ++i) {
        MatrixSymbol a = random_symbol(4);
        Vec2 k = rand2(), r = rand2();
        CHECK(std::abs(poisson_bracket_matrix(a, a, k, r).trace()) < 1e-8);
    }
    MatrixSymbol P = band_projection_symbol(kThird, 0, 1.0);
    CHECK(std::abs(poisson_bracket_matrix(P, P, rand2(), rand2()).trace()) < 1e-12);
}

TEST_CASE("analytic symbol derivatives match finite differences") {
    MatrixSymbol H = hofstadter_symbol(kThird, 0.8, PotentialSpec::cosine(0.3, 1, -1, 0.2));
    MatrixSymbol P = band_projection_symbol(kThird, 1, 0.8);
    MatrixSymbol E = band_energy_symbol(kThird, 1, 0.8, PotentialSpec::cosine(0.3, 1, -1, 0.2));
    for (const MatrixSymbol* s : {&H, &P, &E}) {
        MatrixSymbol fd;
        fd.value = s->value;
        Vec2 k = rand2(), r = rand2();
        for (int a = 0; a < 2; ++a) {
            CHECK(max_abs(s->deriv_k(a, k, r) - fd.deriv_k(a, k, r)) < 1e-8);
            CHECK(max_abs(s->deriv_r(a, k, r) - fd.deriv_r(a, k, r)) < 1e-8);
        }
    }
}

TEST_CASE("curvature from the projection bracket") {
    const double b = 0.7;
    MatrixSymbol P = band_projection_symbol(kThird, 0, b);
    for (int i = 0; i < 10; ++i) {
        Vec2 k = rand2(), r = rand2();
        const CMat p = P.eval(k, r);
        const cplx t = (p * poisson_bracket_matrix(P, P, k, r)).trace();
        const Vec2 kappa = k + 0.5 * b * (rotation_j() * r);
        CHECK(std::abs(t.real()) < 1e-12);
        CHECK(std::abs(cplx(0, 1) * t - b * berry_curvature(kThird, 0, kappa)) < 1e-10);
    }
}

TEST_CASE("generalized bracket") {
    MatrixSymbol a = random_symbol(3), c = random_symbol(3);
    MatrixSymbol id = scalar_symbol([](const Vec2&, const Vec2&) { return 1.0; }, 3);
    MatrixSymbol konst = scalar_symbol([](const Vec2&, const Vec2&) { return 2.5; }, 3);
    Vec2 k = rand2(), r = rand2();
    CHECK(max_abs(generalized_bracket(a, id, c, k, r) - poisson_bracket_matrix(a, c, k, r)) < 1e-12);
    CHECK(max_abs(generalized_bracket(konst, a, konst, k, r)) < 1e-12);

    for (double b : {1.0, 0.7}) {
        MatrixSymbol P = band_projection_symbol(kThird, 1, b);
        MatrixSymbol H = hofstadter_symbol(kThird, b);
        for (int i = 0; i < 10; ++i) {
            Vec2 k2 = rand2(), r2 = rand2();
            const Vec2 kappa = k2 + 0.5 * b * (rotation_j() * r2);
            const cplx m = cplx(0, 0.5) * generalized_bracket(P, H, P, k2, r2).trace();
            CHECK(std::abs(m - b * magnetic_moment(kThird, 1, kappa)) < 1e-8);
        }
    }
}

TEST_CASE("first-order diagonal block of the projection") {
    CHECK(max_abs(pi1_diagonal(FluxRational::make(0, 1), 0, 1.0, Vec2(0.3, 0.1), Vec2(1, 2))) < 1e-15);
    const double b = 1.0, eps = 0.05;
    for (int i = 0; i < 10; ++i) {
        Vec2 k = rand2(), r = rand2();
        for (int j = 0; j < 3; ++j) {
            CMat p1 = pi1_diagonal(kThird, j, b, k, r);
            CHECK(max_abs(p1 - p1.adjoint()) < 1e-12);
            Eigen::JacobiSVD<CMat> svd(p1);
            CHECK(svd.singularValues()[1] < 1e-12);
            const Vec2 kappa = k + 0.5 * b * (rotation_j() * r);
            ClassicalSystem sys(kThird, j, eps, b);
            const double nu = sys.liouville_density(kappa);
            CHECK(std::abs(p1.trace().real() - (nu - 1.0) / (2.0 * eps)) < 1e-8);
        }
    }
}

TEST_CASE("first-order defect cancels") {
    const PotentialSpec v = PotentialSpec::cosine(0.4, 1, 0, 0.3) + PotentialSpec::cosine(0.2, 1, 1, 0.0);
    double worst = 0.0, mutated = 0.0;
    for (int i = 0; i < 50; ++i) {
        Vec2 k = rand2(4.0), r = rand2();
        worst = std::max(worst, max_abs(hsc_defect_order1(kThird, 0, 1.0, k, r, v)));
        mutated = std::max(mutated, max_abs(hsc_defect_order1(kThird, 0, 1.0, k, r, v, 1.1)));
    }
    CHECK(worst <= 1e-8);
    CHECK(mutated > 1e-3);
    CHECK(max_abs(hsc_defect_order1(FluxRational::make(0, 1), 0, 1.0, Vec2(0.2, 0.9), Vec2(0.4, -1.0), v)) < 1e-14);
    for (int j = 0; j < 5; ++j)
        CHECK(max_abs(hsc_defect_order1(FluxRational::make(2, 5), j, -0.6, rand2(4.0), rand2())) <= 1e-8);
}

TEST_CASE("calculus is equivariant under dual-lattice shifts") {
    const Vec2 g(2 * M_PI / 3, 0);
    for (int i = 0; i < 5; ++i) {
        Vec2 k = rand2(), r = rand2();
        CHECK(std::abs(pi1_diagonal(kThird, 1, 1.0, k, r).trace() - pi1_diagonal(kThird, 1, 1.0, k + g, r).trace()) < 1e-10);
        const CMat t = tau(kThird, g);
        CMat a = pi1_diagonal(kThird, 1, 1.0, k + g, r);
        CMat b = t.adjoint() * pi1_diagonal(kThird, 1, 1.0, k, r) * t;
        CHECK(max_abs(a - b) < 1e-10);
    }
}
