#include "magbloch/symbols.hpp"

#include "magbloch/classical.hpp"
#include "magbloch/errors.hpp"

namespace magbloch {

namespace {

const cplx kHalfOverI(0.0, -0.5);  // 1 / (2i)

Vec2 kinetic(const Vec2& k, const Vec2& r, double b) { return k + 0.5 * b * (rotation_j() * r); }

// d_r of a function of kappa, from its kappa-gradient.
std::array<CMat, 2> r_from_kappa(const std::array<CMat, 2>& dkappa, double b) {
    return {CMat(-0.5 * b * dkappa[1]), CMat(0.5 * b * dkappa[0])};
}

void add_potential_gradient(std::array<CMat, 2>& dr, const PotentialSpec& V, const Vec2& r) {
    const Vec2 g = V.gradient(r);
    for (int a = 0; a < 2; ++a) dr[a].diagonal().array() += g[a];
}

}  // namespace

CMat MatrixSymbol::deriv_k(int alpha, const Vec2& k, const Vec2& r) const {
    if (dk[alpha]) return dk[alpha](k, r);
    Vec2 e = Vec2::Zero();
    e[alpha] = kSymbolStep;
    return (value(k + e, r) - value(k - e, r)) / (2.0 * kSymbolStep);
}

CMat MatrixSymbol::deriv_r(int alpha, const Vec2& k, const Vec2& r) const {
    if (dr[alpha]) return dr[alpha](k, r);
    Vec2 e = Vec2::Zero();
    e[alpha] = kSymbolStep;
    return (value(k, r + e) - value(k, r - e)) / (2.0 * kSymbolStep);
}

CMat poisson_bracket_matrix(const MatrixSymbol& A, const MatrixSymbol& B, const Vec2& k, const Vec2& r) {
    CMat out;
    for (int a = 0; a < 2; ++a) {
        CMat t = A.deriv_k(a, k, r) * B.deriv_r(a, k, r) - A.deriv_r(a, k, r) * B.deriv_k(a, k, r);
        out = a == 0 ? t : CMat(out + t);
    }
    return out;
}

CMat generalized_bracket(const MatrixSymbol& A, const MatrixSymbol& B, const MatrixSymbol& C, const Vec2& k,
                         const Vec2& r) {
    const CMat mid = B.eval(k, r);
    CMat out;
    for (int a = 0; a < 2; ++a) {
        CMat t = A.deriv_k(a, k, r) * mid * C.deriv_r(a, k, r) - A.deriv_r(a, k, r) * mid * C.deriv_k(a, k, r);
        out = a == 0 ? t : CMat(out + t);
    }
    return out;
}

MatrixSymbol hofstadter_symbol(const FluxRational& flux, double b, const PotentialSpec& potential) {
    MatrixSymbol s;
    s.self_adjoint = true;
    s.value = [=](const Vec2& k, const Vec2& r) {
        CMat H = bloch_matrix(flux, kinetic(k, r, b));
        H.diagonal().array() += potential.value(r);
        return H;
    };
    for (int a = 0; a < 2; ++a) {
        s.dk[a] = [=](const Vec2& k, const Vec2& r) { return bloch_derivative(flux, kinetic(k, r, b), a); };
        s.dr[a] = [=](const Vec2& k, const Vec2& r) {
            const Vec2 kap = kinetic(k, r, b);
            auto d = r_from_kappa({bloch_derivative(flux, kap, 0), bloch_derivative(flux, kap, 1)}, b);
            add_potential_gradient(d, potential, r);
            return d[a];
        };
    }
    return s;
}

MatrixSymbol band_projection_symbol(const FluxRational& flux, int band, double b) {
    MatrixSymbol s;
    s.self_adjoint = true;
    s.value = [=](const Vec2& k, const Vec2& r) { return band_point(flux, band, kinetic(k, r, b)).projection; };
    for (int a = 0; a < 2; ++a) {
        s.dk[a] = [=](const Vec2& k, const Vec2& r) { return band_point(flux, band, kinetic(k, r, b)).dprojection[a]; };
        s.dr[a] = [=](const Vec2& k, const Vec2& r) {
            return r_from_kappa(band_point(flux, band, kinetic(k, r, b)).dprojection, b)[a];
        };
    }
    return s;
}

MatrixSymbol band_energy_symbol(const FluxRational& flux, int band, double b, const PotentialSpec& potential) {
    const long q = flux.q;
    MatrixSymbol s;
    s.self_adjoint = true;
    s.value = [=](const Vec2& k, const Vec2& r) {
        return CMat((band_point(flux, band, kinetic(k, r, b)).energy + potential.value(r)) * CMat::Identity(q, q));
    };
    for (int a = 0; a < 2; ++a) {
        s.dk[a] = [=](const Vec2& k, const Vec2& r) {
            return CMat(band_point(flux, band, kinetic(k, r, b)).velocity[a] * CMat::Identity(q, q));
        };
        s.dr[a] = [=](const Vec2& k, const Vec2& r) {
            const Vec2 v = band_point(flux, band, kinetic(k, r, b)).velocity;
            std::array<CMat, 2> dv{CMat(v[0] * CMat::Identity(q, q)), CMat(v[1] * CMat::Identity(q, q))};
            auto d = r_from_kappa(dv, b);
            add_potential_gradient(d, potential, r);
            return d[a];
        };
    }
    return s;
}

MatrixSymbol scalar_symbol(const std::function<double(const Vec2& k, const Vec2& r)>& f, long dim) {
    MatrixSymbol s;
    s.self_adjoint = true;
    s.value = [=](const Vec2& k, const Vec2& r) { return CMat(f(k, r) * CMat::Identity(dim, dim)); };
    return s;
}

CMat pi1_diagonal(const FluxRational& flux, int band, double b, const Vec2& k, const Vec2& r) {
    const MatrixSymbol P = band_projection_symbol(flux, band, b);
    const CMat p = P.eval(k, r);
    return cplx(0.0, 0.5) * p * poisson_bracket_matrix(P, P, k, r) * p;
}

CMat hsc_defect_order1(const FluxRational& flux, int band, double b, const Vec2& k, const Vec2& r,
                       const PotentialSpec& potential, double moment_scale) {
    const MatrixSymbol P = band_projection_symbol(flux, band, b);
    const MatrixSymbol H = hofstadter_symbol(flux, b, potential);
    const MatrixSymbol E = band_energy_symbol(flux, band, b, potential);
    const CMat p = P.eval(k, r);
    // the pi_1 corrections enter only through (H0 - e) pi = 0 and drop out at this order
    auto first_order = [&](const MatrixSymbol& X) {
        return CMat(kHalfOverI * (poisson_bracket_matrix(P, X, k, r) * p + p * poisson_bracket_matrix(X, P, k, r) +
                                  generalized_bracket(P, X, P, k, r)));
    };
    const Vec2 kap = kinetic(k, r, b);
    const double M = moment_scale * band_point(flux, band, kap).moment;
    return b * M * p + first_order(E) - first_order(H);
}

}  // namespace magbloch
