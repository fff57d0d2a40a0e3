#pragma once

#include <array>
#include <functional>

#include "magbloch/bands.hpp"

namespace magbloch {

// Matrix-valued function of the canonical phase-space point (k, r).
// Missing derivative evaluators fall back to central differences.
struct MatrixSymbol {
    using Fn = std::function<CMat(const Vec2& k, const Vec2& r)>;
    Fn value;
    std::array<Fn, 2> dk;
    std::array<Fn, 2> dr;
    bool self_adjoint = false;

    CMat eval(const Vec2& k, const Vec2& r) const { return value(k, r); }
    CMat deriv_k(int alpha, const Vec2& k, const Vec2& r) const;
    CMat deriv_r(int alpha, const Vec2& k, const Vec2& r) const;
};
constexpr double kSymbolStep = 1e-5;

// {A, B} = d_k A . d_r B - d_r A . d_k B.
CMat poisson_bracket_matrix(const MatrixSymbol& A, const MatrixSymbol& B, const Vec2& k, const Vec2& r);
// {A | B | C} = d_k A B d_r C - d_r A B d_k C.
CMat generalized_bracket(const MatrixSymbol& A, const MatrixSymbol& B, const MatrixSymbol& C, const Vec2& k,
                         const Vec2& r);

// Symbols of the field-increment problem: each depends on k through the kinetic
// momentum kappa = k + (1/2) b J r, plus V(r) where stated.
MatrixSymbol hofstadter_symbol(const FluxRational& flux, double b, const PotentialSpec& potential = {});
MatrixSymbol band_projection_symbol(const FluxRational& flux, int band, double b);
// e(kappa) + V(r), as a multiple of the identity.
MatrixSymbol band_energy_symbol(const FluxRational& flux, int band, double b, const PotentialSpec& potential = {});
// Constant or r-only symbols for tests.
MatrixSymbol scalar_symbol(const std::function<double(const Vec2& k, const Vec2& r)>& f, long dim);

// (i/2) pi {pi, pi} pi.
CMat pi1_diagonal(const FluxRational& flux, int band, double b, const Vec2& k, const Vec2& r);

// Order-eps coefficient of pi # (e + V + eps b M) # pi - pi # (H0 + V) # pi, where
// # is the Weyl product A # B = AB + (eps / 2i) {A, B} + O(eps^2).
// moment_scale multiplies M (1 for the true moment).
CMat hsc_defect_order1(const FluxRational& flux, int band, double b, const Vec2& k, const Vec2& r,
                       const PotentialSpec& potential = {}, double moment_scale = 1.0);

}  // namespace magbloch
