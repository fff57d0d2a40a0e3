#pragma once

#include "magbloch/bands.hpp"
#include "magbloch/fourier.hpp"

namespace magbloch {

// Phase-space point z = (r1, r2, kappa1, kappa2), kappa = k + (1/2) b J r.
inline Vec2 position(const Vec4& z) { return z.head<2>(); }
inline Vec2 kinetic_momentum(const Vec4& z) { return z.tail<2>(); }

// J = [[0, 1], [-1, 0]].
Mat2 rotation_j();

// [[-b J, I], [-I, eps Omega J]]; throws DegenerateFormError when 1 + eps b Omega <= 0.
Mat4 symplectic_matrix(double epsilon, double b, double curvature);
// a12 a34 - a13 a24 + a14 a23.
double pfaffian(const Mat4& a);

enum class FieldMode { exact, truncated };
FieldMode parse_field_mode(const std::string& name);

constexpr double kDensityFloor = 0.1;
constexpr int kDefaultInterpolationGrid = 64;

struct ClassicalOptions {
    int grid = kDefaultInterpolationGrid;
    // false drops Omega and M (leading-order band dynamics).
    bool corrections = true;
    double interpolation_tol = 1e-8;
    // Fourier coefficients below this fraction of the largest are dropped.
    double coefficient_cutoff = 1e-15;
};

// Single-band system (h, omega_eps) with h = e(kappa) + V(r) + eps b M(kappa).
// Immutable after construction.
class ClassicalSystem {
public:
    ClassicalSystem(const FluxRational& flux, int band, double epsilon, double b, PotentialSpec potential = {},
                    ClassicalOptions opts = {});

    const FluxRational& flux() const { return flux_; }
    int band() const { return band_; }
    double epsilon() const { return epsilon_; }
    double b() const { return b_; }
    const PotentialSpec& potential() const { return potential_; }
    bool corrections() const { return corrections_; }

    double energy(const Vec2& kappa) const;
    double curvature(const Vec2& kappa) const;
    double moment(const Vec2& kappa) const;
    // Smallest 1 + eps b Omega over the interpolation grid.
    double min_density() const { return min_density_; }

    double h(const Vec4& z) const;
    Vec4 grad_h(const Vec4& z) const;
    Mat4 symplectic_form(const Vec4& z) const;
    double liouville_density(const Vec2& kappa) const;
    Vec4 vector_field(const Vec4& z, FieldMode mode = FieldMode::exact) const;
    // grad_f^T omega^{-1} grad_g with the exact inverse.
    double poisson_bracket(const Vec4& grad_f, const Vec4& grad_g, const Vec4& z) const;
    // Max cyclic sum of central differences of the form written in (r, k) coordinates.
    double closedness_residual(const Vec4& z, double step) const;
    // div(nu X) by central differences.
    double divergence_residual(const Vec4& z, double step, FieldMode mode = FieldMode::exact) const;

private:
    FluxRational flux_;
    int band_;
    double epsilon_;
    double b_;
    PotentialSpec potential_;
    bool corrections_;
    PeriodicInterpolant e_, omega_, m_;
    double min_density_ = 1.0;
    Mat4 w0_;  // inverse of the form at eps = 0
};

}  // namespace magbloch
