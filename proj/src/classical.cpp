#include "magbloch/classical.hpp"

#include <cmath>

#include "magbloch/errors.hpp"
#include "magbloch/io.hpp"

namespace magbloch {

Mat2 rotation_j() {
    Mat2 j;
    j << 0.0, 1.0, -1.0, 0.0;
    return j;
}

Mat4 symplectic_matrix(double epsilon, double b, double curvature) {
    const double nu = 1.0 + epsilon * b * curvature;
    if (!(nu > 0.0))
        throw DegenerateFormError("Liouville density 1 + eps b Omega = " + fmt(nu) + " is not positive");
    const Mat2 J = rotation_j();
    Mat4 w;
    w.block<2, 2>(0, 0) = -b * J;
    w.block<2, 2>(0, 2) = Mat2::Identity();
    w.block<2, 2>(2, 0) = -Mat2::Identity();
    w.block<2, 2>(2, 2) = epsilon * curvature * J;
    return w;
}

double pfaffian(const Mat4& a) { return a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2); }

FieldMode parse_field_mode(const std::string& name) {
    if (name == "exact") return FieldMode::exact;
    if (name == "truncated") return FieldMode::truncated;
    throw ConfigError("unknown field mode: " + name);
}

ClassicalSystem::ClassicalSystem(const FluxRational& flux, int band, double epsilon, double b, PotentialSpec potential,
                                 ClassicalOptions opts)
    : flux_(flux), band_(band), epsilon_(epsilon), b_(b), potential_(std::move(potential)), corrections_(opts.corrections) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be finite and non-negative");
    if (!std::isfinite(b)) throw ConfigError("b must be finite");
    potential_.validate();
    const double period = 2.0 * M_PI / static_cast<double>(flux.q);
    BandData d = band_data(flux, band, opts.grid);
    e_ = PeriodicInterpolant(d.energy, opts.grid, period, opts.coefficient_cutoff);
    omega_ = PeriodicInterpolant(d.curvature, opts.grid, period, opts.coefficient_cutoff);
    m_ = PeriodicInterpolant(d.moment, opts.grid, period, opts.coefficient_cutoff);
    auto check = [&](const PeriodicInterpolant& f, const char* what) {
        if (f.tail() > opts.interpolation_tol * std::max(1.0, f.scale()))
            throw NumericError(std::string("interpolation grid too coarse for ") + what + " (tail " + fmt(f.tail()) + ")");
    };
    check(e_, "the band energy");
    if (corrections_) {
        check(omega_, "the curvature");
        check(m_, "the magnetic moment");
        for (double om : d.curvature) min_density_ = std::min(min_density_, 1.0 + epsilon_ * b_ * om);
        if (min_density_ < kDensityFloor)
            throw DegenerateFormError("1 + eps b Omega drops to " + fmt(min_density_) + ", below the floor " +
                                      fmt(kDensityFloor));
    }
    w0_ = symplectic_matrix(0.0, b_, 0.0).inverse();
}

double ClassicalSystem::energy(const Vec2& kappa) const { return e_.value(kappa); }

double ClassicalSystem::curvature(const Vec2& kappa) const { return corrections_ ? omega_.value(kappa) : 0.0; }

double ClassicalSystem::moment(const Vec2& kappa) const { return corrections_ ? m_.value(kappa) : 0.0; }

double ClassicalSystem::h(const Vec4& z) const {
    const Vec2 kappa = kinetic_momentum(z);
    return energy(kappa) + potential_.value(position(z)) + epsilon_ * b_ * moment(kappa);
}

Vec4 ClassicalSystem::grad_h(const Vec4& z) const {
    const Vec2 kappa = kinetic_momentum(z);
    Vec2 ge, gm = Vec2::Zero();
    e_.value(kappa, ge);
    if (corrections_) m_.value(kappa, gm);
    Vec4 g;
    g.head<2>() = potential_.gradient(position(z));
    g.tail<2>() = ge + epsilon_ * b_ * gm;
    return g;
}

Mat4 ClassicalSystem::symplectic_form(const Vec4& z) const {
    return symplectic_matrix(epsilon_, b_, curvature(kinetic_momentum(z)));
}

double ClassicalSystem::liouville_density(const Vec2& kappa) const {
    const double nu = 1.0 + epsilon_ * b_ * curvature(kappa);
    if (!(nu > 0.0)) throw DegenerateFormError("Liouville density is not positive");
    return nu;
}

Vec4 ClassicalSystem::vector_field(const Vec4& z, FieldMode mode) const {
    const double om = curvature(kinetic_momentum(z));
    const Mat4 w = symplectic_matrix(epsilon_, b_, om);
    const Vec4 g = grad_h(z);
    if (mode == FieldMode::exact) return w.partialPivLu().solve(-g);
    Mat4 wp = Mat4::Zero();
    wp.block<2, 2>(2, 2) = om * rotation_j();
    const Mat4 winv = w0_ - epsilon_ * w0_ * wp * w0_;
    return -(winv * g);
}

double ClassicalSystem::poisson_bracket(const Vec4& grad_f, const Vec4& grad_g, const Vec4& z) const {
    const Mat4 w = symplectic_form(z);
    return grad_f.dot(w.partialPivLu().solve(grad_g));
}

double ClassicalSystem::closedness_residual(const Vec4& z, double step) const {
    if (!(step > 0.0) || step > 1e-2) throw ConfigError("closedness step must lie in (0, 1e-2]");
    const Mat2 J = rotation_j();
    Mat4 D = Mat4::Identity();
    D.block<2, 2>(2, 0) = 0.5 * b_ * J;
    // z' = (r, k) with kappa = k + (1/2) b J r
    Vec4 zc = z;
    zc.tail<2>() -= 0.5 * b_ * J * position(z);
    auto form = [&](const Vec4& zp) {
        Vec4 zz = zp;
        zz.tail<2>() += 0.5 * b_ * J * zp.head<2>();
        return Mat4(D.transpose() * symplectic_form(zz) * D);
    };
    std::array<Mat4, 4> d;
    for (int g = 0; g < 4; ++g) {
        Vec4 e = Vec4::Zero();
        e[g] = step;
        d[g] = (form(zc + e) - form(zc - e)) / (2.0 * step);
    }
    double worst = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            for (int c = b + 1; c < 4; ++c)
                worst = std::max(worst, std::abs(d[c](a, b) + d[a](b, c) + d[b](c, a)));
    return worst;
}

double ClassicalSystem::divergence_residual(const Vec4& z, double step, FieldMode mode) const {
    if (!(step > 0.0)) throw ConfigError("divergence step must be positive");
    double div = 0.0;
    for (int a = 0; a < 4; ++a) {
        Vec4 e = Vec4::Zero();
        e[a] = step;
        const Vec4 zp = z + e, zm = z - e;
        double fp = liouville_density(kinetic_momentum(zp)) * vector_field(zp, mode)[a];
        double fm = liouville_density(kinetic_momentum(zm)) * vector_field(zm, mode)[a];
        div += (fp - fm) / (2.0 * step);
    }
    return std::abs(div);
}

}  // namespace magbloch
