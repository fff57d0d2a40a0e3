#include "magbloch/flow.hpp"

#include <cmath>

#include "magbloch/errors.hpp"
#include "magbloch/io.hpp"

namespace magbloch {

namespace {

constexpr int kMidpointMaxIter = 100;
constexpr double kMidpointTol = 1e-15;

void require_finite(const Vec4& z, double t) {
    if (!z.allFinite()) throw NonFiniteStateError("state became non-finite at t = " + fmt(t));
}

Vec4 rk4_step(const ClassicalSystem& sys, const Vec4& z, double h, FieldMode mode) {
    const Vec4 k1 = sys.vector_field(z, mode);
    const Vec4 k2 = sys.vector_field(z + 0.5 * h * k1, mode);
    const Vec4 k3 = sys.vector_field(z + 0.5 * h * k2, mode);
    const Vec4 k4 = sys.vector_field(z + h * k3, mode);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec4 midpoint_step(const ClassicalSystem& sys, const Vec4& z, double h, FieldMode mode) {
    Vec4 next = rk4_step(sys, z, h, mode);
    for (int it = 0; it < kMidpointMaxIter; ++it) {
        Vec4 upd = z + h * sys.vector_field(0.5 * (z + next), mode);
        double change = (upd - next).lpNorm<Eigen::Infinity>();
        next = upd;
        if (change <= kMidpointTol * std::max(1.0, next.lpNorm<Eigen::Infinity>())) return next;
    }
    throw NumericError("implicit midpoint iteration did not converge; reduce dt");
}

double reduce(double x, double period) {
    double r = std::fmod(x, period);
    return r < 0 ? r + period : r;
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
    if (name == "rk4") return Scheme::rk4;
    if (name == "implicit_midpoint" || name == "midpoint") return Scheme::implicit_midpoint;
    throw ConfigError("unknown integration scheme: " + name);
}

Trajectory integrate(const ClassicalSystem& sys, const Vec4& z0, double t_final, double dt, Scheme scheme,
                     FieldMode mode) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!std::isfinite(t_final)) throw ConfigError("t_final must be finite");
    require_finite(z0, 0.0);
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(t_final) / dt - 1e-9)));
    const double h = t_final / static_cast<double>(n);
    Trajectory tr;
    tr.scheme = scheme;
    tr.dt = std::abs(h);
    tr.times.reserve(n + 1);
    tr.states.reserve(n + 1);
    tr.energy.reserve(n + 1);
    Vec4 z = z0;
    tr.times.push_back(0.0);
    tr.states.push_back(z);
    tr.energy.push_back(sys.h(z));
    if (t_final == 0.0) return tr;
    for (long s = 1; s <= n; ++s) {
        z = scheme == Scheme::rk4 ? rk4_step(sys, z, h, mode) : midpoint_step(sys, z, h, mode);
        const double t = static_cast<double>(s) * h;
        require_finite(z, t);
        tr.times.push_back(t);
        tr.states.push_back(z);
        tr.energy.push_back(sys.h(z));
    }
    return tr;
}

Vec4 flow_map(const ClassicalSystem& sys, const Vec4& z0, double t, double dt, Scheme scheme, FieldMode mode) {
    if (t == 0.0) return z0;
    return integrate(sys, z0, t, dt, scheme, mode).states.back();
}

std::vector<double> transport_observable(const ClassicalSystem& sys, const PhaseFunction& a, double t,
                                         const std::vector<Vec4>& points, double dt, FieldMode mode) {
    std::vector<double> out(points.size());
    for (size_t i = 0; i < points.size(); ++i) out[i] = a(flow_map(sys, points[i], t, dt, Scheme::rk4, mode));
    return out;
}

double volume_continuity_residual(const ClassicalSystem& sys, const Vec4& z, double step, FieldMode mode) {
    return sys.divergence_residual(z, step, mode);
}

std::string trajectory_csv(const Trajectory& traj, const FluxRational& flux) {
    const double period = 2.0 * M_PI / static_cast<double>(flux.q);
    CsvBuilder csv({"t", "r1", "r2", "kappa1", "kappa2", "h"});
    for (size_t i = 0; i < traj.times.size(); ++i) {
        const Vec4& z = traj.states[i];
        csv.row({traj.times[i], z[0], z[1], reduce(z[2], period), reduce(z[3], period), traj.energy[i]});
    }
    return csv.str();
}

}  // namespace magbloch
