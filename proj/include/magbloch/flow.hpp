#pragma once

#include <functional>
#include <string>
#include <vector>

#include "magbloch/classical.hpp"

namespace magbloch {

enum class Scheme { rk4, implicit_midpoint };
Scheme parse_scheme(const std::string& name);

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec4> states;  // kappa unreduced
    std::vector<double> energy;
    Scheme scheme = Scheme::rk4;
    double dt = 0.0;
};

// Fixed-step integration over ceil(|t_final| / dt) equal steps; t_final < 0 runs backwards.
Trajectory integrate(const ClassicalSystem& sys, const Vec4& z0, double t_final, double dt,
                     Scheme scheme = Scheme::rk4, FieldMode mode = FieldMode::exact);

Vec4 flow_map(const ClassicalSystem& sys, const Vec4& z0, double t, double dt = 0.01,
              Scheme scheme = Scheme::rk4, FieldMode mode = FieldMode::exact);

using PhaseFunction = std::function<double(const Vec4&)>;
// a(phi^t(z)) for each z; negative t transports backwards.
std::vector<double> transport_observable(const ClassicalSystem& sys, const PhaseFunction& a, double t,
                                         const std::vector<Vec4>& points, double dt = 0.01,
                                         FieldMode mode = FieldMode::exact);

// |div(nu X)(z)| by central differences.
double volume_continuity_residual(const ClassicalSystem& sys, const Vec4& z, double step,
                                  FieldMode mode = FieldMode::exact);

// Columns t,r1,r2,kappa1,kappa2,h with kappa reduced to [0, 2 pi / q)^2.
std::string trajectory_csv(const Trajectory& traj, const FluxRational& flux);

}  // namespace magbloch
