#include "magbloch/thermo.hpp"

#include <cmath>
#include <limits>

#include "magbloch/classical.hpp"
#include "magbloch/errors.hpp"
#include "magbloch/io.hpp"

namespace magbloch {

namespace {

constexpr double kConvergenceTol = 1e-9;
constexpr double kHallGapTol = 1e-8;

void require_odd(const FluxRational& flux) {
    if (flux.q % 2 == 0) throw GapError("flux " + flux.str() + " has even q; the middle bands touch");
}

// (1 / (q N^2)) sum_j sum_nodes g(e, Omega, M).
template <class F>
double band_integral(const BandTable& t, F&& g) {
    double s = 0.0;
    for (const BandData& d : t.bands)
        for (size_t i = 0; i < d.energy.size(); ++i) s += g(d.energy[i], d.curvature[i], d.moment[i]);
    return s / (static_cast<double>(t.flux.q) * t.grid * t.grid);
}

template <class F>
double converged(const FluxRational& flux, int grid, F&& eval, const char* what) {
    const double coarse = eval(band_table(flux, grid));
    const double fine = eval(band_table(flux, 2 * grid));
    if (std::abs(fine - coarse) > kConvergenceTol)
        throw NumericError(std::string(what) + " quadrature not converged: N = " + std::to_string(grid) +
                           " and 2N differ by " + fmt(std::abs(fine - coarse)));
    return coarse;
}

}  // namespace

void ThermoParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and positive");
    if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be finite and non-negative");
    if (!std::isfinite(b)) throw ConfigError("b must be finite");
    if (grid < 4) throw ConfigError("quadrature grid must be at least 4");
}

double fermi_dirac(double E, double beta, double mu) {
    const double x = beta * (E - mu);
    if (x > 0.0) {
        const double t = std::exp(-x);
        return t / (1.0 + t);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double log1p_exp_neg(double x) {
    if (x > 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

BandTable band_table(const FluxRational& flux, int grid) {
    require_odd(flux);
    BandTable t;
    t.flux = flux;
    t.grid = grid;
    for (int j = 0; j < flux.q; ++j) t.bands.push_back(band_data(flux, j, grid));
    return t;
}

double pressure(const BandTable& table, const ThermoParams& p) {
    p.validate();
    const double s = p.epsilon * p.b;
    return band_integral(table, [&](double e, double om, double m) {
               return (1.0 + s * om) * log1p_exp_neg(p.beta * (e + s * m - p.mu));
           }) /
           p.beta;
}

double pressure(const FluxRational& flux, const ThermoParams& p) {
    p.validate();
    return converged(flux, p.grid, [&](const BandTable& t) { return pressure(t, p); }, "pressure");
}

double density(const BandTable& table, const ThermoParams& p) {
    p.validate();
    const double s = p.epsilon * p.b;
    return band_integral(table, [&](double e, double om, double m) {
        return (1.0 + s * om) * fermi_dirac(e + s * m, p.beta, p.mu);
    });
}

double density(const FluxRational& flux, const ThermoParams& p) {
    p.validate();
    return converged(flux, p.grid, [&](const BandTable& t) { return density(t, p); }, "density");
}

double pressure_zero_temperature(const BandTable& table, double mu, double epsilon, double b) {
    const double s = epsilon * b;
    return band_integral(table, [&](double e, double om, double m) { return (1.0 + s * om) * std::max(mu - (e + s * m), 0.0); });
}

double density_zero_temperature(const BandTable& table, double mu, double epsilon, double b) {
    const double s = epsilon * b;
    return band_integral(table, [&](double e, double om, double m) {
        const double h = e + s * m;
        const double fill = h < mu ? 1.0 : (h == mu ? 0.5 : 0.0);
        return (1.0 + s * om) * fill;
    });
}

MagnetizationMethod parse_magnetization_method(const std::string& name) {
    if (name == "formula") return MagnetizationMethod::formula;
    if (name == "finite_difference" || name == "fd") return MagnetizationMethod::finite_difference;
    throw ConfigError("unknown magnetization method: " + name);
}

double magnetization(const BandTable& table, const ThermoParams& p, MagnetizationMethod method) {
    p.validate();
    if (method == MagnetizationMethod::formula) {
        return band_integral(table, [&](double e, double om, double m) {
            return -fermi_dirac(e, p.beta, p.mu) * m + log1p_exp_neg(p.beta * (e - p.mu)) * om / p.beta;
        });
    }
    // pressure depends on eps b only, so the lower point is taken at b = -1
    ThermoParams up = p, down = p;
    up.epsilon = down.epsilon = kMagnetizationStep;
    up.b = 1.0;
    down.b = -1.0;
    return (pressure(table, up) - pressure(table, down)) / (2.0 * kMagnetizationStep);
}

double magnetization(const FluxRational& flux, const ThermoParams& p, MagnetizationMethod method) {
    p.validate();
    return converged(flux, p.grid, [&](const BandTable& t) { return magnetization(t, p, method); }, "magnetization");
}

HallResult hall_current(const FluxRational& flux, int filled_bands, const Vec2& field, int grid) {
    require_odd(flux);
    if (filled_bands < 0 || filled_bands > flux.q)
        throw ConfigError("filled band count must lie in [0, q]");
    if (!field.allFinite()) throw ConfigError("field must be finite");
    HallResult res;
    res.min_gap = std::numeric_limits<double>::infinity();
    if (filled_bands > 0 && filled_bands < flux.q) {
        GapReport gaps = gap_check(flux, grid);
        res.min_gap = gaps.min_gap[filled_bands - 1];
        if (res.min_gap < kHallGapTol)
            throw GapError("no gap above band " + std::to_string(filled_bands) + " (min gap " + fmt(res.min_gap) + ")");
    }
    int total = 0;
    for (int j = 0; j < filled_bands; ++j) {
        res.chern.push_back(chern_number(flux, j, grid).chern);
        total += res.chern.back();
    }
    res.current = -(static_cast<double>(total) / (2.0 * M_PI)) * (rotation_j() * field);
    return res;
}

}  // namespace magbloch
