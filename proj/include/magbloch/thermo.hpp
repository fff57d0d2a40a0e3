#pragma once

#include <string>
#include <vector>

#include "magbloch/bands.hpp"

namespace magbloch {

struct ThermoParams {
    double beta = 1.0;
    double mu = 0.0;
    double epsilon = 0.0;
    double b = 0.0;
    int grid = 64;

    void validate() const;
};

// (1 + e^{beta (E - mu)})^{-1}, finite for any finite argument.
double fermi_dirac(double E, double beta, double mu);
// ln(1 + e^{-x}) without overflow.
double log1p_exp_neg(double x);

// All q bands of a flux on one N x N grid; q must be odd.
struct BandTable {
    FluxRational flux;
    int grid = 0;
    std::vector<BandData> bands;
};
BandTable band_table(const FluxRational& flux, int grid);

// Periodic-trapezoid phase-space integrals. The flux overloads also evaluate on the
// doubled grid and throw NumericError when the two differ by more than 1e-9.
double pressure(const BandTable& table, const ThermoParams& p);
double pressure(const FluxRational& flux, const ThermoParams& p);
double density(const BandTable& table, const ThermoParams& p);
double density(const FluxRational& flux, const ThermoParams& p);

// beta -> infinity limits: (mu - h)_+ and the step filling.
double pressure_zero_temperature(const BandTable& table, double mu, double epsilon, double b);
double density_zero_temperature(const BandTable& table, double mu, double epsilon, double b);

enum class MagnetizationMethod { formula, finite_difference };
MagnetizationMethod parse_magnetization_method(const std::string& name);
constexpr double kMagnetizationStep = 1e-4;

// Magnetization at the background field B0 (params.epsilon and params.b are not used):
// formula integrates -f(e) M + beta^{-1} ln(1 + e^{-beta (e - mu)}) Omega;
// finite_difference is the central derivative of the pressure in eps b.
double magnetization(const BandTable& table, const ThermoParams& p, MagnetizationMethod method);
double magnetization(const FluxRational& flux, const ThermoParams& p, MagnetizationMethod method);

struct HallResult {
    Vec2 current = Vec2::Zero();
    std::vector<int> chern;  // bands 0 .. filled - 1
    double min_gap = 0.0;    // gap above the last filled band, infinity when all are filled
};
constexpr int kHallChernGrid = 60;
// -(1 / 2 pi) (sum of filled Chern numbers) J E, leading order.
HallResult hall_current(const FluxRational& flux, int filled_bands, const Vec2& field, int grid = kHallChernGrid);

}  // namespace magbloch
