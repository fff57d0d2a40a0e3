#pragma once

#include <array>
#include <string>
#include <vector>

#include "magbloch/lattice.hpp"

namespace magbloch {

constexpr double kDegeneracyTol = 1e-10;

struct Eigensystem {
    Eigen::VectorXd values;          // ascending
    std::vector<CMat> projections;   // rank-one, one per eigenvalue
};

// Throws DegeneracyError if two consecutive eigenvalues are closer than tol.
Eigensystem eigensystem(const CMat& H, double tol = kDegeneracyTol);

// Everything about one band at one k, from a single diagonalization.
// Band indices are zero-based (0 = lowest band).
struct BandPoint {
    double energy = 0.0;
    Vec2 velocity = Vec2::Zero();   // d e / d k
    CMat projection;
    std::array<CMat, 2> dprojection;
    double curvature = 0.0;         // -i tr(pi [d1 pi, d2 pi])
    double curvature_imag = 0.0;    // imaginary residual of the same trace
    double moment = 0.0;            // Im tr(pi d1pi (H - e) d2pi)
};

BandPoint band_point(const FluxRational& flux, int band, const Vec2& k);

// pi (dH) R + R (dH) pi with R = (e - H)^{-1} (1 - pi).
CMat projection_derivative(const FluxRational& flux, int band, const Vec2& k, int alpha);
double berry_curvature(const FluxRational& flux, int band, const Vec2& k);

enum class MomentForm {
    standard,  // Im tr(pi d1pi (H - e) d2pi)
    def,       // (i/2) tr {pi | H | pi}
    alt1,      // (i/2) tr {pi | H - e | pi}
    alt2,      // (i/2) tr ({pi | H - e | pi} pi)
    alt3       // -(i/2) tr (pi {pi, H - e})
};
MomentForm parse_moment_form(const std::string& name);
double magnetic_moment(const FluxRational& flux, int band, const Vec2& k, MomentForm form = MomentForm::standard);

// Generalized k-space bracket {A|B|C} = -(d1A B d2C - d2A B d1C): the phase-space
// bracket of the kinetic-momentum substituted symbols at unit field increment.
CMat k_bracket3(const std::array<CMat, 2>& dA, const CMat& B, const std::array<CMat, 2>& dC);
CMat k_bracket(const std::array<CMat, 2>& dA, const std::array<CMat, 2>& dB);

struct ChernResult {
    int band = 0;
    int chern = 0;
    int grid = 0;
    double raw = 0.0;                     // q * (sum of plaquette fluxes) / 2 pi
    double residual = 0.0;                // |raw - chern|
    std::vector<double> plaquette_fluxes; // row-major, index a * N + c
};

// Lattice field-strength method on the reduced torus [0, 2 pi / q)^2.
ChernResult chern_number(const FluxRational& flux, int band, int grid);
// (q / 2 pi) * trapezoid quadrature of the curvature on an N x N grid.
double chern_quadrature(const FluxRational& flux, int band, int grid);

struct GapReport {
    std::vector<double> min_gap;   // min over grid of e_{j+1} - e_j, size q - 1
    std::vector<Vec2> argmin;      // where each minimum was found
    bool even_middle_pair = false; // q even: the middle pair is expected to touch
};
GapReport gap_check(const FluxRational& flux, int grid);

// Per-band data on the uniform grid k = (2 pi / q) (a, c) / N.
struct BandData {
    FluxRational flux;
    int band = 0;
    int grid = 0;
    std::vector<double> energy, curvature, moment;  // row-major, index a * N + c
    std::vector<CMat> projection;

    Vec2 node(int a, int c) const;
    double max_residual = 0.0;  // worst of |pi^2 - pi|, |pi* - pi|, |tr pi - 1|, |H pi - e pi|
};
BandData band_data(const FluxRational& flux, int band, int grid);

enum class GridField { energy, curvature, moment };
// Columns k1,k2,value.
std::string band_map_csv(const BandData& data, GridField field);

}  // namespace magbloch
