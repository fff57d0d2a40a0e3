#pragma once

#include <functional>
#include <string>
#include <vector>

#include "magbloch/chebyshev.hpp"
#include "magbloch/classical.hpp"
#include "magbloch/flow.hpp"
#include "magbloch/io.hpp"

namespace magbloch {

// Lattice sites n carry macroscopic coordinates x = eps n. The semiclassical model uses
// r = (-x1, x2) and kappa = (-kappa_L1, kappa_L2), where kappa_L is the lattice kinetic
// momentum; with this orientation the Bloch symbol of the lattice equals H0(kappa).
Vec2 model_from_lattice(const Vec2& x);

// ---- spectra and traces --------------------------------------------------------------

// Dense full spectrum, ascending. Throws ConfigError above kDenseSiteLimit sites.
Eigen::VectorXd exact_spectrum(const FiniteLattice& lat);

RealFunction gaussian_function(double center, double width);

enum class TraceMethod { automatic, dense, chebyshev };
// Torus, V = 0 and B L1, B L2 in 2 pi Z: every site is equivalent under magnetic translations.
bool sites_equivalent(const FiniteLattice& lat);
// (1 / sites) tr f(H). The Chebyshev route computes f(H)_{00} and needs sites_equivalent.
// automatic uses dense diagonalization up to dense_limit sites, Chebyshev above.
double trace_f_per_site(const FiniteLattice& lat, const RealFunction& f, TraceMethod method = TraceMethod::automatic,
                        long dense_limit = 2500);

// ---- equilibrium comparison ----------------------------------------------------------

struct EquilibriumScenario {
    FluxRational flux0 = FluxRational::make(1, 3);
    double b = 1.0;
    std::vector<int> sizes{24, 48, 96};  // eps = 2 pi / L
    double f_center = 0.0;
    double f_width = 1.0;
    int grid = 64;
    long dense_limit = 2500;
    // Also compare at eps = 0 (B = B0) on the largest torus; not used in the fit.
    bool zero_row = false;

    void validate() const;
};

struct EquilibriumRow {
    int L = 0;
    double epsilon = 0.0;
    double quantum = 0.0;
    double classical = 0.0;
    double error = 0.0;
    double classical_uncorrected = 0.0;  // (1 + eps b Omega) and eps b M dropped
    double error_uncorrected = 0.0;
    std::string method;
};

struct EquilibriumReport {
    std::vector<EquilibriumRow> rows;
    LineFit fit;
    LineFit fit_uncorrected;
    std::string csv() const;
};
EquilibriumReport equilibrium_compare(const EquilibriumScenario& sc);

// ---- symbols on the lattice ----------------------------------------------------------

// Lattice context for quantizing model-space symbols.
struct LatticeFrame {
    FiniteLattice lat;
    FluxRational flux0;
    double b = 0.0;  // B = B0 + eps b
};
LatticeFrame make_frame(const FiniteLattice& lat, const FluxRational& flux0);

// Magnetic Weyl quantization of g(r) e^{i q m . kappa}:
// (op psi)_j = g(r at the midpoint j + gamma/2) (K_gamma psi)_j, with gamma = q (-m1, m2) on the lattice.
struct SymbolTerm {
    int m1 = 0;
    int m2 = 0;
    std::function<cplx(const Vec2& r)> g;
};
CVec apply_symbol(const LatticeFrame& f, const std::vector<SymbolTerm>& terms, const CVec& psi);

// Multiplication by a(r) at each site.
CVec apply_position_function(const LatticeFrame& f, const std::function<double(const Vec2&)>& a, const CVec& psi);

// ---- wavepackets and dynamics --------------------------------------------------------

struct WavepacketSpec {
    int band = 0;
    Vec2 r0 = Vec2::Zero();      // model coordinates
    Vec2 kappa0 = Vec2::Zero();  // model coordinates
    double width_c = 1.0;        // sigma = width_c / sqrt(eps) sites
    double edge_margin = 5.0;    // in units of sigma
    int filter_terms = 600;
    double filter_pad = 0.3;     // energy added to the band window beyond the potential range
    double filter_edge = 0.08;   // erf edge width in energy units
    double min_band_weight = 0.99;
};

struct Wavepacket {
    int band = 0;
    Vec2 r0, kappa0;
    double sigma = 0.0;        // sites
    CVec psi;
    double band_weight = 0.0;  // <psi, w(H) psi> after filtering
    double raw_weight = 0.0;   // fraction of the unfiltered packet kept by the filter
    double energy_lo = 0.0, energy_hi = 0.0;
};

// Gaussian envelope times the band Bloch vector at kappa0, filtered onto the band window.
Wavepacket make_wavepacket(const LatticeFrame& f, const WavepacketSpec& spec);

struct Evolution {
    std::vector<double> times;
    std::vector<CVec> states;
    std::vector<double> norm_error;
    int max_terms = 0;
};
// psi(t) = e^{-i H t / eps} psi at each time. Throws BoundaryProximityError when more than
// edge_tol of the weight reaches the outermost ring of sites.
Evolution evolve(const LatticeFrame& f, const CVec& psi, const std::vector<double>& times, double edge_tol = 1e-10);

// <psi(t), a psi(t)> for each time and observable; observables act on a state.
using StateObservable = std::function<CVec(const CVec&)>;
std::vector<std::vector<double>> evolve_expectation(const LatticeFrame& f, const CVec& psi,
                                                    const std::vector<StateObservable>& observables,
                                                    const std::vector<double>& times);

// ---- transported-symbol quantization -------------------------------------------------

// Samples a(r, kappa) on an nr x nr Chebyshev grid in the box center +- half and an
// nk x nk grid on the reduced torus, and returns its Fourier-in-kappa, Chebyshev-in-r
// quantization applied to psi.
struct GridSymbol {
    Vec2 center = Vec2::Zero();
    double half = 1.0;
    int nr = 10;
    int nk = 12;
};
std::vector<Vec4> grid_symbol_points(const FluxRational& flux0, const GridSymbol& g);
// values[i] belongs to grid_symbol_points()[i].
cplx grid_symbol_expectation(const LatticeFrame& f, const GridSymbol& g, const std::vector<double>& values,
                             const CVec& psi);

// ---- Egorov comparison ---------------------------------------------------------------

struct EgorovObservable {
    std::string name;
    PhaseFunction a;
};
// x1, x2 (model r) and cos, sin of q kappa1.
std::vector<EgorovObservable> default_egorov_observables(const FluxRational& flux0);

struct EgorovScenario {
    FluxRational flux0 = FluxRational::make(1, 3);
    int band = 0;
    double b = 1.0;
    double t = 1.0;
    std::vector<int> sizes{48, 96, 192};
    PotentialSpec potential;  // model coordinates
    Vec2 r0{0.3, -0.2};
    Vec2 kappa0{0.4, 0.9};
    double width_c = 1.0;
    int r_nodes = 10;
    int kappa_nodes = 12;
    double box_sigmas = 7.0;  // symbol box half-width in sigma; the lattice box adds two more sigma
    double flow_dt = 0.02;
    int grid = 64;
    double coefficient_cutoff = 1e-10;
    std::vector<EgorovObservable> observables;  // empty: default set

    static EgorovScenario standard();
    void validate() const;
};

struct EgorovRow {
    int L = 0;
    double epsilon = 0.0;
    long sites = 0;
    std::vector<double> quantum;
    std::vector<double> classical;
    std::vector<double> classical_uncorrected;
    double error = 0.0;  // max over observables
    double error_uncorrected = 0.0;
    double band_weight = 0.0;
    double norm_error = 0.0;
};

struct EgorovReport {
    std::vector<std::string> observables;
    std::vector<EgorovRow> rows;
    LineFit fit;
    LineFit fit_uncorrected;
    std::string csv() const;
};
EgorovReport egorov_compare(const EgorovScenario& sc);

}  // namespace magbloch
