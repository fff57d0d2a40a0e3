#pragma once

#include <functional>
#include <vector>

#include "magbloch/lattice.hpp"

namespace magbloch {

// Spectrum of H lies in [center - half_width, center + half_width].
struct SpectralBounds {
    double center = 0.0;
    double half_width = 1.0;
};
// Gershgorin discs, widened by a relative pad.
SpectralBounds gershgorin_bounds(const SpMat& H, double pad = 0.01);

using RealFunction = std::function<double(double)>;

// Coefficients c_n of f(x) ~ sum c_n T_n(x) on [-1, 1] from n Chebyshev nodes.
std::vector<double> chebyshev_coefficients(const RealFunction& f, int n);
// Coefficients with adaptive length: doubles n until the last few drop below tol.
std::vector<double> chebyshev_coefficients_adaptive(const RealFunction& f, double tol = 1e-15, int n0 = 32,
                                                    int n_max = 1 << 14);

// sum c_n T_n((H - center) / half_width) v.
CVec chebyshev_apply(const SpMat& H, const CVec& v, const std::vector<double>& coef, const SpectralBounds& s);

// f(H)_{ii} for a real function f given in energy units.
double chebyshev_diagonal(const SpMat& H, long site, const RealFunction& f, const SpectralBounds& s,
                          double tol = 1e-15);

struct Propagation {
    CVec psi;
    int terms = 0;
};
// e^{-i H T} v by the Chebyshev-Bessel expansion, truncated once the remaining
// coefficients fall below tol. Long times are split into equal pieces; terms counts
// matrix-vector products over all pieces.
Propagation propagate(const SpMat& H, const CVec& v, double T, const SpectralBounds& s, double tol = 1e-10);

}  // namespace magbloch
