#pragma once

#include <vector>

#include "magbloch/lattice.hpp"

namespace magbloch {

// Truncated Fourier series of a real function on the square torus [0, period)^2,
// fitted to samples on the uniform N x N grid (row-major, index a * N + c).
class PeriodicInterpolant {
public:
    PeriodicInterpolant() = default;
    PeriodicInterpolant(const std::vector<double>& samples, int n, double period, double rel_cutoff = 1e-15);

    double value(const Vec2& k) const;
    double value(const Vec2& k, Vec2& grad) const;

    // Largest retained |m|; the series runs over m in [-K, K]^2.
    int order() const { return order_; }
    // Largest coefficient magnitude on the outermost ring of the sampled band, an
    // estimate of the aliasing error.
    double tail() const { return tail_; }
    double scale() const { return scale_; }
    bool empty() const { return order_ < 0; }

private:
    int order_ = -1;
    double wave_ = 1.0;
    double tail_ = 0.0;
    double scale_ = 0.0;
    CMat coef_;  // (2K+1) x (2K+1), entry (m1 + K, m2 + K)
};

}  // namespace magbloch
