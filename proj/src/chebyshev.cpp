#include "magbloch/chebyshev.hpp"

#include <cmath>

#include "magbloch/errors.hpp"

namespace magbloch {

SpectralBounds gershgorin_bounds(const SpMat& H, double pad) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index row = 0; row < H.outerSize(); ++row) {
        double diag = 0.0, radius = 0.0;
        for (SpMat::InnerIterator it(H, row); it; ++it) {
            if (it.col() == row)
                diag += it.value().real();
            else
                radius += std::abs(it.value());
        }
        lo = std::min(lo, diag - radius);
        hi = std::max(hi, diag + radius);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw NumericError("cannot bound the spectrum of an empty matrix");
    SpectralBounds s;
    s.center = 0.5 * (lo + hi);
    s.half_width = std::max(0.5 * (hi - lo), 1e-12) * (1.0 + pad);
    return s;
}

std::vector<double> chebyshev_coefficients(const RealFunction& f, int n) {
    if (n < 1) throw ConfigError("need at least one Chebyshev term");
    std::vector<double> fx(n), c(n, 0.0);
    for (int j = 0; j < n; ++j) fx[j] = f(std::cos(M_PI * (j + 0.5) / n));
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += fx[j] * std::cos(M_PI * k * (j + 0.5) / n);
        c[k] = 2.0 * s / n;
    }
    c[0] *= 0.5;
    return c;
}

std::vector<double> chebyshev_coefficients_adaptive(const RealFunction& f, double tol, int n0, int n_max) {
    for (int n = n0; n <= n_max; n *= 2) {
        std::vector<double> c = chebyshev_coefficients(f, n);
        double scale = 0.0;
        for (double x : c) scale = std::max(scale, std::abs(x));
        double tail = 0.0;
        for (int k = n - 4; k < n; ++k) tail = std::max(tail, std::abs(c[k]));
        if (tail <= tol * std::max(1.0, scale)) {
            int keep = n;
            while (keep > 1 && std::abs(c[keep - 1]) <= tol * std::max(1.0, scale)) --keep;
            c.resize(keep);
            return c;
        }
    }
    throw NumericError("Chebyshev expansion did not converge within " + std::to_string(n_max) + " terms");
}

CVec chebyshev_apply(const SpMat& H, const CVec& v, const std::vector<double>& coef, const SpectralBounds& s) {
    const double inv = 1.0 / s.half_width;
    auto scaled = [&](const CVec& x) { return CVec((H * x - s.center * x) * inv); };
    CVec t0 = v;
    CVec out = coef[0] * t0;
    if (coef.size() == 1) return out;
    CVec t1 = scaled(v);
    out += coef[1] * t1;
    for (size_t n = 2; n < coef.size(); ++n) {
        CVec t2 = 2.0 * scaled(t1) - t0;
        out += coef[n] * t2;
        t0.swap(t1);
        t1.swap(t2);
    }
    return out;
}

double chebyshev_diagonal(const SpMat& H, long site, const RealFunction& f, const SpectralBounds& s, double tol) {
    if (site < 0 || site >= H.rows()) throw ConfigError("site index out of range");
    auto coef = chebyshev_coefficients_adaptive([&](double x) { return f(s.center + s.half_width * x); }, tol);
    CVec e = CVec::Zero(H.rows());
    e[site] = 1.0;
    return chebyshev_apply(H, e, coef, s)[site].real();
}

namespace {

// Largest |half_width * T| expanded in one piece; libstdc++ Bessel values degrade far beyond it.
constexpr double kMaxBesselArgument = 250.0;

Propagation propagate_once(const SpMat& H, const CVec& v, double T, const SpectralBounds& s, double tol) {
    const double x = s.half_width * T;
    const double ax = std::abs(x);
    int n = static_cast<int>(ax) + 20;
    // J_n(x) decays super-exponentially once n exceeds |x|
    while (std::abs(std::cyl_bessel_j(static_cast<double>(n), ax)) > tol * 1e-3 ||
           std::abs(std::cyl_bessel_j(static_cast<double>(n + 1), ax)) > tol * 1e-3)
        n += 10;
    std::vector<cplx> coef(n + 2);
    const cplx mi(0.0, -1.0);
    cplx ipow = 1.0;
    for (int k = 0; k < n + 2; ++k) {
        double j = std::cyl_bessel_j(static_cast<double>(k), ax);
        if (!std::isfinite(j)) throw NumericError("Bessel coefficient is not finite");
        if (x < 0 && (k % 2)) j = -j;
        coef[k] = (k == 0 ? 1.0 : 2.0) * ipow * j;
        ipow *= mi;
    }
    const double inv = 1.0 / s.half_width;
    auto scaled = [&](const CVec& y) { return CVec((H * y - s.center * y) * inv); };
    CVec t0 = v;
    CVec out = coef[0] * t0;
    CVec t1 = scaled(v);
    out += coef[1] * t1;
    for (size_t k = 2; k < coef.size(); ++k) {
        CVec t2 = 2.0 * scaled(t1) - t0;
        out += coef[k] * t2;
        t0.swap(t1);
        t1.swap(t2);
    }
    Propagation p;
    p.psi = std::polar(1.0, -s.center * T) * out;
    p.terms = static_cast<int>(coef.size());
    return p;
}

}  // namespace

Propagation propagate(const SpMat& H, const CVec& v, double T, const SpectralBounds& s, double tol) {
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(s.half_width * T) / kMaxBesselArgument)));
    Propagation p{v, 0};
    for (int i = 0; i < pieces; ++i) {
        Propagation step = propagate_once(H, p.psi, T / pieces, s, tol / pieces);
        p.psi = std::move(step.psi);
        p.terms += step.terms;
    }
    return p;
}

}  // namespace magbloch
