#include "magbloch/fourier.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "magbloch/errors.hpp"

namespace magbloch {

PeriodicInterpolant::PeriodicInterpolant(const std::vector<double>& samples, int n, double period, double rel_cutoff) {
    if (n < 4 || samples.size() != static_cast<size_t>(n) * n) throw ConfigError("interpolant needs an N x N sample grid, N >= 4");
    wave_ = 2.0 * M_PI / period;

    Eigen::FFT<double> fft;
    CMat full(n, n);
    std::vector<cplx> in(n), out(n);
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) in[c] = samples[static_cast<size_t>(a) * n + c];
        fft.fwd(out, in);
        for (int c = 0; c < n; ++c) full(a, c) = out[c];
    }
    for (int c = 0; c < n; ++c) {
        for (int a = 0; a < n; ++a) in[a] = full(a, c);
        fft.fwd(out, in);
        for (int a = 0; a < n; ++a) full(a, c) = out[a] / static_cast<double>(n * n);
    }

    auto freq = [n](int i) { return i <= n / 2 ? i : i - n; };
    double cmax = 0.0;
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) cmax = std::max(cmax, std::abs(full(a, c)));
    scale_ = cmax;
    const int half = n / 2;
    int K = 0;
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) {
            int m1 = freq(a), m2 = freq(c);
            int ring = std::max(std::abs(m1), std::abs(m2));
            double mag = std::abs(full(a, c));
            if (ring >= half - 1) tail_ = std::max(tail_, mag);
            if (ring < half && mag > rel_cutoff * cmax) K = std::max(K, ring);
        }
    }
    order_ = K;
    coef_ = CMat::Zero(2 * K + 1, 2 * K + 1);
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) {
            int m1 = freq(a), m2 = freq(c);
            if (std::abs(m1) <= K && std::abs(m2) <= K && std::abs(m1) < half && std::abs(m2) < half)
                coef_(m1 + K, m2 + K) = full(a, c);
        }
    }
}

double PeriodicInterpolant::value(const Vec2& k) const {
    Vec2 g;
    return value(k, g);
}

double PeriodicInterpolant::value(const Vec2& k, Vec2& grad) const {
    if (order_ < 0) throw NumericError("interpolant is empty");
    // Real samples give c(-m) = conj c(m), so only rows m1 >= 0 are summed.
    const int K = order_;
    const int w = 2 * K + 1;
    CVec e1(K + 1), e2(w);
    const cplx s1 = std::polar(1.0, wave_ * k[0]);
    const cplx s2 = std::polar(1.0, wave_ * k[1]);
    e1[0] = e2[K] = 1.0;
    for (int m = 1; m <= K; ++m) {
        e1[m] = e1[m - 1] * s1;
        e2[K + m] = e2[K + m - 1] * s2;
        e2[K - m] = std::conj(e2[K + m]);
    }
    double v = 0.0, g1 = 0.0, g2 = 0.0;
    for (int m1 = 0; m1 <= K; ++m1) {
        cplx row = 0.0, drow = 0.0;
        for (int j = 0; j < w; ++j) {
            cplx t = coef_(m1 + K, j) * e2[j];
            row += t;
            drow += t * static_cast<double>(j - K);
        }
        const double weight = m1 == 0 ? 1.0 : 2.0;
        const cplx er = e1[m1] * row;
        v += weight * er.real();
        g1 -= weight * m1 * er.imag();
        g2 -= weight * (e1[m1] * drow).imag();
    }
    grad = Vec2(wave_ * g1, wave_ * g2);
    return v;
}

}  // namespace magbloch
