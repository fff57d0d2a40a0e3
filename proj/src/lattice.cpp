#include "magbloch/lattice.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "magbloch/errors.hpp"

namespace magbloch {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

bool near_integer(double x, double tol) { return std::abs(x - std::round(x)) <= tol; }

long floor_div(long a, long b) { return (a >= 0) ? a / b : -((-a + b - 1) / b); }

// m x j in the sense of the symmetric-gauge phase n.Bj = B (n1 j2 - n2 j1).
double cross(long m1, long m2, long j1, long j2) {
    return static_cast<double>(m1) * static_cast<double>(j2) - static_cast<double>(m2) * static_cast<double>(j1);
}

struct Wrapped {
    long j1, j2;  // local coordinates in [0, L)
    long m1, m2;  // period vector with target = j + m
};

Wrapped wrap(long t1, long t2, long L1, long L2) {
    long a = floor_div(t1, L1), b = floor_div(t2, L2);
    return {t1 - a * L1, t2 - b * L2, a * L1, b * L2};
}

}  // namespace

FluxRational FluxRational::make(long p, long q) {
    if (q <= 0) throw ConfigError("flux denominator must be positive");
    long g = std::gcd(std::abs(p), q);
    p /= g;
    q /= g;
    p %= q;
    if (p < 0) p += q;
    return {p, q};
}

double FluxRational::B0() const { return kTwoPi * static_cast<double>(p) / static_cast<double>(q); }

std::string FluxRational::str() const { return std::to_string(p) + "/" + std::to_string(q); }

FluxRational parse_flux(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return FluxRational::make(std::stol(text), 1);
        size_t used = 0;
        long p = std::stol(text.substr(0, slash), &used);
        if (used != slash) throw ConfigError("bad flux: " + text);
        std::string den = text.substr(slash + 1);
        long q = std::stol(den, &used);
        if (used != den.size()) throw ConfigError("bad flux: " + text);
        return FluxRational::make(p, q);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad flux: " + text);
    } catch (const std::out_of_range&) {
        throw ConfigError("bad flux: " + text);
    }
}

FluxRational snap_flux(double B, long max_denominator, double tol) {
    double x = B / kTwoPi;
    for (long q = 1; q <= max_denominator; ++q) {
        double p = std::round(x * static_cast<double>(q));
        if (std::abs(x - p / static_cast<double>(q)) <= tol) return FluxRational::make(static_cast<long>(p), q);
    }
    std::ostringstream os;
    os << "B/(2 pi) = " << x << " has no rational approximation with denominator <= " << max_denominator
       << " within " << tol;
    throw ConfigError(os.str());
}

void PotentialSpec::validate() const {
    for (const auto& t : bulk) {
        cplx partner{0.0, 0.0};
        for (const auto& u : bulk)
            if (u.n1 == -t.n1 && u.n2 == -t.n2) partner += u.c;
        cplx self{0.0, 0.0};
        for (const auto& u : bulk)
            if (u.n1 == t.n1 && u.n2 == t.n2) self += u.c;
        if (std::abs(partner - std::conj(self)) > 1e-14 * (1.0 + std::abs(self)))
            throw ConfigError("potential Fourier coefficients are not Hermitian-symmetric");
    }
    if (!field.allFinite()) throw ConfigError("potential field is not finite");
}

bool PotentialSpec::has_bulk() const {
    for (const auto& t : bulk)
        if (std::abs(t.c) > 0.0) return true;
    return false;
}

double PotentialSpec::value(const Vec2& x) const {
    double v = field.dot(x);
    for (const auto& t : bulk) v += (t.c * std::exp(cplx(0.0, t.n1 * x[0] + t.n2 * x[1]))).real();
    return v;
}

Vec2 PotentialSpec::gradient(const Vec2& x) const {
    Vec2 g = field;
    for (const auto& t : bulk) {
        cplx d = cplx(0.0, 1.0) * t.c * std::exp(cplx(0.0, t.n1 * x[0] + t.n2 * x[1]));
        g[0] += t.n1 * d.real();
        g[1] += t.n2 * d.real();
    }
    return g;
}

PotentialSpec PotentialSpec::mirrored() const {
    PotentialSpec out;
    out.field = Vec2(-field[0], field[1]);
    for (const auto& t : bulk) out.bulk.push_back({-t.n1, t.n2, t.c});
    return out;
}

PotentialSpec PotentialSpec::cosine(double amp, int n1, int n2, double phase) {
    PotentialSpec out;
    cplx c = 0.5 * amp * std::exp(cplx(0.0, phase));
    if (n1 == 0 && n2 == 0) {
        out.bulk.push_back({0, 0, cplx(amp * std::cos(phase), 0.0)});
    } else {
        out.bulk.push_back({n1, n2, c});
        out.bulk.push_back({-n1, -n2, std::conj(c)});
    }
    return out;
}

PotentialSpec PotentialSpec::operator+(const PotentialSpec& o) const {
    PotentialSpec out = *this;
    out.bulk.insert(out.bulk.end(), o.bulk.begin(), o.bulk.end());
    out.field += o.field;
    return out;
}

void FiniteLattice::validate() const {
    if (L1 <= 0 || L2 <= 0) throw ConfigError("lattice sides must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    potential.validate();
    if (boundary == Boundary::open_box) return;
    if (origin1 != 0 || origin2 != 0) throw ConfigError("torus lattices have their origin at 0");
    double flux = B * static_cast<double>(L1) * static_cast<double>(L2) / kTwoPi;
    if (!near_integer(flux, 1e-9 * (1.0 + std::abs(flux))))
        throw AdmissibilityError("total flux B L1 L2 / 2 pi = " + std::to_string(flux) + " is not an integer");
    if (potential.has_field()) throw AdmissibilityError("a linear potential is not periodic on the torus");
    if (potential.has_bulk()) {
        if (std::abs(epsilon * L1 - kTwoPi) > 1e-12 * kTwoPi || std::abs(epsilon * L2 - kTwoPi) > 1e-12 * kTwoPi)
            throw AdmissibilityError("bulk potential on the torus needs epsilon = 2 pi / L");
    }
}

CMat bloch_matrix(const FluxRational& flux, const Vec2& k) {
    const long q = flux.q;
    const double B0 = flux.B0();
    CMat H = CMat::Zero(q, q);
    const cplx down = std::exp(cplx(0.0, -k[0]));
    for (long m = 0; m < q; ++m) {
        H(m, m) += 2.0 * std::cos(k[1] + static_cast<double>(m) * B0);
        H(m, (m + 1) % q) += down;
        H((m + 1) % q, m) += std::conj(down);
    }
    return H;
}

CMat bloch_derivative(const FluxRational& flux, const Vec2& k, int alpha) {
    const long q = flux.q;
    const double B0 = flux.B0();
    CMat D = CMat::Zero(q, q);
    if (alpha == 0) {
        const cplx d = cplx(0.0, -1.0) * std::exp(cplx(0.0, -k[0]));
        for (long m = 0; m < q; ++m) {
            D(m, (m + 1) % q) += d;
            D((m + 1) % q, m) += std::conj(d);
        }
    } else if (alpha == 1) {
        for (long m = 0; m < q; ++m) D(m, m) = -2.0 * std::sin(k[1] + static_cast<double>(m) * B0);
    } else {
        throw ConfigError("derivative direction must be 0 or 1");
    }
    return D;
}

CMat tau(const FluxRational& flux, const Vec2& gstar) {
    CMat T = CMat::Zero(flux.q, flux.q);
    for (long m = 0; m < flux.q; ++m) T(m, m) = std::exp(cplx(0.0, -static_cast<double>(m) * gstar[0]));
    return T;
}

double tau_equivariance_residual(const FluxRational& flux, const Vec2& k, const Vec2& gstar) {
    const double q = static_cast<double>(flux.q);
    if (!near_integer(gstar[0] * q / kTwoPi, 1e-9) || !near_integer(gstar[1] / kTwoPi, 1e-9))
        throw ConfigError("dual vector is not in (2 pi / q) Z x 2 pi Z");
    CMat lhs = bloch_matrix(flux, k + gstar);
    CMat rhs = tau(flux, -gstar) * bloch_matrix(flux, k) * tau(flux, gstar);
    return (lhs - rhs).norm();
}

SpMat finite_hamiltonian(const FiniteLattice& lat) {
    lat.validate();
    const long L1 = lat.L1, L2 = lat.L2;
    const double B = lat.B;
    const bool torus = lat.boundary == Boundary::magnetic_torus;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<size_t>(5 * lat.sites()));
    static const int hops[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const bool with_potential = lat.potential.has_bulk() || lat.potential.has_field();
    for (long i2 = 0; i2 < L2; ++i2) {
        for (long i1 = 0; i1 < L1; ++i1) {
            const long a1 = i1 + lat.origin1, a2 = i2 + lat.origin2;
            const long row = lat.index(static_cast<int>(i1), static_cast<int>(i2));
            if (with_potential) {
                double v = lat.potential.value(Vec2(lat.epsilon * a1, lat.epsilon * a2));
                trip.emplace_back(row, row, cplx(v, 0.0));
            }
            for (const auto& n : hops) {
                const double phase = 0.5 * B * cross(n[0], n[1], a1, a2);
                long t1 = i1 - n[0], t2 = i2 - n[1];
                if (torus) {
                    Wrapped w = wrap(t1, t2, L1, L2);
                    double total = phase - 0.5 * B * cross(w.m1, w.m2, w.j1, w.j2);
                    trip.emplace_back(row, lat.index(static_cast<int>(w.j1), static_cast<int>(w.j2)),
                                      std::exp(cplx(0.0, total)));
                } else if (t1 >= 0 && t1 < L1 && t2 >= 0 && t2 < L2) {
                    trip.emplace_back(row, lat.index(static_cast<int>(t1), static_cast<int>(t2)),
                                      std::exp(cplx(0.0, phase)));
                }
            }
        }
    }
    SpMat H(lat.sites(), lat.sites());
    H.setFromTriplets(trip.begin(), trip.end());
    H.makeCompressed();
    return H;
}

CMat finite_hamiltonian_dense(const FiniteLattice& lat) {
    if (lat.sites() > kDenseSiteLimit)
        throw ConfigError("dense storage is limited to " + std::to_string(kDenseSiteLimit) + " sites");
    return CMat(finite_hamiltonian(lat));
}

SpMat dual_translation(const FiniteLattice& lat, int g1, int g2) {
    lat.validate();
    if (lat.boundary != Boundary::magnetic_torus) throw ConfigError("dual translations need the torus");
    const long L1 = lat.L1, L2 = lat.L2;
    std::vector<Eigen::Triplet<cplx>> trip;
    for (long i2 = 0; i2 < L2; ++i2) {
        for (long i1 = 0; i1 < L1; ++i1) {
            double phase = -0.5 * lat.B * cross(g1, g2, i1, i2);
            Wrapped w = wrap(i1 - g1, i2 - g2, L1, L2);
            phase -= 0.5 * lat.B * cross(w.m1, w.m2, w.j1, w.j2);
            trip.emplace_back(lat.index(static_cast<int>(i1), static_cast<int>(i2)),
                              lat.index(static_cast<int>(w.j1), static_cast<int>(w.j2)), std::exp(cplx(0.0, phase)));
        }
    }
    SpMat T(lat.sites(), lat.sites());
    T.setFromTriplets(trip.begin(), trip.end());
    return T;
}

double dual_translation_residual(const FiniteLattice& lat) {
    lat.validate();
    if (lat.boundary != Boundary::magnetic_torus) throw ConfigError("dual translations need the torus");
    if (lat.potential.has_bulk() || lat.potential.has_field()) throw ConfigError("dual translation check needs V = 0");
    FluxRational flux = snap_flux(lat.B, std::max<long>(1, lat.sites()), 1e-12);
    if (lat.L1 % flux.q != 0 || lat.L2 % flux.q != 0)
        throw AdmissibilityError("q = " + std::to_string(flux.q) + " does not divide the lattice sides");
    SpMat H = finite_hamiltonian(lat);
    double worst = 0.0;
    const int gens[2][2] = {{static_cast<int>(flux.q), 0}, {0, 1}};
    for (const auto& g : gens) {
        SpMat T = dual_translation(lat, g[0], g[1]);
        SpMat C = SpMat(H * T) - SpMat(T * H);
        worst = std::max(worst, C.norm());
    }
    return worst;
}

}  // namespace magbloch
