#include "magbloch/bands.hpp"

#include <cmath>
#include <sstream>

#include "magbloch/errors.hpp"
#include "magbloch/io.hpp"

namespace magbloch {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const cplx I1(0.0, 1.0);

void check_band(const FluxRational& flux, int band) {
    if (band < 0 || band >= flux.q)
        throw ConfigError("band index " + std::to_string(band) + " out of range for q = " + std::to_string(flux.q));
}

CMat outer(const CVec& v) { return v * v.adjoint(); }

}  // namespace

Eigensystem eigensystem(const CMat& H, double tol) {
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    Eigensystem out;
    out.values = es.eigenvalues();
    for (Eigen::Index i = 0; i + 1 < out.values.size(); ++i) {
        if (out.values[i + 1] - out.values[i] < tol)
            throw DegeneracyError("eigenvalues " + std::to_string(i) + " and " + std::to_string(i + 1) + " are degenerate",
                                  static_cast<int>(i), static_cast<int>(i + 1));
    }
    for (Eigen::Index i = 0; i < out.values.size(); ++i) out.projections.push_back(outer(es.eigenvectors().col(i)));
    return out;
}

CMat k_bracket3(const std::array<CMat, 2>& dA, const CMat& B, const std::array<CMat, 2>& dC) {
    return -(dA[0] * B * dC[1] - dA[1] * B * dC[0]);
}

CMat k_bracket(const std::array<CMat, 2>& dA, const std::array<CMat, 2>& dB) {
    return -(dA[0] * dB[1] - dA[1] * dB[0]);
}

BandPoint band_point(const FluxRational& flux, int band, const Vec2& k) {
    check_band(flux, band);
    const long q = flux.q;
    CMat H = bloch_matrix(flux, k);
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    const Eigen::VectorXd& w = es.eigenvalues();
    const double e = w[band];
    if (band > 0 && e - w[band - 1] < kDegeneracyTol)
        throw DegeneracyError("band " + std::to_string(band) + " touches the band below", band - 1, band);
    if (band + 1 < q && w[band + 1] - e < kDegeneracyTol)
        throw DegeneracyError("band " + std::to_string(band) + " touches the band above", band, band + 1);

    BandPoint bp;
    bp.energy = e;
    bp.projection = outer(es.eigenvectors().col(band));
    CMat R = CMat::Zero(q, q);
    for (long i = 0; i < q; ++i)
        if (i != band) R += outer(es.eigenvectors().col(i)) / (e - w[i]);
    for (int a = 0; a < 2; ++a) {
        CMat dH = bloch_derivative(flux, k, a);
        bp.velocity[a] = (bp.projection * dH).trace().real();
        bp.dprojection[a] = bp.projection * dH * R + R * dH * bp.projection;
    }
    const CMat& P = bp.projection;
    const CMat& d1 = bp.dprojection[0];
    const CMat& d2 = bp.dprojection[1];
    cplx om = -I1 * (P * (d1 * d2 - d2 * d1)).trace();
    bp.curvature = om.real();
    bp.curvature_imag = om.imag();
    CMat shifted = H - e * CMat::Identity(q, q);
    bp.moment = (P * d1 * shifted * d2).trace().imag();
    return bp;
}

CMat projection_derivative(const FluxRational& flux, int band, const Vec2& k, int alpha) {
    if (alpha != 0 && alpha != 1) throw ConfigError("derivative direction must be 0 or 1");
    return band_point(flux, band, k).dprojection[alpha];
}

double berry_curvature(const FluxRational& flux, int band, const Vec2& k) { return band_point(flux, band, k).curvature; }

MomentForm parse_moment_form(const std::string& name) {
    if (name == "standard") return MomentForm::standard;
    if (name == "def") return MomentForm::def;
    if (name == "alt1") return MomentForm::alt1;
    if (name == "alt2") return MomentForm::alt2;
    if (name == "alt3") return MomentForm::alt3;
    throw ConfigError("unknown moment form: " + name);
}

double magnetic_moment(const FluxRational& flux, int band, const Vec2& k, MomentForm form) {
    BandPoint bp = band_point(flux, band, k);
    if (form == MomentForm::standard) return bp.moment;
    const long q = flux.q;
    const CMat H = bloch_matrix(flux, k);
    const CMat shifted = H - bp.energy * CMat::Identity(q, q);
    const cplx half_i(0.0, 0.5);
    switch (form) {
        case MomentForm::def:
            return (half_i * k_bracket3(bp.dprojection, H, bp.dprojection).trace()).real();
        case MomentForm::alt1:
            return (half_i * k_bracket3(bp.dprojection, shifted, bp.dprojection).trace()).real();
        case MomentForm::alt2:
            return (half_i * (k_bracket3(bp.dprojection, shifted, bp.dprojection) * bp.projection).trace()).real();
        case MomentForm::alt3: {
            std::array<CMat, 2> dshift;
            for (int a = 0; a < 2; ++a)
                dshift[a] = bloch_derivative(flux, k, a) - bp.velocity[a] * CMat::Identity(q, q);
            return (-half_i * (bp.projection * k_bracket(bp.dprojection, dshift)).trace()).real();
        }
        default:
            return bp.moment;
    }
}

ChernResult chern_number(const FluxRational& flux, int band, int grid) {
    check_band(flux, band);
    if (grid < 2) throw ConfigError("Chern grid must be at least 2");
    const int N = grid;
    const double h = kTwoPi / static_cast<double>(flux.q) / N;
    std::vector<CMat> P(static_cast<size_t>((N + 1) * (N + 1)));
    for (int a = 0; a <= N; ++a)
        for (int c = 0; c <= N; ++c) P[a * (N + 1) + c] = band_point(flux, band, Vec2(a * h, c * h)).projection;
    ChernResult res;
    res.band = band;
    res.grid = N;
    res.plaquette_fluxes.resize(static_cast<size_t>(N * N));
    double total = 0.0;
    for (int a = 0; a < N; ++a) {
        for (int c = 0; c < N; ++c) {
            const CMat& p1 = P[a * (N + 1) + c];
            const CMat& p2 = P[(a + 1) * (N + 1) + c];
            const CMat& p3 = P[(a + 1) * (N + 1) + c + 1];
            const CMat& p4 = P[a * (N + 1) + c + 1];
            cplx t = (p1 * p2 * p3 * p4).trace();
            if (std::abs(t) < 1e-12) throw AdmissibilityError("plaquette with vanishing overlap; refine the grid");
            double phi = std::arg(t);
            if (std::abs(phi) >= M_PI) throw AdmissibilityError("plaquette flux reaches pi; refine the grid");
            res.plaquette_fluxes[a * N + c] = phi;
            total += phi;
        }
    }
    res.raw = static_cast<double>(flux.q) * total / kTwoPi;
    res.chern = static_cast<int>(std::lround(res.raw));
    res.residual = std::abs(res.raw - res.chern);
    return res;
}

double chern_quadrature(const FluxRational& flux, int band, int grid) {
    check_band(flux, band);
    const double h = kTwoPi / static_cast<double>(flux.q) / grid;
    double s = 0.0;
    for (int a = 0; a < grid; ++a)
        for (int c = 0; c < grid; ++c) s += band_point(flux, band, Vec2(a * h, c * h)).curvature;
    return static_cast<double>(flux.q) / kTwoPi * s * h * h;
}

GapReport gap_check(const FluxRational& flux, int grid) {
    const long q = flux.q;
    GapReport rep;
    rep.min_gap.assign(static_cast<size_t>(q - 1), std::numeric_limits<double>::infinity());
    rep.argmin.assign(static_cast<size_t>(q - 1), Vec2::Zero());
    rep.even_middle_pair = (q % 2 == 0);
    const double h = kTwoPi / static_cast<double>(q) / grid;
    for (int a = 0; a < grid; ++a) {
        for (int c = 0; c < grid; ++c) {
            Vec2 k(a * h, c * h);
            Eigen::SelfAdjointEigenSolver<CMat> es(bloch_matrix(flux, k), Eigen::EigenvaluesOnly);
            const Eigen::VectorXd& w = es.eigenvalues();
            for (long j = 0; j + 1 < q; ++j) {
                double g = w[j + 1] - w[j];
                if (g < rep.min_gap[j]) {
                    rep.min_gap[j] = g;
                    rep.argmin[j] = k;
                }
            }
        }
    }
    return rep;
}

Vec2 BandData::node(int a, int c) const {
    const double h = kTwoPi / static_cast<double>(flux.q) / grid;
    return Vec2(a * h, c * h);
}

BandData band_data(const FluxRational& flux, int band, int grid) {
    check_band(flux, band);
    BandData d;
    d.flux = flux;
    d.band = band;
    d.grid = grid;
    const size_t n = static_cast<size_t>(grid) * grid;
    d.energy.resize(n);
    d.curvature.resize(n);
    d.moment.resize(n);
    d.projection.resize(n);
    const long q = flux.q;
    for (int a = 0; a < grid; ++a) {
        for (int c = 0; c < grid; ++c) {
            Vec2 k = d.node(a, c);
            BandPoint bp = band_point(flux, band, k);
            const size_t i = static_cast<size_t>(a) * grid + c;
            d.energy[i] = bp.energy;
            d.curvature[i] = bp.curvature;
            d.moment[i] = bp.moment;
            d.projection[i] = bp.projection;
            const CMat& P = bp.projection;
            CMat H = bloch_matrix(flux, k);
            double r = (P * P - P).norm();
            r = std::max(r, (P.adjoint() - P).norm());
            r = std::max(r, std::abs(P.trace() - 1.0));
            r = std::max(r, (H * P - bp.energy * P).norm());
            d.max_residual = std::max(d.max_residual, r);
        }
    }
    (void)q;
    if (d.max_residual > 1e-10) throw NumericError("band projection residuals exceed 1e-10");
    return d;
}

std::string band_map_csv(const BandData& data, GridField field) {
    CsvBuilder csv({"k1", "k2", "value"});
    const std::vector<double>& v = field == GridField::energy      ? data.energy
                                   : field == GridField::curvature ? data.curvature
                                                                   : data.moment;
    for (int a = 0; a < data.grid; ++a)
        for (int c = 0; c < data.grid; ++c) {
            Vec2 k = data.node(a, c);
            csv.row({k[0], k[1], v[static_cast<size_t>(a) * data.grid + c]});
        }
    return csv.str();
}

}  // namespace magbloch
