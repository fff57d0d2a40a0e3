#include "magbloch/quantum.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "magbloch/errors.hpp"
#include "magbloch/flow.hpp"
#include "magbloch/parallel.hpp"
#include "magbloch/thermo.hpp"

namespace magbloch {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const cplx kI(0.0, 1.0);

bool near_multiple_of_2pi(double x) {
    double r = x / kTwoPi;
    return std::abs(r - std::round(r)) <= 1e-9 * (1.0 + std::abs(r));
}

long positive_mod(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

// Chebyshev points of the first kind on [c - h, c + h].
std::vector<double> cheb_nodes(double c, double h, int n) {
    std::vector<double> x(n);
    for (int a = 0; a < n; ++a) x[a] = c + h * std::cos(M_PI * (a + 0.5) / n);
    return x;
}

// Barycentric interpolation weights: row t holds the weights of the nodes at point ts[t].
Eigen::MatrixXd cheb_weights(double c, double h, int n, const std::vector<double>& ts) {
    Eigen::MatrixXd W(ts.size(), n);
    std::vector<double> w(n), xn = cheb_nodes(c, h, n);
    for (int a = 0; a < n; ++a) w[a] = ((a % 2) ? -1.0 : 1.0) * std::sin(M_PI * (a + 0.5) / n);
    for (size_t t = 0; t < ts.size(); ++t) {
        int hit = -1;
        double total = 0.0;
        for (int a = 0; a < n; ++a) {
            double d = ts[t] - xn[a];
            if (std::abs(d) < 1e-14 * std::max(1.0, h)) {
                hit = a;
                break;
            }
            W(t, a) = w[a] / d;
            total += W(t, a);
        }
        if (hit >= 0) {
            W.row(t).setZero();
            W(t, hit) = 1.0;
        } else {
            W.row(t) /= total;
        }
    }
    return W;
}

// Landau-gauge translation by the lattice vector (g1, g2) with the field-increment phase,
// conjugated back to the symmetric gauge; zero where j + g leaves the box.
CVec kappa_translation(const LatticeFrame& f, int g1, int g2, const CVec& psi) {
    const FiniteLattice& lat = f.lat;
    const double B = lat.B, eb = lat.epsilon * f.b;
    CVec out = CVec::Zero(psi.size());
    for (int i2 = 0; i2 < lat.L2; ++i2) {
        const int s2 = i2 + g2;
        if (s2 < 0 || s2 >= lat.L2) continue;
        for (int i1 = 0; i1 < lat.L1; ++i1) {
            const int s1 = i1 + g1;
            if (s1 < 0 || s1 >= lat.L1) continue;
            const double j1 = i1 + lat.origin1, j2 = i2 + lat.origin2;
            const double k1 = s1 + lat.origin1, k2 = s2 + lat.origin2;
            const double phase = -0.5 * B * k1 * k2 + g2 * eb * (j1 + 0.5 * g1) + 0.5 * B * j1 * j2;
            out[lat.index(i1, i2)] = std::polar(1.0, phase) * psi[lat.index(s1, s2)];
        }
    }
    return out;
}

double edge_weight(const FiniteLattice& lat, const CVec& psi) {
    double w = 0.0;
    for (int i2 = 0; i2 < lat.L2; ++i2)
        for (int i1 = 0; i1 < lat.L1; ++i1)
            if (i1 == 0 || i2 == 0 || i1 == lat.L1 - 1 || i2 == lat.L2 - 1) w += std::norm(psi[lat.index(i1, i2)]);
    return w;
}

}  // namespace

Vec2 model_from_lattice(const Vec2& x) { return Vec2(-x[0], x[1]); }

Eigen::VectorXd exact_spectrum(const FiniteLattice& lat) {
    lat.validate();
    if (lat.sites() > kDenseSiteLimit)
        throw ConfigError("dense diagonalization is limited to " + std::to_string(kDenseSiteLimit) + " sites");
    Eigen::SelfAdjointEigenSolver<CMat> es(finite_hamiltonian_dense(lat), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("lattice eigensolver failed");
    return es.eigenvalues();
}

RealFunction gaussian_function(double center, double width) {
    if (!(width > 0.0)) throw ConfigError("Gaussian width must be positive");
    return [center, width](double E) {
        const double x = (E - center) / width;
        return std::exp(-0.5 * x * x);
    };
}

bool sites_equivalent(const FiniteLattice& lat) {
    return lat.boundary == Boundary::magnetic_torus && !lat.potential.has_bulk() && !lat.potential.has_field() &&
           lat.origin1 == 0 && lat.origin2 == 0 && near_multiple_of_2pi(lat.B * lat.L1) &&
           near_multiple_of_2pi(lat.B * lat.L2);
}

double trace_f_per_site(const FiniteLattice& lat, const RealFunction& f, TraceMethod method, long dense_limit) {
    lat.validate();
    if (method == TraceMethod::automatic) method = lat.sites() <= dense_limit ? TraceMethod::dense : TraceMethod::chebyshev;
    if (method == TraceMethod::dense) {
        Eigen::VectorXd w = exact_spectrum(lat);
        double s = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) s += f(w[i]);
        return s / static_cast<double>(w.size());
    }
    if (!sites_equivalent(lat))
        throw ConfigError("the single-site Chebyshev trace needs a translation-invariant torus");
    SpMat H = finite_hamiltonian(lat);
    return chebyshev_diagonal(H, 0, f, gershgorin_bounds(H));
}

void EquilibriumScenario::validate() const {
    if (sizes.size() < 2) throw ConfigError("equilibrium comparison needs at least two lattice sizes");
    for (int L : sizes)
        if (L <= 0 || L % flux0.q != 0)
            throw AdmissibilityError("lattice size " + std::to_string(L) + " is not a multiple of q = " + std::to_string(flux0.q));
    if (!(f_width > 0.0)) throw ConfigError("f width must be positive");
    if (std::abs(b - std::round(b)) > 1e-12) throw AdmissibilityError("b must be an integer for integer total flux");
}

std::string EquilibriumReport::csv() const {
    CsvBuilder c({"L", "epsilon", "quantum", "classical", "error", "classical_uncorrected", "error_uncorrected"});
    for (const auto& r : rows)
        c.row({static_cast<double>(r.L), r.epsilon, r.quantum, r.classical, r.error, r.classical_uncorrected,
               r.error_uncorrected});
    return c.str();
}

EquilibriumReport equilibrium_compare(const EquilibriumScenario& sc) {
    sc.validate();
    const RealFunction f = gaussian_function(sc.f_center, sc.f_width);
    const BandTable table = band_table(sc.flux0, sc.grid);
    const double norm = 1.0 / (static_cast<double>(sc.flux0.q) * sc.grid * sc.grid);
    auto classical = [&](double s, bool corrected) {
        double acc = 0.0;
        for (const BandData& d : table.bands)
            for (size_t i = 0; i < d.energy.size(); ++i)
                acc += corrected ? (1.0 + s * d.curvature[i]) * f(d.energy[i] + s * d.moment[i]) : f(d.energy[i]);
        return acc * norm;
    };
    EquilibriumReport rep;
    auto run = [&](int L, double eps, double B) {
        FiniteLattice lat;
        lat.L1 = lat.L2 = L;
        lat.B = B;
        lat.epsilon = kTwoPi / L;
        lat.boundary = Boundary::magnetic_torus;
        EquilibriumRow row;
        row.L = L;
        row.epsilon = eps;
        row.method = lat.sites() <= sc.dense_limit ? "dense" : "chebyshev";
        row.quantum = trace_f_per_site(lat, f, TraceMethod::automatic, sc.dense_limit);
        row.classical = classical(eps * sc.b, true);
        row.classical_uncorrected = classical(0.0, false);
        row.error = std::abs(row.quantum - row.classical);
        row.error_uncorrected = std::abs(row.quantum - row.classical_uncorrected);
        return row;
    };
    std::vector<double> eps, err, err_u;
    for (int L : sc.sizes) {
        const double e = kTwoPi / L;
        rep.rows.push_back(run(L, e, sc.flux0.B0() + e * sc.b));
        eps.push_back(e);
        err.push_back(rep.rows.back().error);
        err_u.push_back(rep.rows.back().error_uncorrected);
    }
    rep.fit = fit_loglog(eps, err);
    rep.fit_uncorrected = fit_loglog(eps, err_u);
    if (sc.zero_row) {
        int L = *std::max_element(sc.sizes.begin(), sc.sizes.end());
        rep.rows.push_back(run(L, 0.0, sc.flux0.B0()));
    }
    return rep;
}

LatticeFrame make_frame(const FiniteLattice& lat, const FluxRational& flux0) {
    lat.validate();
    LatticeFrame f;
    f.lat = lat;
    f.flux0 = flux0;
    f.b = (lat.B - flux0.B0()) / lat.epsilon;
    return f;
}

CVec apply_symbol(const LatticeFrame& f, const std::vector<SymbolTerm>& terms, const CVec& psi) {
    const FiniteLattice& lat = f.lat;
    const long q = f.flux0.q;
    CVec out = CVec::Zero(psi.size());
    for (const SymbolTerm& t : terms) {
        const int g1 = static_cast<int>(-q * t.m1), g2 = static_cast<int>(q * t.m2);
        if (std::abs(g1) >= lat.L1 || std::abs(g2) >= lat.L2) continue;
        CVec k = kappa_translation(f, g1, g2, psi);
        for (int i2 = 0; i2 < lat.L2; ++i2)
            for (int i1 = 0; i1 < lat.L1; ++i1) {
                const long idx = lat.index(i1, i2);
                if (k[idx] == 0.0) continue;
                Vec2 x(lat.epsilon * (i1 + lat.origin1 + 0.5 * g1), lat.epsilon * (i2 + lat.origin2 + 0.5 * g2));
                out[idx] += t.g(model_from_lattice(x)) * k[idx];
            }
    }
    return out;
}

CVec apply_position_function(const LatticeFrame& f, const std::function<double(const Vec2&)>& a, const CVec& psi) {
    const FiniteLattice& lat = f.lat;
    CVec out(psi.size());
    for (int i2 = 0; i2 < lat.L2; ++i2)
        for (int i1 = 0; i1 < lat.L1; ++i1) {
            const long idx = lat.index(i1, i2);
            out[idx] = a(model_from_lattice(Vec2(lat.epsilon * (i1 + lat.origin1), lat.epsilon * (i2 + lat.origin2)))) * psi[idx];
        }
    return out;
}

Wavepacket make_wavepacket(const LatticeFrame& f, const WavepacketSpec& spec) {
    const FiniteLattice& lat = f.lat;
    if (lat.boundary != Boundary::open_box) throw ConfigError("wavepackets live on the open box");
    if (spec.band < 0 || spec.band >= f.flux0.q) throw ConfigError("band index out of range");
    if (!(spec.width_c > 0.0)) throw ConfigError("packet width must be positive");
    const double eps = lat.epsilon;
    Wavepacket wp;
    wp.band = spec.band;
    wp.r0 = spec.r0;
    wp.kappa0 = spec.kappa0;
    wp.sigma = spec.width_c / std::sqrt(eps);
    const Vec2 n0 = model_from_lattice(spec.r0) / eps;
    const double margin = spec.edge_margin * wp.sigma;
    if (n0[0] - lat.origin1 < margin || lat.origin1 + lat.L1 - 1 - n0[0] < margin || n0[1] - lat.origin2 < margin ||
        lat.origin2 + lat.L2 - 1 - n0[1] < margin)
        throw BoundaryProximityError("packet center is closer than " + fmt(spec.edge_margin) +
                                     " widths to the box edge");

    Eigen::SelfAdjointEigenSolver<CMat> es(bloch_matrix(f.flux0, spec.kappa0));
    const CVec u = es.eigenvectors().col(spec.band);
    const Vec2 kl0 = model_from_lattice(spec.kappa0);
    const Vec2 ell(kl0[0], kl0[1] - eps * f.b * n0[0]);
    const long q = f.flux0.q;
    CVec psi(lat.sites());
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (int i2 = 0; i2 < lat.L2; ++i2)
        for (int i1 = 0; i1 < lat.L1; ++i1) {
            const double j1 = i1 + lat.origin1, j2 = i2 + lat.origin2;
            const double d2 = (j1 - n0[0]) * (j1 - n0[0]) + (j2 - n0[1]) * (j2 - n0[1]);
            const double env = std::exp(-d2 / (4.0 * wp.sigma * wp.sigma));
            const double phase = ell[0] * j1 + ell[1] * j2 + 0.5 * lat.B * j1 * j2;
            psi[lat.index(i1, i2)] = env * std::polar(1.0, phase) * u[positive_mod(static_cast<long>(j1), q)];
            const double v = lat.potential.value(Vec2(eps * j1, eps * j2));
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    psi.normalize();

    BandData bd = band_data(f.flux0, spec.band, kDefaultInterpolationGrid);
    const auto [emin, emax] = std::minmax_element(bd.energy.begin(), bd.energy.end());
    wp.energy_lo = *emin + vmin - spec.filter_pad;
    wp.energy_hi = *emax + vmax + spec.filter_pad;
    const SpMat H = finite_hamiltonian(lat);
    const SpectralBounds sb = gershgorin_bounds(H);
    const double lo = wp.energy_lo, hi = wp.energy_hi, edge = spec.filter_edge;
    auto coef = chebyshev_coefficients(
        [&](double x) {
            const double E = sb.center + sb.half_width * x;
            return 0.5 * (std::erf((E - lo) / edge) - std::erf((E - hi) / edge));
        },
        spec.filter_terms);
    CVec filtered = chebyshev_apply(H, psi, coef, sb);
    wp.raw_weight = filtered.squaredNorm();
    if (!(wp.raw_weight > 0.0)) throw FilterLeakageError("the band filter removed the whole packet");
    filtered /= std::sqrt(wp.raw_weight);
    wp.band_weight = filtered.dot(chebyshev_apply(H, filtered, coef, sb)).real();
    if (wp.band_weight < spec.min_band_weight)
        throw FilterLeakageError("band weight " + fmt(wp.band_weight) + " below " +
                                 fmt(spec.min_band_weight));
    wp.psi = std::move(filtered);
    return wp;
}

Evolution evolve(const LatticeFrame& f, const CVec& psi, const std::vector<double>& times, double edge_tol) {
    const SpMat H = finite_hamiltonian(f.lat);
    const SpectralBounds sb = gershgorin_bounds(H);
    Evolution ev;
    CVec cur = psi;
    double t_prev = 0.0;
    const double n0 = psi.norm();
    for (double t : times) {
        if (t < t_prev) throw ConfigError("evolution times must be increasing and non-negative");
        if (t > t_prev) {
            Propagation p = propagate(H, cur, (t - t_prev) / f.lat.epsilon, sb);
            cur = std::move(p.psi);
            ev.max_terms = std::max(ev.max_terms, p.terms);
        }
        if (!cur.allFinite()) throw NonFiniteStateError("propagated state is not finite");
        const double ew = edge_weight(f.lat, cur);
        if (ew > edge_tol)
            throw BoundaryProximityError("packet reached the box edge at t = " + fmt(t) + " (edge weight " +
                                         fmt(ew) + ")");
        ev.times.push_back(t);
        ev.norm_error.push_back(std::abs(cur.norm() - n0));
        ev.states.push_back(cur);
        t_prev = t;
    }
    return ev;
}

std::vector<std::vector<double>> evolve_expectation(const LatticeFrame& f, const CVec& psi,
                                                    const std::vector<StateObservable>& observables,
                                                    const std::vector<double>& times) {
    Evolution ev = evolve(f, psi, times);
    std::vector<std::vector<double>> out(observables.size());
    for (size_t o = 0; o < observables.size(); ++o)
        for (const CVec& s : ev.states) out[o].push_back(s.dot(observables[o](s)).real());
    return out;
}

std::vector<Vec4> grid_symbol_points(const FluxRational& flux0, const GridSymbol& g) {
    const auto x1 = cheb_nodes(g.center[0], g.half, g.nr);
    const auto x2 = cheb_nodes(g.center[1], g.half, g.nr);
    const double h = kTwoPi / static_cast<double>(flux0.q) / g.nk;
    std::vector<Vec4> pts;
    pts.reserve(static_cast<size_t>(g.nr) * g.nr * g.nk * g.nk);
    for (int a = 0; a < g.nr; ++a)
        for (int b = 0; b < g.nr; ++b)
            for (int c = 0; c < g.nk; ++c)
                for (int d = 0; d < g.nk; ++d) pts.emplace_back(x1[a], x2[b], c * h, d * h);
    return pts;
}

cplx grid_symbol_expectation(const LatticeFrame& f, const GridSymbol& g, const std::vector<double>& values,
                             const CVec& psi) {
    const int nr = g.nr, nk = g.nk;
    if (values.size() != static_cast<size_t>(nr) * nr * nk * nk) throw ConfigError("grid symbol has the wrong size");
    // coef[m][a, b]: Fourier coefficient of e^{i q m . kappa} at r-node (a, b)
    std::vector<Eigen::MatrixXcd> coef(static_cast<size_t>(nk) * nk, Eigen::MatrixXcd(nr, nr));
    Eigen::FFT<double> fft;
    std::vector<cplx> in(nk), out(nk);
    Eigen::MatrixXcd block(nk, nk);
    for (int a = 0; a < nr; ++a)
        for (int b = 0; b < nr; ++b) {
            const size_t base = (static_cast<size_t>(a) * nr + b) * nk * nk;
            for (int c = 0; c < nk; ++c) {
                for (int d = 0; d < nk; ++d) in[d] = values[base + static_cast<size_t>(c) * nk + d];
                fft.fwd(out, in);
                for (int d = 0; d < nk; ++d) block(c, d) = out[d];
            }
            for (int d = 0; d < nk; ++d) {
                for (int c = 0; c < nk; ++c) in[c] = block(c, d);
                fft.fwd(out, in);
                for (int c = 0; c < nk; ++c) coef[static_cast<size_t>(c) * nk + d](a, b) = out[c] / static_cast<double>(nk * nk);
            }
        }
    double scale = 0.0;
    for (const auto& m : coef) scale = std::max(scale, m.cwiseAbs().maxCoeff());
    auto freq = [nk](int i) { return i <= nk / 2 - (nk % 2 == 0 ? 1 : 0) ? i : i - nk; };

    const FiniteLattice& lat = f.lat;
    const long q = f.flux0.q;
    cplx total = 0.0;
    for (int c = 0; c < nk; ++c)
        for (int d = 0; d < nk; ++d) {
            const Eigen::MatrixXcd& F = coef[static_cast<size_t>(c) * nk + d];
            if (F.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, scale)) continue;
            const int m1 = freq(c), m2 = freq(d);
            const int g1 = static_cast<int>(-q * m1), g2 = static_cast<int>(q * m2);
            if (std::abs(g1) >= lat.L1 || std::abs(g2) >= lat.L2) continue;
            // midpoints: model r1 = -eps (j1 + g1/2), r2 = eps (j2 + g2/2)
            std::vector<double> t1(lat.L1), t2(lat.L2);
            for (int i1 = 0; i1 < lat.L1; ++i1) t1[i1] = -lat.epsilon * (i1 + lat.origin1 + 0.5 * g1);
            for (int i2 = 0; i2 < lat.L2; ++i2) t2[i2] = lat.epsilon * (i2 + lat.origin2 + 0.5 * g2);
            const Eigen::MatrixXd W1 = cheb_weights(g.center[0], g.half, nr, t1);
            const Eigen::MatrixXd W2 = cheb_weights(g.center[1], g.half, nr, t2);
            const Eigen::MatrixXcd G = W1 * F * W2.transpose();  // L1 x L2
            const CVec k = kappa_translation(f, g1, g2, psi);
            for (int i2 = 0; i2 < lat.L2; ++i2)
                for (int i1 = 0; i1 < lat.L1; ++i1) {
                    const long idx = lat.index(i1, i2);
                    total += std::conj(psi[idx]) * G(i1, i2) * k[idx];
                }
        }
    return total;
}

std::vector<EgorovObservable> default_egorov_observables(const FluxRational& flux0) {
    const double q = static_cast<double>(flux0.q);
    return {
        {"r1", [](const Vec4& z) { return z[0]; }},
        {"r2", [](const Vec4& z) { return z[1]; }},
        {"cos_q_kappa1", [q](const Vec4& z) { return std::cos(q * z[2]); }},
        {"sin_q_kappa1", [q](const Vec4& z) { return std::sin(q * z[2]); }},
    };
}

EgorovScenario EgorovScenario::standard() {
    EgorovScenario sc;
    sc.potential = PotentialSpec::cosine(0.2, -1, 0, 0.3) + PotentialSpec::cosine(0.2, 0, 1, 0.0);
    return sc;
}

void EgorovScenario::validate() const {
    if (sizes.size() < 2) throw ConfigError("Egorov comparison needs at least two lattice sizes");
    if (band < 0 || band >= flux0.q) throw ConfigError("band index out of range");
    if (!(t > 0.0)) throw ConfigError("time must be positive");
    if (r_nodes < 2 || kappa_nodes < 2) throw ConfigError("symbol grids need at least two nodes");
    if (!(width_c > 0.0) || !(box_sigmas > 0.0) || !(flow_dt > 0.0)) throw ConfigError("widths and steps must be positive");
    for (int L : sizes)
        if (L <= 0) throw ConfigError("lattice sizes must be positive");
    potential.validate();
}

std::string EgorovReport::csv() const {
    std::vector<std::string> head{"L", "epsilon", "error", "error_uncorrected"};
    for (const auto& n : observables) {
        head.push_back("quantum_" + n);
        head.push_back("classical_" + n);
        head.push_back("classical_uncorrected_" + n);
    }
    CsvBuilder c(head);
    for (const auto& r : rows) {
        std::vector<double> v{static_cast<double>(r.L), r.epsilon, r.error, r.error_uncorrected};
        for (size_t i = 0; i < observables.size(); ++i) {
            v.push_back(r.quantum[i]);
            v.push_back(r.classical[i]);
            v.push_back(r.classical_uncorrected[i]);
        }
        c.row(v);
    }
    return c.str();
}

EgorovReport egorov_compare(const EgorovScenario& sc) {
    sc.validate();
    const auto observables = sc.observables.empty() ? default_egorov_observables(sc.flux0) : sc.observables;
    EgorovReport rep;
    for (const auto& o : observables) rep.observables.push_back(o.name);
    std::vector<double> eps_list, err, err_u;

    for (int L : sc.sizes) {
        const double eps = kTwoPi / L;
        const double sigma = sc.width_c / std::sqrt(eps);
        ClassicalOptions opts;
        opts.grid = sc.grid;
        opts.coefficient_cutoff = sc.coefficient_cutoff;
        ClassicalSystem sys(sc.flux0, sc.band, eps, sc.b, sc.potential, opts);
        opts.corrections = false;
        ClassicalSystem sys_u(sc.flux0, sc.band, eps, sc.b, sc.potential, opts);

        // lattice box around the classical path of the packet center
        const Vec4 z0(sc.r0[0], sc.r0[1], sc.kappa0[0], sc.kappa0[1]);
        Trajectory path = integrate(sys, z0, sc.t, sc.flow_dt);
        Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
        for (const Vec4& z : path.states) {
            Vec2 n = model_from_lattice(position(z)) / eps;
            lo = lo.cwiseMin(n);
            hi = hi.cwiseMax(n);
        }
        const double pad = (sc.box_sigmas + 2.0) * sigma + 5.0;
        FiniteLattice lat;
        lat.boundary = Boundary::open_box;
        lat.epsilon = eps;
        lat.B = sc.flux0.B0() + eps * sc.b;
        lat.potential = sc.potential.mirrored();
        lat.origin1 = static_cast<int>(std::floor(lo[0] - pad));
        lat.origin2 = static_cast<int>(std::floor(lo[1] - pad));
        lat.L1 = static_cast<int>(std::ceil(hi[0] + pad)) - lat.origin1 + 1;
        lat.L2 = static_cast<int>(std::ceil(hi[1] + pad)) - lat.origin2 + 1;
        const LatticeFrame frame = make_frame(lat, sc.flux0);

        WavepacketSpec ws;
        ws.band = sc.band;
        ws.r0 = sc.r0;
        ws.kappa0 = sc.kappa0;
        ws.width_c = sc.width_c;
        const Wavepacket wp = make_wavepacket(frame, ws);
        const Evolution ev = evolve(frame, wp.psi, {sc.t});
        const CVec& psit = ev.states.back();

        EgorovRow row;
        row.L = L;
        row.epsilon = eps;
        row.sites = lat.sites();
        row.band_weight = wp.band_weight;
        row.norm_error = ev.norm_error.back();

        // quantum side: op(a) at time t on a box around the packet's mean position
        Vec2 mean = Vec2::Zero();
        for (int i2 = 0; i2 < lat.L2; ++i2)
            for (int i1 = 0; i1 < lat.L1; ++i1)
                mean += std::norm(psit[lat.index(i1, i2)]) *
                        model_from_lattice(Vec2(eps * (i1 + lat.origin1), eps * (i2 + lat.origin2)));
        GridSymbol gq{mean, sc.box_sigmas * sigma * eps, sc.r_nodes, sc.kappa_nodes};
        const auto qpts = grid_symbol_points(sc.flux0, gq);
        for (const auto& o : observables) {
            std::vector<double> vals(qpts.size());
            for (size_t i = 0; i < qpts.size(); ++i) vals[i] = o.a(qpts[i]);
            row.quantum.push_back(grid_symbol_expectation(frame, gq, vals, psit).real());
        }

        // classical side: transported symbols quantized against the initial packet
        GridSymbol g0{sc.r0, sc.box_sigmas * sigma * eps, sc.r_nodes, sc.kappa_nodes};
        const auto pts = grid_symbol_points(sc.flux0, g0);
        for (const ClassicalSystem* s : {&sys, &sys_u}) {
            std::vector<Vec4> ends(pts.size());
            parallel_for(static_cast<long>(pts.size()), [&](long i) { ends[i] = flow_map(*s, pts[i], sc.t, sc.flow_dt); });
            auto& dest = s == &sys ? row.classical : row.classical_uncorrected;
            for (const auto& o : observables) {
                std::vector<double> vals(ends.size());
                for (size_t i = 0; i < ends.size(); ++i) vals[i] = o.a(ends[i]);
                dest.push_back(grid_symbol_expectation(frame, g0, vals, wp.psi).real());
            }
        }
        for (size_t i = 0; i < observables.size(); ++i) {
            row.error = std::max(row.error, std::abs(row.quantum[i] - row.classical[i]));
            row.error_uncorrected = std::max(row.error_uncorrected, std::abs(row.quantum[i] - row.classical_uncorrected[i]));
        }
        eps_list.push_back(eps);
        err.push_back(row.error);
        err_u.push_back(row.error_uncorrected);
        rep.rows.push_back(std::move(row));
    }
    rep.fit = fit_loglog(eps_list, err);
    rep.fit_uncorrected = fit_loglog(eps_list, err_u);
    return rep;
}

}  // namespace magbloch
