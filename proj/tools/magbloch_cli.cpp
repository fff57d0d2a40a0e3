#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "magbloch/bands.hpp"
#include "magbloch/errors.hpp"
#include "magbloch/flow.hpp"
#include "magbloch/io.hpp"
#include "magbloch/parallel.hpp"
#include "magbloch/quantum.hpp"
#include "magbloch/symbols.hpp"
#include "magbloch/thermo.hpp"

using json = nlohmann::ordered_json;
using namespace magbloch;

namespace {

// ---- parameters ----------------------------------------------------------------------

// Merged flag and config values for one command, keyed by the flag name with '_' for '-'.
class Params {
public:
    json values = json::object();

    bool has(const std::string& key) const { return values.contains(key); }

    double number(const std::string& key, double def) const {
        if (!has(key)) return def;
        const json& v = values.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return parse_double(key, v.get<std::string>());
        throw ConfigError("parameter " + key + " must be a number");
    }

    int integer(const std::string& key, int def) const {
        const double x = number(key, def);
        if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("parameter " + key + " must be an integer");
        return static_cast<int>(x);
    }

    std::string text(const std::string& key, const std::string& def) const {
        if (!has(key)) return def;
        const json& v = values.at(key);
        if (v.is_string()) return v.get<std::string>();
        throw ConfigError("parameter " + key + " must be a string");
    }

    std::vector<double> list(const std::string& key, const std::vector<double>& def) const {
        if (!has(key)) return def;
        const json& v = values.at(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (const json& x : v) {
                if (!x.is_number()) throw ConfigError("parameter " + key + " must hold numbers");
                out.push_back(x.get<double>());
            }
        } else if (v.is_string()) {
            std::stringstream ss(v.get<std::string>());
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
        } else {
            throw ConfigError("parameter " + key + " must be a list");
        }
        return out;
    }

    Vec2 vec2(const std::string& key, const Vec2& def) const {
        if (!has(key)) return def;
        auto v = list(key, {});
        if (v.size() != 2) throw ConfigError("parameter " + key + " needs two components");
        return Vec2(v[0], v[1]);
    }

    FluxRational flux(const std::string& def = "1/3") const {
        if (has("flux") && values.at("flux").is_string()) return parse_flux(values.at("flux").get<std::string>());
        if (has("flux")) throw ConfigError("flux must be a string p/q");
        return parse_flux(def);
    }

    // 1-based on the command line, 0-based in the library.
    int band(const FluxRational& f, int def = 1) const {
        const int j = integer("band", def);
        if (j < 1 || j > f.q) throw ConfigError("band must lie in 1.." + std::to_string(f.q));
        return j - 1;
    }

    PotentialSpec potential(const PotentialSpec& def) const {
        PotentialSpec v = def;
        if (has("potential")) {
            const json& p = values.at("potential");
            if (!p.is_array()) throw ConfigError("potential must be a list of cosine terms");
            v = PotentialSpec{};
            for (const json& t : p) {
                static const std::set<std::string> keys{"amplitude", "n1", "n2", "phase"};
                if (!t.is_object()) throw ConfigError("potential terms must be objects");
                for (auto it = t.begin(); it != t.end(); ++it)
                    if (!keys.count(it.key())) throw ConfigError("unknown potential key: " + it.key());
                v = v + PotentialSpec::cosine(t.value("amplitude", 0.0), t.value("n1", 0), t.value("n2", 0),
                                              t.value("phase", 0.0));
            }
        }
        if (has("field")) v.field = vec2("field", Vec2::Zero());
        v.validate();
        return v;
    }

private:
    static double parse_double(const std::string& key, const std::string& s) {
        size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            throw ConfigError("parameter " + key + " is not a number: " + s);
        }
        if (used != s.size()) throw ConfigError("parameter " + key + " is not a number: " + s);
        return x;
    }
};

struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> keys;
};

const std::vector<std::string> kCommon{"out", "seed"};

const std::vector<Command> kCommands{
    {"butterfly", "Spectra of all fluxes p/q with q <= qmax on a k-grid", {"qmax", "grid"}},
    {"bands", "Band energies on the reduced torus and the gap report", {"flux", "grid"}},
    {"curvature", "Berry curvature map of one band", {"flux", "band", "grid"}},
    {"moment", "Magnetic moment map of one band", {"flux", "band", "grid", "form"}},
    {"chern", "Chern numbers by the plaquette method", {"flux", "grid", "band"}},
    {"trajectory", "Integrate the corrected semiclassical flow",
     {"flux", "band", "epsilon", "b", "t_final", "dt", "scheme", "mode", "r0", "kappa0", "field", "potential", "grid",
      "corrections"}},
    {"pressure", "Pressure and density", {"flux", "beta", "mu", "epsilon", "b", "grid"}},
    {"magnetization", "Magnetization by formula and by differentiating the pressure",
     {"flux", "beta", "mu", "grid", "method"}},
    {"hall", "Leading-order Hall current for filled bands", {"flux", "filled", "field", "grid"}},
    {"verify-equilibrium", "Finite-torus traces against the corrected phase-space integral",
     {"flux", "b", "sizes", "grid", "f_center", "f_width", "dense_limit"}},
    {"verify-egorov", "Wavepacket dynamics against the corrected classical flow",
     {"flux", "band", "b", "t_final", "sizes", "r0", "kappa0", "grid", "r_nodes", "kappa_nodes", "dt", "potential",
      "width_c"}},
    {"verify-identities", "Randomized checks of the geometric identities", {"flux", "samples", "epsilon", "b", "grid"}},
};

const Command& find_command(const std::string& name) {
    for (const Command& c : kCommands)
        if (c.name == name) return c;
    throw ConfigError("unknown command: " + name);
}

// ---- output --------------------------------------------------------------------------

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir.empty() ? "." : dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    void file(const std::string& name, const std::string& contents) {
        write_file_atomic((dir_ / name).string(), contents);
        written_.push_back(name);
    }
    void summary(const std::string& name, json s) {
        s["files"] = written_;
        s["files"].push_back(name);
        const std::string text = s.dump(2) + "\n";
        write_file_atomic((dir_ / name).string(), text);
        std::cout << text;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::string> written_;
};

json fit_json(const LineFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

json vec_json(const Vec2& v) { return json::array({v[0], v[1]}); }

// ---- commands ------------------------------------------------------------------------

int run_butterfly(const Params& p, Output& out) {
    const int qmax = p.integer("qmax", 10);
    const int n = p.integer("grid", 4);
    if (qmax < 1 || qmax > 200) throw ConfigError("qmax must lie in 1..200");
    if (n < 1) throw ConfigError("grid must be positive");
    std::vector<FluxRational> fluxes;
    for (int q = 1; q <= qmax; ++q)
        for (int pp = 0; pp < q; ++pp)
            if (std::gcd(pp, q) == 1) fluxes.push_back(FluxRational::make(pp, q));
    std::sort(fluxes.begin(), fluxes.end(), [](const FluxRational& a, const FluxRational& b) { return a.p * b.q < b.p * a.q; });

    std::vector<std::vector<double>> spectra(fluxes.size());
    parallel_for(static_cast<long>(fluxes.size()), [&](long i) {
        const FluxRational& f = fluxes[i];
        const double h = 2 * M_PI / static_cast<double>(f.q) / n;
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c) {
                Eigen::SelfAdjointEigenSolver<CMat> es(bloch_matrix(f, Vec2(a * h, c * h)), Eigen::EigenvaluesOnly);
                for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) spectra[i].push_back(es.eigenvalues()[j]);
            }
        std::sort(spectra[i].begin(), spectra[i].end());
    });
    CsvBuilder csv({"B", "energy"});
    json list = json::array();
    for (size_t i = 0; i < fluxes.size(); ++i) {
        for (double e : spectra[i]) csv.row({fluxes[i].B0(), e});
        list.push_back({{"flux", fluxes[i].str()}, {"B", fluxes[i].B0()}, {"min", spectra[i].front()}, {"max", spectra[i].back()}});
    }
    out.file("butterfly.csv", csv.str());
    out.summary("butterfly.json", {{"command", "butterfly"}, {"qmax", qmax}, {"grid", n}, {"fractions", list}});
    return 0;
}

int run_bands(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int n = p.integer("grid", 64);
    if (n < 2) throw ConfigError("grid must be at least 2");
    std::vector<std::string> head{"k1", "k2"};
    for (long j = 1; j <= f.q; ++j) head.push_back("e" + std::to_string(j));
    CsvBuilder csv(head);
    const double h = 2 * M_PI / static_cast<double>(f.q) / n;
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            Eigen::SelfAdjointEigenSolver<CMat> es(bloch_matrix(f, Vec2(a * h, c * h)), Eigen::EigenvaluesOnly);
            std::vector<double> row{a * h, c * h};
            for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) row.push_back(es.eigenvalues()[j]);
            csv.row(row);
        }
    GapReport g = gap_check(f, n);
    json gaps = json::array();
    for (size_t j = 0; j < g.min_gap.size(); ++j)
        gaps.push_back({{"lower_band", j + 1}, {"min_gap", g.min_gap[j]}, {"at", vec_json(g.argmin[j])}});
    out.file("bands.csv", csv.str());
    out.summary("bands.json", {{"command", "bands"}, {"flux", f.str()}, {"grid", n}, {"gaps", gaps},
                               {"even_middle_pair", g.even_middle_pair}});
    return 0;
}

int run_curvature(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int j = p.band(f);
    const int n = p.integer("grid", 64);
    BandData d = band_data(f, j, n);
    out.file("curvature_band" + std::to_string(j + 1) + ".csv", band_map_csv(d, GridField::curvature));
    const double integral = std::accumulate(d.curvature.begin(), d.curvature.end(), 0.0) * f.q / (2 * M_PI) *
                            std::pow(2 * M_PI / f.q / n, 2);
    out.summary("curvature.json", {{"command", "curvature"}, {"flux", f.str()}, {"band", j + 1}, {"grid", n},
                                   {"chern_quadrature", integral}, {"max_residual", d.max_residual}});
    return 0;
}

int run_moment(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int j = p.band(f);
    const int n = p.integer("grid", 64);
    const std::string form_name = p.text("form", "standard");
    const MomentForm form = parse_moment_form(form_name);
    CsvBuilder csv({"k1", "k2", "value"});
    const double h = 2 * M_PI / static_cast<double>(f.q) / n;
    double lo = INFINITY, hi = -INFINITY;
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
            const double m = magnetic_moment(f, j, Vec2(a * h, c * h), form);
            lo = std::min(lo, m);
            hi = std::max(hi, m);
            csv.row({a * h, c * h, m});
        }
    out.file("moment_band" + std::to_string(j + 1) + ".csv", csv.str());
    out.summary("moment.json", {{"command", "moment"}, {"flux", f.str()}, {"band", j + 1}, {"grid", n},
                                {"form", form_name}, {"min", lo}, {"max", hi}});
    return 0;
}

int run_chern(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int n = p.integer("grid", 60);
    std::vector<int> bands;
    if (p.has("band"))
        bands.push_back(p.band(f));
    else
        for (int j = 0; j < f.q; ++j) bands.push_back(j);
    json list = json::array();
    int sum = 0;
    for (int j : bands) {
        ChernResult c = chern_number(f, j, n);
        sum += c.chern;
        list.push_back({{"band", j + 1}, {"chern", c.chern}, {"residual", c.residual}, {"grid", n}});
    }
    json s{{"command", "chern"}, {"flux", f.str()}, {"grid", n}, {"bands", list}};
    if (!p.has("band")) s["sum"] = sum;
    out.summary("chern.json", s);
    return 0;
}

int run_trajectory(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int j = p.band(f);
    ClassicalOptions opts;
    opts.grid = p.integer("grid", kDefaultInterpolationGrid);
    opts.corrections = p.integer("corrections", 1) != 0;
    ClassicalSystem sys(f, j, p.number("epsilon", 0.0), p.number("b", 0.0), p.potential({}), opts);
    const Vec2 r0 = p.vec2("r0", Vec2::Zero()), k0 = p.vec2("kappa0", Vec2(0.3, 0.2));
    const Scheme scheme = parse_scheme(p.text("scheme", "rk4"));
    const FieldMode mode = parse_field_mode(p.text("mode", "exact"));
    Trajectory t = integrate(sys, Vec4(r0[0], r0[1], k0[0], k0[1]), p.number("t_final", 10.0), p.number("dt", 0.01),
                             scheme, mode);
    double drift = 0.0;
    for (double e : t.energy) drift = std::max(drift, std::abs(e - t.energy.front()));
    out.file("trajectory.csv", trajectory_csv(t, f));
    const Vec4& z = t.states.back();
    out.summary("trajectory.json", {{"command", "trajectory"}, {"flux", f.str()}, {"band", j + 1},
                                    {"steps", t.times.size() - 1}, {"energy_drift", drift},
                                    {"final", json::array({z[0], z[1], z[2], z[3]})}});
    return 0;
}

ThermoParams thermo_params(const Params& p) {
    ThermoParams t;
    t.beta = p.number("beta", 1.0);
    t.mu = p.number("mu", 0.0);
    t.epsilon = p.number("epsilon", 0.0);
    t.b = p.number("b", 0.0);
    t.grid = p.integer("grid", 64);
    t.validate();
    return t;
}

int run_pressure(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const ThermoParams t = thermo_params(p);
    const double pr = pressure(f, t), n = density(f, t);
    ThermoParams at0 = t;
    at0.epsilon = 0.0;
    const double m = magnetization(f, at0, MagnetizationMethod::formula);
    CsvBuilder csv({"B", "beta", "mu", "pressure", "density", "magnetization"});
    csv.row({f.B0() + t.epsilon * t.b, t.beta, t.mu, pr, n, m});
    out.file("thermo.csv", csv.str());
    out.summary("pressure.json", {{"command", "pressure"}, {"flux", f.str()}, {"beta", t.beta}, {"mu", t.mu},
                                  {"epsilon", t.epsilon}, {"b", t.b}, {"pressure", pr}, {"density", n},
                                  {"magnetization_at_B0", m}});
    return 0;
}

int run_magnetization(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const ThermoParams t = thermo_params(p);
    const std::string method = p.text("method", "both");
    json s{{"command", "magnetization"}, {"flux", f.str()}, {"beta", t.beta}, {"mu", t.mu}};
    double formula = NAN, fd = NAN;
    if (method == "both" || parse_magnetization_method(method) == MagnetizationMethod::formula)
        s["formula"] = formula = magnetization(f, t, MagnetizationMethod::formula);
    if (method == "both" || parse_magnetization_method(method) == MagnetizationMethod::finite_difference)
        s["finite_difference"] = fd = magnetization(f, t, MagnetizationMethod::finite_difference);
    if (method == "both") s["difference"] = std::abs(formula - fd);
    CsvBuilder csv({"B", "beta", "mu", "pressure", "density", "magnetization"});
    csv.row({f.B0(), t.beta, t.mu, pressure(f, t), density(f, t), method == "both" || std::isfinite(formula) ? formula : fd});
    out.file("thermo.csv", csv.str());
    out.summary("magnetization.json", s);
    return 0;
}

int run_hall(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int m = p.integer("filled", 1);
    HallResult h = hall_current(f, m, p.vec2("field", Vec2(1.0, 0.0)), p.integer("grid", kHallChernGrid));
    json s{{"command", "hall"}, {"flux", f.str()}, {"filled", m}, {"field", vec_json(p.vec2("field", Vec2(1.0, 0.0)))},
           {"current", vec_json(h.current)}, {"chern", h.chern}};
    if (std::isfinite(h.min_gap)) s["min_gap"] = h.min_gap;
    out.summary("hall.json", s);
    return 0;
}

std::vector<int> int_list(const Params& p, const std::string& key, const std::vector<int>& def) {
    std::vector<double> d(def.begin(), def.end());
    std::vector<int> out;
    for (double x : p.list(key, d)) {
        if (x != std::floor(x) || x <= 0) throw ConfigError(key + " must hold positive integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

int run_verify_equilibrium(const Params& p, Output& out) {
    EquilibriumScenario sc;
    sc.flux0 = p.flux();
    sc.b = p.number("b", 1.0);
    sc.sizes = int_list(p, "sizes", sc.sizes);
    sc.grid = p.integer("grid", sc.grid);
    sc.f_center = p.number("f_center", sc.f_center);
    sc.f_width = p.number("f_width", sc.f_width);
    sc.dense_limit = p.integer("dense_limit", static_cast<int>(sc.dense_limit));
    EquilibriumReport r = equilibrium_compare(sc);
    const bool pass = r.fit.slope >= 1.7 && r.fit.slope <= 2.3 && r.fit_uncorrected.slope >= 0.8 &&
                      r.fit_uncorrected.slope <= 1.2;
    out.file("equilibrium.csv", r.csv());
    out.summary("equilibrium.json", {{"command", "verify-equilibrium"}, {"flux", sc.flux0.str()}, {"b", sc.b},
                                     {"fit", fit_json(r.fit)}, {"fit_uncorrected", fit_json(r.fit_uncorrected)},
                                     {"pass", pass}});
    return pass ? 0 : 5;
}

int run_verify_egorov(const Params& p, Output& out) {
    EgorovScenario sc = EgorovScenario::standard();
    sc.flux0 = p.flux();
    sc.band = p.band(sc.flux0);
    sc.b = p.number("b", sc.b);
    sc.t = p.number("t_final", sc.t);
    sc.sizes = int_list(p, "sizes", sc.sizes);
    sc.r0 = p.vec2("r0", sc.r0);
    sc.kappa0 = p.vec2("kappa0", sc.kappa0);
    sc.grid = p.integer("grid", sc.grid);
    sc.r_nodes = p.integer("r_nodes", sc.r_nodes);
    sc.kappa_nodes = p.integer("kappa_nodes", sc.kappa_nodes);
    sc.flow_dt = p.number("dt", sc.flow_dt);
    sc.width_c = p.number("width_c", sc.width_c);
    sc.potential = p.potential(sc.potential);
    EgorovReport r = egorov_compare(sc);
    const bool pass = r.fit.slope >= 1.5 && r.fit_uncorrected.slope <= 1.2;
    out.file("egorov.csv", r.csv());
    out.summary("egorov.json", {{"command", "verify-egorov"}, {"flux", sc.flux0.str()}, {"b", sc.b}, {"t", sc.t},
                                {"observables", r.observables}, {"fit", fit_json(r.fit)},
                                {"fit_uncorrected", fit_json(r.fit_uncorrected)}, {"pass", pass}});
    return pass ? 0 : 5;
}

int run_verify_identities(const Params& p, Output& out) {
    const FluxRational f = p.flux();
    const int samples = p.integer("samples", 100);
    const double eps = p.number("epsilon", 0.05), b = p.number("b", 1.0);
    if (samples < 1) throw ConfigError("samples must be positive");
    std::mt19937_64 rng(static_cast<unsigned long long>(p.integer("seed", 0)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ClassicalSystem> systems;
    ClassicalOptions opts;
    opts.grid = p.integer("grid", kDefaultInterpolationGrid);
    for (int j = 0; j < f.q; ++j) systems.emplace_back(f, j, eps, b, PotentialSpec{}, opts);

    const std::vector<std::string> names{"moment_forms", "pfaffian", "closedness", "divergence", "defect",
                                         "defect_mutated", "tau_equivariance", "curvature_sum", "projection_offdiagonal"};
    const std::map<std::string, double> limits{{"moment_forms", 1e-10}, {"pfaffian", 1e-13}, {"closedness", 1e-6},
                                               {"divergence", 1e-6},    {"defect", 1e-8},    {"tau_equivariance", 1e-12},
                                               {"curvature_sum", 1e-10}, {"projection_offdiagonal", 1e-12}};
    std::vector<std::string> head{"sample", "k1", "k2", "r1", "r2"};
    head.insert(head.end(), names.begin(), names.end());
    CsvBuilder csv(head);
    std::map<std::string, double> worst;
    for (const auto& n : names) worst[n] = 0.0;
    const double period = 2 * M_PI;
    for (int s = 0; s < samples; ++s) {
        const Vec2 k(period * unit(rng), period * unit(rng));
        const Vec2 r(4 * unit(rng) - 2, 4 * unit(rng) - 2);
        std::map<std::string, double> v;
        for (const auto& n : names) v[n] = 0.0;
        double csum = 0.0;
        for (int j = 0; j < f.q; ++j) {
            const double m = magnetic_moment(f, j, k, MomentForm::def);
            for (auto form : {MomentForm::standard, MomentForm::alt1, MomentForm::alt2, MomentForm::alt3})
                v["moment_forms"] = std::max(v["moment_forms"], std::abs(magnetic_moment(f, j, k, form) - m));
            const Vec4 z(r[0], r[1], k[0], k[1]);
            const ClassicalSystem& sys = systems[j];
            v["pfaffian"] = std::max(v["pfaffian"], std::abs(std::abs(pfaffian(sys.symplectic_form(z))) - sys.liouville_density(k)));
            v["closedness"] = std::max(v["closedness"], sys.closedness_residual(z, 1e-4));
            v["divergence"] = std::max(v["divergence"], sys.divergence_residual(z, 2e-5));
            v["defect"] = std::max(v["defect"], hsc_defect_order1(f, j, b, k, r).cwiseAbs().maxCoeff());
            v["defect_mutated"] = std::max(v["defect_mutated"], hsc_defect_order1(f, j, b, k, r, {}, 1.1).cwiseAbs().maxCoeff());
            BandPoint bp = band_point(f, j, k);
            csum += bp.curvature;
            for (int a = 0; a < 2; ++a)
                v["projection_offdiagonal"] = std::max(
                    v["projection_offdiagonal"], (bp.projection * bp.dprojection[a] * bp.projection).cwiseAbs().maxCoeff());
        }
        v["curvature_sum"] = std::abs(csum);
        v["tau_equivariance"] = std::max(tau_equivariance_residual(f, k, Vec2(2 * M_PI / f.q, 0)),
                                         tau_equivariance_residual(f, k, Vec2(0, 2 * M_PI)));
        std::vector<double> row{static_cast<double>(s), k[0], k[1], r[0], r[1]};
        for (const auto& n : names) {
            row.push_back(v[n]);
            worst[n] = std::max(worst[n], v[n]);
        }
        csv.row(row);
    }
    json checks = json::object();
    bool pass = true;
    for (const auto& n : names) {
        bool ok;
        if (n == "defect_mutated") {
            ok = f.q == 1 || worst[n] > 1e-3;
            checks[n] = {{"max", worst[n]}, {"min_required", 1e-3}, {"pass", ok}};
        } else {
            ok = worst[n] <= limits.at(n);
            checks[n] = {{"max", worst[n]}, {"limit", limits.at(n)}, {"pass", ok}};
        }
        pass = pass && ok;
    }
    out.file("identities.csv", csv.str());
    out.summary("identities.json", {{"command", "verify-identities"}, {"flux", f.str()}, {"samples", samples},
                                    {"seed", p.integer("seed", 0)}, {"checks", checks}, {"pass", pass}});
    return pass ? 0 : 5;
}

int dispatch(const std::string& name, const Params& p) {
    Output out(p.text("out", "."));
    if (name == "butterfly") return run_butterfly(p, out);
    if (name == "bands") return run_bands(p, out);
    if (name == "curvature") return run_curvature(p, out);
    if (name == "moment") return run_moment(p, out);
    if (name == "chern") return run_chern(p, out);
    if (name == "trajectory") return run_trajectory(p, out);
    if (name == "pressure") return run_pressure(p, out);
    if (name == "magnetization") return run_magnetization(p, out);
    if (name == "hall") return run_hall(p, out);
    if (name == "verify-equilibrium") return run_verify_equilibrium(p, out);
    if (name == "verify-egorov") return run_verify_egorov(p, out);
    if (name == "verify-identities") return run_verify_identities(p, out);
    throw ConfigError("unknown command: " + name);
}

// Config file: {"command": ..., "parameters": {...}, "output_dir": ..., "seed": ...}.
void merge_config(const std::string& path, std::string& command, Params& p) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> top{"command", "parameters", "output_dir", "seed"};
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
        if (!top.count(it.key())) throw ConfigError("unknown config key: " + it.key());
    if (cfg.contains("command")) {
        if (!cfg["command"].is_string()) throw ConfigError("command must be a string");
        const std::string c = cfg["command"].get<std::string>();
        if (command != "run" && c != command) throw ConfigError("config command " + c + " does not match " + command);
        command = c;
    }
    if (command == "run") throw ConfigError("the run command needs \"command\" in the config");
    if (cfg.contains("parameters")) {
        if (!cfg["parameters"].is_object()) throw ConfigError("parameters must be an object");
        for (auto it = cfg["parameters"].begin(); it != cfg["parameters"].end(); ++it) p.values[it.key()] = it.value();
    }
    if (cfg.contains("output_dir")) p.values["out"] = cfg["output_dir"];
    if (cfg.contains("seed")) p.values["seed"] = cfg["seed"];
}

void check_keys(const std::string& command, const Params& p) {
    const Command& c = find_command(command);
    std::set<std::string> allowed(c.keys.begin(), c.keys.end());
    allowed.insert(kCommon.begin(), kCommon.end());
    for (auto it = p.values.begin(); it != p.values.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("parameter " + it.key() + " does not apply to " + command);
}

std::string key_of(const std::string& flag) {
    std::string k = flag;
    std::replace(k.begin(), k.end(), '-', '_');
    return k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semiclassical magnetic Bloch bands: geometry, flows, thermodynamics and lattice checks"};
    app.require_subcommand(1);
    std::map<std::string, std::string> raw;
    std::string config;

    const std::map<std::string, std::string> flag_help{
        {"flux", "background flux p/q"},
        {"epsilon", "field-increment scale"},
        {"b", "field increment, B = B0 + eps b"},
        {"beta", "inverse temperature"},
        {"mu", "chemical potential"},
        {"grid", "grid size N"},
        {"band", "band index, 1 = lowest"},
        {"t-final", "final time"},
        {"dt", "time step"},
        {"out", "output directory"},
        {"seed", "random seed"},
        {"qmax", "largest flux denominator"},
        {"form", "moment form: standard, def, alt1, alt2, alt3"},
        {"scheme", "rk4 or implicit_midpoint"},
        {"mode", "exact or truncated"},
        {"r0", "initial position r1,r2"},
        {"kappa0", "initial kinetic momentum k1,k2"},
        {"field", "electric field E1,E2"},
        {"corrections", "1 keeps Omega and M, 0 drops them"},
        {"method", "formula, finite_difference or both"},
        {"filled", "number of filled bands"},
        {"sizes", "lattice sizes L, comma separated"},
        {"f-center", "center of the Gaussian test function"},
        {"f-width", "width of the Gaussian test function"},
        {"dense-limit", "largest torus diagonalized densely"},
        {"r-nodes", "Chebyshev nodes per position axis"},
        {"kappa-nodes", "Fourier nodes per momentum axis"},
        {"width-c", "packet width constant, sigma = c / sqrt(eps) sites"},
        {"samples", "number of random sample points"},
    };

    std::vector<CLI::App*> subs;
    auto add_flags = [&](CLI::App* sub, const std::vector<std::string>& keys) {
        std::vector<std::string> all = keys;
        all.insert(all.end(), kCommon.begin(), kCommon.end());
        for (const std::string& k : all) {
            if (k == "potential") continue;
            std::string flag = k;
            std::replace(flag.begin(), flag.end(), '_', '-');
            auto it = flag_help.find(flag);
            sub->add_option("--" + flag, raw[sub->get_name() + ":" + flag], it == flag_help.end() ? "" : it->second);
        }
        sub->add_option("--config", config, "JSON config; its values override flags");
    };
    for (const Command& c : kCommands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_flags(sub, c.keys);
        subs.push_back(sub);
    }
    CLI::App* run = app.add_subcommand("run", "Run the command named in a JSON config");
    run->add_option("--config", config, "JSON config")->required();
    subs.push_back(run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::string command;
        Params p;
        for (CLI::App* sub : subs) {
            if (!sub->parsed()) continue;
            command = sub->get_name();
            for (CLI::Option* opt : sub->get_options()) {
                const std::string name = opt->get_name(false, true);
                if (name.rfind("--", 0) != 0 || name == "--config" || name == "--help" || opt->count() == 0) continue;
                const std::string flag = name.substr(2);
                p.values[key_of(flag)] = raw[command + ":" + flag];
            }
        }
        if (!config.empty()) merge_config(config, command, p);
        check_keys(command, p);
        return dispatch(command, p);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
}
