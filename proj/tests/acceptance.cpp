// Acceptance gate: one PASS/FAIL line per criterion.
// Usage: acceptance <path to magbloch-cli> [work dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magbloch/bands.hpp"
#include "magbloch/classical.hpp"
#include "magbloch/flow.hpp"
#include "magbloch/quantum.hpp"
#include "magbloch/symbols.hpp"
#include "magbloch/thermo.hpp"

using namespace magbloch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::mt19937_64 rng(20240611);

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec2 random_k() { return Vec2(uniform(0, 2 * M_PI), uniform(0, 2 * M_PI)); }
Vec2 random_r() { return Vec2(uniform(-3, 3), uniform(-3, 3)); }

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

const FluxRational kThird = FluxRational::make(1, 3);
const FluxRational kTwoFifths = FluxRational::make(2, 5);

Outcome chern_integrality() {
    Outcome o;
    int sum = 0;
    double worst_res = 0.0, worst_quad = 0.0;
    for (int j = 0; j < 3; ++j) {
        ChernResult c = chern_number(kThird, j, 60);
        sum += c.chern;
        worst_res = std::max(worst_res, c.residual);
        worst_quad = std::max(worst_quad, std::abs(chern_quadrature(kThird, j, 60) - c.chern));
    }
    o.pass = worst_res <= 1e-9 && sum == 0 && worst_quad <= 1e-6;
    o.detail = "residual " + sci(worst_res) + ", sum " + std::to_string(sum) + ", quadrature gap " + sci(worst_quad);
    return o;
}

Outcome moment_forms() {
    Outcome o;
    double worst = 0.0;
    for (const FluxRational& f : {kThird, kTwoFifths})
        for (int i = 0; i < 100; ++i) {
            const Vec2 k = random_k();
            for (int j = 0; j < f.q; ++j) {
                const double ref = magnetic_moment(f, j, k, MomentForm::def);
                for (MomentForm m : {MomentForm::standard, MomentForm::alt1, MomentForm::alt2, MomentForm::alt3})
                    worst = std::max(worst, std::abs(magnetic_moment(f, j, k, m) - ref));
            }
        }
    o.pass = worst <= 1e-10;
    o.detail = "max spread " + sci(worst);
    return o;
}

Outcome symplectic_structure() {
    Outcome o;
    const double eps = 0.05, b = 1.0;
    const PotentialSpec v = PotentialSpec::cosine(0.3, 1, 0, 0.2) + PotentialSpec::cosine(0.2, 0, 1, 0.0);
    std::vector<ClassicalSystem> systems;
    for (int j = 0; j < 3; ++j) systems.emplace_back(kThird, j, eps, b, v);
    double closed = 0.0, pf = 0.0, div = 0.0;
    for (int i = 0; i < 100; ++i) {
        const ClassicalSystem& sys = systems[i % 3];
        const Vec2 r = random_r(), kappa = random_k();
        const Vec4 z(r[0], r[1], kappa[0], kappa[1]);
        closed = std::max(closed, sys.closedness_residual(z, 1e-4));
        const double omega = berry_curvature(kThird, sys.band(), kappa);
        pf = std::max(pf, std::abs(std::abs(pfaffian(symplectic_matrix(eps, b, omega))) - (1 + eps * b * omega)));
        div = std::max(div, sys.divergence_residual(z, 1e-4));
    }
    o.pass = closed <= 1e-6 && pf <= 1e-13 && div <= 1e-6;
    o.detail = "closedness " + sci(closed) + ", pfaffian " + sci(pf) + ", divergence " + sci(div);
    return o;
}

Outcome defect_cancellation() {
    Outcome o;
    const PotentialSpec v = PotentialSpec::cosine(0.3, 1, 0, 0.2) + PotentialSpec::cosine(0.2, 0, 1, 0.0);
    double worst = 0.0, mutated = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Vec2 k = random_k(), r = random_r();
        const int j = i % 3;
        worst = std::max(worst, max_abs(hsc_defect_order1(kThird, j, 1.0, k, r, v)));
        mutated = std::max(mutated, max_abs(hsc_defect_order1(kThird, j, 1.0, k, r, v, 1.1)));
    }
    o.pass = worst <= 1e-8 && mutated > 1e-3;
    o.detail = "defect " + sci(worst) + ", mutated " + sci(mutated);
    return o;
}

Outcome flow_quality() {
    Outcome o;
    ClassicalSystem free(kThird, 0, 0.05, 1.0);
    Trajectory t = integrate(free, Vec4(0.1, -0.3, 0.4, 0.9), 100.0, 0.01, Scheme::rk4, FieldMode::exact);
    double drift = 0.0;
    for (double e : t.energy) drift = std::max(drift, std::abs(e - t.energy.front()));

    const Vec4 z(0.2, -0.4, 0.7, 1.1);
    const PotentialSpec v = PotentialSpec::cosine(0.3, 1, 0, 0.0);
    std::vector<double> eps{0.02, 0.01, 0.005}, diff;
    for (double e : eps) {
        ClassicalSystem sys(kThird, 0, e, 1.0, v);
        diff.push_back((sys.vector_field(z) - sys.vector_field(z, FieldMode::truncated)).norm());
    }
    const double slope = fit_loglog(eps, diff).slope;
    o.pass = drift <= 1e-8 && std::abs(slope - 2.0) <= 0.2;
    o.detail = "energy drift " + sci(drift) + ", truncation slope " + sci(slope);
    return o;
}

Outcome equilibrium() {
    Outcome o;
    EquilibriumScenario sc;
    EquilibriumReport r = equilibrium_compare(sc);
    o.pass = r.fit.slope >= 1.7 && r.fit.slope <= 2.3 && r.fit_uncorrected.slope >= 0.8 && r.fit_uncorrected.slope <= 1.2;
    o.detail = "slope " + sci(r.fit.slope) + ", ablated slope " + sci(r.fit_uncorrected.slope);
    return o;
}

Outcome egorov() {
    Outcome o;
    EgorovReport r = egorov_compare(EgorovScenario::standard());
    o.pass = r.fit.slope >= 1.5 && r.fit_uncorrected.slope <= 1.2;
    o.detail = "slope " + sci(r.fit.slope) + ", ablated slope " + sci(r.fit_uncorrected.slope);
    return o;
}

Outcome thermodynamics() {
    Outcome o;
    ThermoParams p;
    p.beta = 5.0;
    double mag = 0.0;
    BandTable t = band_table(kThird, 64);
    for (double mu : {-2.0, 0.0, 0.7, 2.2}) {
        p.mu = mu;
        mag = std::max(mag, std::abs(magnetization(t, p, MagnetizationMethod::formula) -
                                     magnetization(t, p, MagnetizationMethod::finite_difference)));
    }
    double fill = 0.0;
    for (double eps : {0.0, 0.03, 0.08}) {
        ThermoParams full;
        full.beta = 40.0;
        full.mu = 10.0;
        full.epsilon = eps;
        full.b = 1.0;
        fill = std::max(fill, std::abs(density(t, full) - 1.0));
    }
    const double top0 = *std::max_element(t.bands[0].energy.begin(), t.bands[0].energy.end());
    const double bottom1 = *std::min_element(t.bands[1].energy.begin(), t.bands[1].energy.end());
    const int c1 = chern_number(kThird, 0, 60).chern;
    double streda = 0.0;
    for (double eps : {0.0, 0.01, 0.02, 0.04})
        streda = std::max(streda, std::abs(density_zero_temperature(t, 0.5 * (top0 + bottom1), eps, 1.0) -
                                           (1.0 / 3.0 + eps * c1 / (2 * M_PI))));
    o.pass = mag <= 1e-6 && fill <= 1e-8 && streda <= 1e-6;
    o.detail = "magnetization " + sci(mag) + ", full filling " + sci(fill) + ", Streda " + sci(streda);
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs each command twice into separate directories and compares every file byte for byte.
Outcome determinism(const std::string& cli, const fs::path& work) {
    Outcome o;
    if (cli.empty()) {
        o.pass = false;
        o.detail = "no CLI path given";
        return o;
    }
    fs::remove_all(work);
    fs::create_directories(work);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"chern", "chern --flux 1/3 --grid 60"},
        {"butterfly", "butterfly --qmax 8 --grid 3"},
        {"bands", "bands --flux 2/5 --grid 16"},
        {"moment", "moment --flux 1/3 --band 2 --grid 16"},
        {"trajectory", "trajectory --flux 1/3 --band 1 --epsilon 0.02 --b 1 --t-final 5 --dt 0.01"},
        {"pressure", "pressure --flux 1/3 --beta 5 --mu 0.3 --epsilon 0.02 --b 1"},
        {"magnetization", "magnetization --flux 1/3 --beta 5 --mu 0"},
        {"hall", "hall --flux 1/3 --filled 1 --field 1,0"},
        {"equilibrium", "verify-equilibrium --flux 1/3 --sizes 24,48"},
        {"identities", "verify-identities --flux 2/5 --epsilon 0.005 --grid 128 --samples 10 --seed 5"},
    };
    int compared = 0;
    for (const auto& [name, args] : commands) {
        for (const char* pass : {"a", "b"}) {
            const fs::path out = work / (name + "_" + pass);
            const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + out.string() + "\" > \"" +
                                    (work / (name + "_" + pass + ".stdout")).string() + "\"";
            const int code = std::system(cmd.c_str());
            if (code != 0) {
                o.pass = false;
                o.detail = name + " exited with status " + std::to_string(code);
                return o;
            }
        }
        const fs::path a = work / (name + "_a"), b = work / (name + "_b");
        for (const auto& entry : fs::directory_iterator(a)) {
            const fs::path other = b / entry.path().filename();
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
                o.pass = false;
                o.detail = name + ": " + entry.path().filename().string() + " differs";
                return o;
            }
            ++compared;
        }
        if (slurp(work / (name + "_a.stdout")).size() == 0) {
            o.pass = false;
            o.detail = name + ": empty summary";
            return o;
        }
    }
    o.detail = std::to_string(commands.size()) + " commands, " + std::to_string(compared) + " files identical";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::current_path() / "acceptance_work";

    struct Criterion {
        std::string name;
        double budget;  // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"chern integrality and sum rule", 10, chern_integrality},
        {"magnetic moment forms agree", 5, moment_forms},
        {"symplectic structure", 5, symplectic_structure},
        {"defect cancellation", 10, defect_cancellation},
        {"flow quality", 30, flow_quality},
        {"equilibrium second-order scaling", 600, equilibrium},
        {"egorov second-order scaling", 1200, egorov},
        {"thermodynamic consistency", 60, thermodynamics},
        {"cli determinism", 600, [&] { return determinism(cli, work); }},
    };

    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget;
        const bool ok = o.pass && in_time;
        if (!ok) ++failed;
        char timing[64];
        std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.budget);
        std::cout << (ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << c.name << ": " << o.detail << " (" << timing
                  << (in_time ? "" : ", over budget") << ")" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
