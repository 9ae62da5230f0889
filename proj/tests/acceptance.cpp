// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is the number of failed criteria (capped at 125).

#include "fpp/diagnostics.hpp"
#include "fpp/experiment.hpp"
#include "fpp/propagator.hpp"
#include "fpp/quadrature.hpp"
#include "fpp/solver.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace fpp;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::printf("%s  %-6s %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

// Runs a criterion body; an exception counts as a failure with its message.
void criterion(const std::string& id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("threw: ") + e.what());
    }
}

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fpp_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const Verdict* find_verdict(const RunSummary& s, const std::string& name) {
    for (const auto& v : s.verdicts)
        if (v.name == name) return &v;
    throw std::runtime_error("no verdict named " + name);
}

SpectralField random_field(const GridSpec& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(g.size());
    for (auto& x : v) x = nd(rng);
    return to_spectral(g, v);
}

SpectralField gaussian(const GridSpec& g, double a, double w) {
    return to_spectral(g, sample_physical(g, [=](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return a * std::exp(-r2 / (2 * w * w));
    }));
}

void c1() {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelParams p{1, 1.0, 1.0, 5.0};
    const auto g = gaussian_profile(1, 1.0, 1.0);
    const DecayFit a = oracle_decay_fit(g, 0.0, p, 1e2, 1e4, 24);
    const DecayFit b = oracle_decay_fit(g, 1.0, p, 1e2, 1e4, 24);
    const double secs = seconds_since(t0);
    const bool ok = std::abs(a.slope + 0.25) <= 0.02 && std::abs(b.slope + 0.75) <= 0.03 && secs < 10.0;
    report("1", ok, fmt("linear gain-regime oracle: l=0 slope %.4f (-0.25 +- 0.02), l=1 slope %.4f (-0.75 +- 0.03), %.2f s (< 10 s)",
                        a.slope, b.slope, secs));
}

void c2() {
    const ModelParams p{1, 1.0, 0.5, 3.0};
    const DecayFit f = oracle_decay_fit(gaussian_profile(1, 1.0, 1.0), 0.0, p, 1e2, 1e4, 24, Window::low());
    report("2", std::abs(f.slope + 0.5) <= 0.04, fmt("loss-regime low part, l=0: slope %.4f (-0.5 +- 0.04)", f.slope));
}

void c3() {
    struct Case {
        double l, alpha;
        int n;
    };
    const Case cases[] = {{0.0, 1.0, 1}, {1.0, 1.0, 1}, {0.0, 0.5, 1}, {0.5, 1.5, 2}};
    std::vector<double> ts{0.0};
    for (double t : log_spaced(1.0, 1e4, 16)) ts.push_back(t);
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const ModelParams p{c.n, 1.0, c.alpha, 2.0};
        const auto prof = gaussian_profile(c.n, 1.0, 1.0);
        const ProbeReport r = probe_low_frequency(prof, c.l, ts, p);
        const ProbeReport k = probe_low_frequency(prof, c.l, ts, p, default_cutoff_radius, 0.1);
        const bool pass = r.bounded && std::abs(r.tail_slope) <= 0.05 && !k.bounded;
        ok = ok && pass;
        detail += fmt(" (l=%g,a=%g,n=%d): slope %.4f, control %s;", c.l, c.alpha, c.n, r.tail_slope, k.bounded ? "bounded" : "unbounded");
    }
    report("3", ok, "low-frequency probe |tail slope| <= 0.05, control +0.1 unbounded:" + detail);
}

void c4() {
    const auto g = gaussian_profile(1, 1.0, 1.0);
    const ModelParams gain{1, 1.0, 1.0, 2.0};
    std::vector<double> lin;
    for (int i = 0; i < 20; ++i) lin.push_back(1.0 + i);
    const ProbeReport h = probe_high_frequency(g, 0.0, 0.0, lin, gain);
    const double need = 0.9 * sigma(2 * default_cutoff_radius, gain);
    const double rate = h.fitted_rate.value_or(0.0);
    report("4a", rate >= need,
           fmt("alpha=1 high-part exponential rate %.4f (>= 0.9 sigma(2R) = %.4f; sigma(R) = %.4f)", rate, need,
               sigma(default_cutoff_radius, gain)));

    const ModelParams loss{1, 1.0, 0.5, 2.0};
    const ProbeReport q = probe_high_frequency(g, 0.0, 1.0, log_spaced(1.0, 1e4, 24), loss);
    double worst = 0.0;
    for (double r : q.ratios) worst = std::max(worst, r);
    report("4b", q.bounded, fmt("alpha=0.5, beta=1 weighted high-part ratio on [1, 1e4]: max %.4g, tail slope %.4g", worst, q.tail_slope));
}

void c5() {
    const GridSpec g = make_grid(1, 8192, 2000.0);
    const ModelParams p{1, 1.0, 1.0, 5.0};
    const auto prof = gaussian_profile(1, 1.0, 1.0);
    DataSpec d;
    const SpectralField u0 = datum_field(d, g, 0);
    const double horizon = contamination_horizon(g, p);
    std::vector<double> ts{0.0};
    for (double t : log_spaced(1.0, horizon, 24)) ts.push_back(t);
    SolverConfig c;
    c.enable_nonlinearity = false;
    c.dt = 1.0;
    c.t_end = horizon;
    c.sample_times = ts;
    const Trajectory tr = solve(u0, p, c);
    const auto set = record(tr.times, tr.fields, std::vector<double>{0.0});
    const NormSeries* s = find_series(set, {0.0, NormType::seminorm, Component::full});
    double worst = 0.0;
    for (std::size_t i = 0; i < s->times.size(); ++i) {
        const double o = radial_weighted_l2(prof, 0.0, s->times[i], p);
        worst = std::max(worst, std::abs(s->values[i] - o) / o);
    }
    report("5", worst <= 1e-4,
           fmt("periodic linear run L=2000 N=8192 vs oracle, %zu samples up to t=%.4g: max relative gap %.3g (<= 1e-4)",
               s->times.size(), horizon, worst));
}

void c6() {
    const GridSpec g = make_grid(1, 128, 20 * std::numbers::pi);
    const ModelParams p{1, 1.0, 1.0, 1.0};
    const auto u0 = gaussian(g, 0.3, 2.0);
    std::vector<SpectralField> r;
    for (double dt : {0.1, 0.05, 0.025}) {
        SolverConfig c;
        c.dt = dt;
        c.t_end = 2.0;
        r.push_back(solve(u0, p, c).final_state.field);
    }
    const double order = std::log2(sobolev_seminorm(r[0] - r[1], 0.0) / sobolev_seminorm(r[1] - r[2], 0.0));
    report("6", order >= 1.7 && order <= 2.3, fmt("ETD2 observed order %.4f with dt = 0.1, 0.05, 0.025 (in [1.7, 2.3])", order));
}

void c7() {
    const GridSpec g = make_grid(1, 128, 20 * std::numbers::pi);
    const ModelParams p{1, 1.0, 1.0, 1.0};
    SolverConfig c;
    c.dt = 0.01;
    c.t_end = 2.0;
    const double nl = std::abs(energy_balance_residual(solve(gaussian(g, 0.1, 2.0), p, c).final_state.ledger));

    const GridSpec g2 = make_grid(2, 32, 30.0);
    const ModelParams p2{2, 1.0, 0.7, 2.0};
    SolverConfig lc;
    lc.enable_nonlinearity = false;
    lc.dt = 0.1;
    lc.t_end = 3.0;
    const double lin = std::abs(energy_balance_residual(solve(gaussian(g2, 1.0, 1.5), p2, lc).final_state.ledger));
    report("7", nl < 1e-6 && lin < 1e-8,
           fmt("energy balance relative residual: resolved nonlinear %.3g (< 1e-6), linear %.3g (< 1e-8)", nl, lin));
}

void c8(const fs::path& scenarios) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = load_config((scenarios / "nonlinear_smalldata.json").string());
    RunOptions o;
    o.output_dir = scratch("c8").string();
    const RunSummary s = run_scenario(cfg, o);
    const double secs = seconds_since(t0);
    const Verdict* slope = find_verdict(s, "solver_full_seminorm_l0_slope");
    const Verdict* mono = find_verdict(s, "functionals_nondecreasing");
    const Verdict* stab = find_verdict(s, "M1_over_E0_stable_under_doubling");
    const json& fj = s.document["results"]["functionals"];
    const double m1 = fj["M1_over_E0_full"].get<double>();
    const double fitted = slope->value + decay_exponent(0.0, cfg.model);
    // bounded: M1/E0 stays an O(1) multiple of the data size
    const bool bounded = std::isfinite(m1) && m1 <= 10.0;
    const bool ok = std::abs(fitted + 0.25) <= 0.05 && slope->pass && mono->pass && bounded && stab->pass && secs < 300.0;
    report("8", ok,
           fmt("nonlinear small data: slope %.4f on [10, 500] (-0.25 +- 0.05), M1 nondecreasing %s, M1/E0 %.4g (<= 10), "
               "doubling change %.3g (<= 0.05), %.1f s (< 300 s)",
               fitted, mono->pass ? "yes" : "no", m1, stab->value, secs));
}

void c9() {
    const ModelParams p{1, 1.0, 0.5, 3.0};
    const auto prof = power_tail_profile(1, 4.6, 1.0);
    bool ok = true;
    std::string detail;
    for (double l : {0.0, 0.5, 1.0, 1.5}) {
        const DecayFit f = oracle_decay_fit(prof, l, p, 1e2, 1e4, 24);
        ok = ok && std::abs(f.slope - decay_exponent(l, p)) <= 0.05;
        detail += fmt(" l=%g %.4f (%.4g);", l, f.slope, decay_exponent(l, p));
    }
    const DecayFit top = oracle_decay_fit(prof, 4.0, p, 1e2, 1e4, 24);
    const double gap = top.slope - decay_exponent(4.0, p);
    ok = ok && gap >= 0.1;
    report("9", ok, "regularity loss, power-tail H^4 data:" + detail + fmt(" l=4 %.4f, slower by %.4g (>= 0.1)", top.slope, gap));
}

void c10(const std::string& lab, const fs::path& scenarios) {
    // Parseval
    {
        const GridSpec g = make_grid(2, 48, 7.0);
        const auto f = random_field(g, 1);
        const auto u = to_physical(f);
        double phys = 0.0, spec = 0.0;
        for (double v : u) phys += v * v * g.cell_volume();
        const double w = std::pow(g.length, 2) / std::pow(48.0, 4);
        for (std::size_t i = 0; i < f.size(); ++i) spec += std::norm(f[i]) * w;
        const double e = std::abs(phys - spec) / phys;
        report("10a", e <= 1e-12, fmt("Parseval relative error %.3g (<= 1e-12)", e));
    }
    // split reconstruction
    {
        const GridSpec g = make_grid(2, 32, 40.0);
        const auto f = random_field(g, 2);
        const auto s = split_low_high(f, 0.5);
        double mag = 0.0, e = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            mag = std::max(mag, std::abs(f[i]));
            e = std::max(e, std::abs(s.low[i] + s.high[i] - f[i]));
        }
        report("10b", e <= 1e-15 * mag, fmt("split reconstruction max error %.3g relative to max mode (<= 1e-15)", e / mag));
    }
    // semigroup and multiplier composition
    {
        const GridSpec g = make_grid(2, 32, 20.0);
        const auto f = random_field(g, 3);
        const ModelParams p{2, 0.5, 0.4, 2.0};
        const auto a = propagate(propagate(f, 0.7, p), 2.9, p), b = propagate(f, 3.6, p);
        auto rel = [&](const SpectralField& x, const SpectralField& y) {
            double m = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double s = std::max(std::abs(x[i]), std::abs(y[i]));
                if (s > 0.0) m = std::max(m, std::abs(x[i] - y[i]) / s);
            }
            return m;
        };
        const double sg = rel(a, b);
        report("10c", sg <= 1e-13, fmt("semigroup G(0.7)G(2.9) = G(3.6), max per-mode relative error %.3g (<= 1e-13)", sg));
        auto m1 = [](double r) { return std::pow(r, 1.3); };
        auto m2 = [](double r) { return 1.0 / (1.0 + r * r); };
        const auto c = apply_radial_multiplier(apply_radial_multiplier(f, m1), m2);
        const auto d = apply_radial_multiplier(f, [&](double r) { return m1(r) * m2(r); });
        const double mc = rel(c, d);
        report("10d", mc <= 1e-13, fmt("multiplier composition, max per-mode relative error %.3g (<= 1e-13)", mc));
    }
    // phi limits
    {
        const bool ok = phi1(0.0) == 1.0 && phi2(0.0) == 0.5 && phi1(-1e-300) == 1.0 && phi2(-1e-300) == 0.5;
        report("10e", ok, fmt("phi1(0) = %.17g, phi2(0) = %.17g (exactly 1 and 1/2)", phi1(0.0), phi2(0.0)));
    }
    // tolerance halving
    {
        const ModelParams loss{1, 1.0, 0.5, 3.0};
        double worst = 0.0;
        for (const auto& prof : {gaussian_profile(1, 1.0, 1.0), power_tail_profile(1, 4.6, 1.0)})
            for (double t : {0.0, 1.0, 1e2, 1e4}) {
                const double a = radial_weighted_l2(prof, 0.5, t, loss, Window::full(), 1e-8);
                const double b = radial_weighted_l2(prof, 0.5, t, loss, Window::full(), 5e-9);
                worst = std::max(worst, std::abs(a - b) / b);
            }
        report("10f", worst <= 1e-8, fmt("oracle tol vs tol/2 max relative change %.3g (<= 1e-8)", worst));
    }
    // CLI determinism: a solver run with seeded noise and an oracle run
    {
        const fs::path dir = scratch("c10");
        json cfg = json::parse(R"({
          "scenario": "nonlinear-smalldata",
          "model": {"n": 1, "m": 1.0, "alpha": 1.0, "theta": 3},
          "grid": {"n": 1, "points_per_dim": 256, "box_length": 125.66370614359172},
          "data": {"type": "gaussian", "width": 2.0, "amplitude": 0.05, "s": 1.0, "noise": 1e-4},
          "run": {"dt": 0.1, "t_end": 40.0, "samples": 32},
          "fit": {"window": [2.0, 20.0], "l_list": [0.0, 1.0]},
          "seed": 5
        })");
        {
            std::ofstream out(dir / "solver.json");
            out << cfg.dump(2);
        }
        bool ok = true;
        int files = 0;
        for (const fs::path& config : {dir / "solver.json", scenarios / "regularity_loss.json"}) {
            for (const char* tag : {"a", "b"}) {
                const fs::path o = dir / config.stem() / tag;
                const std::string cmd = "\"" + lab + "\" run \"" + config.string() + "\" --quiet --output-dir \"" +
                                        o.string() + "\" > /dev/null 2>&1";
                const int rc = std::system(cmd.c_str());
                // verdicts may fail on the small box; the run must complete
                ok = ok && WIFEXITED(rc) && WEXITSTATUS(rc) <= 1;
            }
            if (!ok) break;
            const fs::path a = dir / config.stem() / "a", b = dir / config.stem() / "b";
            for (const auto& e : fs::directory_iterator(a / "series")) {
                ok = ok && slurp(e.path()) == slurp(b / "series" / e.path().filename());
                ++files;
            }
            ok = ok && slurp(a / "plot.py") == slurp(b / "plot.py");
        }
        report("10g", ok && files > 0, fmt("two CLI runs per config (solver with seeded noise, oracle): %d series files and plot.py byte-identical", files));
    }
}

}  // namespace

int main() {
    const fs::path scenarios = FPP_SCENARIO_DIR;
    const std::string lab = FPP_LAB_EXE;
    criterion("1", c1);
    criterion("2", c2);
    criterion("3", c3);
    criterion("4", c4);
    criterion("5", c5);
    criterion("6", c6);
    criterion("7", c7);
    criterion("8", [&] { c8(scenarios); });
    criterion("9", c9);
    criterion("10", [&] { c10(lab, scenarios); });
    std::printf("%d criteria failed\n", failures);
    return std::min(failures, 125);
}
