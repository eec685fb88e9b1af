// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lpvm/lpvm.hpp"

using namespace lpvm;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// pinned tolerances
constexpr double kWaveErr = 5e-4, kWaveRatio = 3.5, kWaveSeconds = 5.0;
constexpr double kStreamField = 1e-9, kStreamF = 1e-10, kStreamSeconds = 30.0;
constexpr int kMaxPicard = 30;
constexpr double kEnvelopeInflation = 1.10;
constexpr int kEnvelopeFit = 2;  // b fitted on u_1..u_2, checked from k = 3 on
constexpr double kMassDrift = 1e-4, kEnergyDrift = 1e-3, kEntropyDrift = 2e-3;
constexpr double kDriftRatio = 3.0, kRefSeconds = 600.0, kFineSeconds = 5400.0;
constexpr double kResidualFactor = 10.0;
constexpr double kTwoForm = 1e-8;
constexpr double kDivergenceRatio = 1.05;
constexpr double kT1Oracle = 0.519630171506620963;  // mpmath root, 30 digits
constexpr double kVlowOracle = 1.12366004029926662;
constexpr double kTheoryTol = 1e-9, kTheorySeconds = 1.0;
constexpr double kPoissonTol = 1e-8, kMassTol = 1e-8;
constexpr double kStationarityRatio = 16.0 / 1.25;  // fourth order, 25% slack
constexpr double kStabilityConst = 1e-3, kDistanceGrowth = 3.0;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunConfig load(const std::string& name) {
    std::ifstream in(std::string(LPVM_SOURCE_DIR) + "/configs/" + name);
    if (!in) throw std::runtime_error("cannot read config " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig refined(RunConfig c) {
    c.nx *= 2;
    c.np = 2 * c.np - 1;
    c.nt_per_window *= 2;
    return c;
}

struct Run {
    RunConfig cfg;
    SolveResult res;
    std::vector<double> n_ext;
    std::vector<DiagnosticsRow> rows;
    double seconds = 0.0;
};

Run simulate(const RunConfig& cfg) {
    Run r{cfg, {}, {}, {}, 0.0};
    const PhaseGrid grid = cfg.grid();
    const InitialData init = builtin_f0(cfg.f0, grid);
    r.n_ext = builtin_n_ext(cfg.n_ext, grid);
    const Stopwatch sw;
    r.res = solve(init.f0, wave_profile(cfg.A0, grid), wave_profile(cfg.Adot0, grid), r.n_ext,
                  solve_config(cfg));
    r.seconds = sw.seconds();
    if (r.res.completed)
        r.rows = diagnostic_rows(r.res, r.n_ext, cfg.model, make_generator(cfg.sigma));
    return r;
}

// sup over time slices of the time-dependent field
template <class Fn>
double sup_over_slices(const SolveResult& res, Fn fn) {
    double m = 0.0;
    for (std::size_t w = 0; w < res.windows.size(); ++w) {
        const FieldHistory& h = res.windows[w].fields;
        for (int s = 0; s < h.slices(); ++s) m = std::max(m, fn(h, s, res.window_start[w] + s * h.dt));
    }
    return m;
}

bool sentinel_quiet(const SolveResult& res) {
    for (const auto& w : res.windows)
        if (w.sentinel_first_warning >= 0) return false;
    for (const auto& a : res.abandoned)
        if (a.sentinel_first_warning >= 0) return false;
    return true;
}

double free_wave_error(const Run& r) {
    const PhaseGrid g = r.cfg.grid();
    return sup_over_slices(r.res, [&](const FieldHistory& h, int s, double t) {
        double e = 0.0;
        for (int j = 0; j < g.nx(); ++j)
            e = std::max(e, std::abs(h.A(s, j) - std::sin(g.x(j)) * std::cos(t)));
        return e;
    });
}

double relative_drift(const std::vector<DiagnosticsRow>& rows, double DiagnosticsRow::*col) {
    const double x0 = rows.front().*col;
    double d = 0.0;
    for (const auto& r : rows) d = std::max(d, std::abs(r.*col - x0));
    return d / std::abs(x0);
}

double two_form_gap(const std::vector<DiagnosticsRow>& rows) {
    double worst = 0.0;  // in units of the allowed gap
    for (const auto& r : rows)
        worst = std::max(worst, std::abs(r.WL_form1 - r.WL_form2) / (kTwoForm * (1 + std::abs(r.WL_form1))));
    return worst;
}

// continuity residual of f0 advected with F = 0 over one window at equal resolution
double free_streaming_continuity(const RunConfig& cfg) {
    const PhaseGrid grid = cfg.grid();
    const DistSlice f0 = builtin_f0(cfg.f0, grid).f0;
    const int nt = cfg.nt_per_window;
    const ForceSampler zero(grid, cfg.dt(), SpaceTimeArray(nt + 1, grid.nx(), 0.0));
    SpaceTimeArray n(nt + 1, grid.nx()), j(nt + 1, grid.nx());
    for (int s = 0; s <= nt; ++s) {
        const DistSlice f = transport_f0(f0, zero, s, cfg.model).f;
        n.set_slice(s, density(f));
        j.set_slice(s, flux(f, cfg.model));
    }
    return interior_max(continuity_residual(n, j, cfg.dt(), grid));
}

void criterion1() {
    RunConfig c = load("vacuum.conf");
    const Run ref = simulate(c);
    const Run fine = simulate(refined(c));
    const double e0 = free_wave_error(ref), e1 = free_wave_error(fine);
    const bool ok = ref.res.completed && fine.res.completed && e0 <= kWaveErr &&
                    e0 / e1 >= kWaveRatio && ref.seconds < kWaveSeconds;
    report(1, "free-wave exactness", ok,
           "err=" + fmt(e0) + " refined=" + fmt(e1) + " ratio=" + fmt(e0 / e1) +
               " runtime=" + fmt(ref.seconds) + "s");
}

Run criterion2() {
    Run r = simulate(load("free_streaming.conf"));
    const PhaseGrid g = r.cfg.grid();
    const DistSlice f0 = builtin_f0(r.cfg.f0, g).f0;
    const double supE = sup_over_slices(r.res, [](const FieldHistory& h, int s, double) { return max_abs(h.E[s]); });
    const double supA = sup_over_slices(r.res, [](const FieldHistory& h, int s, double) { return max_abs(h.A[s]); });
    double df = 0.0;
    for (const auto& w : r.res.windows)
        for (int s = 0; s < w.fields.slices(); ++s)
            df = std::max(df, max_abs_diff(w.dist[s].values(), f0.values()));
    const bool ok = r.res.completed && supE <= kStreamField && supA <= kStreamField &&
                    df <= kStreamF && r.seconds < kStreamSeconds;
    report(2, "free-streaming exactness", ok,
           "sup|E|=" + fmt(supE) + " sup|A|=" + fmt(supA) + " sup|f-f0|=" + fmt(df) +
               " runtime=" + fmt(r.seconds) + "s");
    return r;
}

void criterion3(const Run& r) {
    if (!r.res.completed || r.res.windows.size() != 1) {
        report(3, "fixed-point convergence", false, "run failed: " + r.res.failure);
        return;
    }
    const IterationTrace& tr = r.res.windows[0].trace;
    const auto u = tr.u();
    bool monotone = true;
    for (std::size_t k = 1; k < u.size(); ++k) monotone = monotone && u[k] < u[k - 1];
    const double T = r.cfg.window_length;
    const double b = kEnvelopeInflation * fit_telescope_rate(u, T, kEnvelopeFit);
    double worst = 0.0;  // u_k / envelope_k
    for (std::size_t k = 3; k < u.size(); ++k)
        worst = std::max(worst, u[k] / telescope_envelope(0.0, b, u[0], T, int(k)));
    const bool ok = tr.converged && tr.iterations_used <= kMaxPicard && monotone && worst <= 1.0 &&
                    r.res.abandoned.empty();
    report(3, "fixed-point convergence", ok,
           "iterations=" + std::to_string(tr.iterations_used) + " monotone=" +
               (monotone ? "yes" : "no") + " b=" + fmt(b) + " max u_k/envelope=" + fmt(worst) +
               " final u=" + fmt(u.back()));
}

void criterion4(const Run& ref, const Run& fine) {
    if (ref.rows.empty() || fine.rows.empty()) {
        report(4, "conservation", false, "run failed");
        return;
    }
    const double m0 = relative_drift(ref.rows, &DiagnosticsRow::mass);
    const double w0 = relative_drift(ref.rows, &DiagnosticsRow::W_total);
    const double s0 = relative_drift(ref.rows, &DiagnosticsRow::S_sigma);
    const double m1 = relative_drift(fine.rows, &DiagnosticsRow::mass);
    const double w1 = relative_drift(fine.rows, &DiagnosticsRow::W_total);
    const double s1 = relative_drift(fine.rows, &DiagnosticsRow::S_sigma);
    const bool ok = m0 <= kMassDrift && w0 <= kEnergyDrift && s0 <= kEntropyDrift &&
                    m0 / m1 >= kDriftRatio && w0 / w1 >= kDriftRatio && s0 / s1 >= kDriftRatio &&
                    ref.seconds < kRefSeconds && fine.seconds < kFineSeconds;
    report(4, "conservation", ok,
           "mass " + fmt(m0) + "->" + fmt(m1) + " (x" + fmt(m0 / m1) + "), W " + fmt(w0) + "->" +
               fmt(w1) + " (x" + fmt(w0 / w1) + "), S " + fmt(s0) + "->" + fmt(s1) + " (x" +
               fmt(s0 / s1) + "), runtime " + fmt(ref.seconds) + "s / " + fmt(fine.seconds) + "s");
}

void criterion5(const Run& r) {
    if (r.rows.empty()) {
        report(5, "gauss/continuity consistency", false, "run failed");
        return;
    }
    double gauss = 0.0;
    for (const auto& row : r.rows) gauss = std::max(gauss, row.gauss_residual);
    const double gauss0 = r.rows.front().gauss_residual;
    double cont = 0.0;
    for (const auto& w : r.res.windows)
        cont = std::max(cont, interior_max(continuity_residual(w.n, w.j, w.fields.dt, w.fields.grid)));
    const double baseline = free_streaming_continuity(r.cfg);
    const bool ok = gauss <= kResidualFactor * gauss0 && cont <= kResidualFactor * baseline;
    report(5, "gauss/continuity consistency", ok,
           "gauss max=" + fmt(gauss) + " t0=" + fmt(gauss0) + ", continuity=" + fmt(cont) +
               " free-streaming baseline=" + fmt(baseline));
}

void criterion6(const std::vector<const Run*>& runs) {
    double worst = 0.0;
    std::size_t rows = 0;
    bool complete = true;
    for (const Run* r : runs) {
        complete = complete && !r->rows.empty();
        worst = std::max(worst, two_form_gap(r->rows));
        rows += r->rows.size();
    }
    report(6, "WL two-form identity", complete && worst <= 1.0,
           std::to_string(rows) + " rows, max |form1-form2|/(1e-8(1+|form1|))=" + fmt(worst));
}

void criterion7() {
    const PhaseGrid g(kTwoPi, 64, 8.0, 129);
    const int nt = 64;
    const double dt = 1.0 / 64;
    std::mt19937 rng(20240607);
    std::uniform_real_distribution<double> u(-1.0, 1.0), phase(0.0, kTwoPi);
    auto random_force = [&] {
        double a[3], b[3], ph[3];
        for (int k = 0; k < 3; ++k) {
            a[k] = 0.5 * u(rng) / (k + 1);
            b[k] = u(rng);
            ph[k] = phase(rng);
        }
        SpaceTimeArray F(nt + 1, g.nx());
        for (int s = 0; s <= nt; ++s)
            for (int j = 0; j < g.nx(); ++j) {
                double v = 0.0;
                for (int k = 0; k < 3; ++k)
                    v += a[k] * (1.0 + b[k] * s * dt) * std::cos((k + 1) * g.x(j) + ph[k]);
                F(s, j) = v;
            }
        return ForceSampler(g, dt, std::move(F));
    };
    double worst = 0.0;
    int over = 0;
    for (int pair = 0; pair < 100; ++pair) {
        const ForceSampler F1 = random_force(), F2 = random_force();
        std::vector<DivergenceSample> samples;
        for (int q = 0; q < 10; ++q)
            samples.push_back({0.5 * (1.0 + u(rng)), 0.5 * g.L() * (1.0 + u(rng)), 4.0 * u(rng)});
        const double ratio = divergence_check(F1, F2, samples, Model::QR).max_ratio;
        worst = std::max(worst, ratio);
        if (ratio > kDivergenceRatio) ++over;
    }
    report(7, "characteristic divergence bounds", worst <= kDivergenceRatio,
           "max ratio=" + fmt(worst) + " over 100 pairs x 10 samples, pairs above bound=" +
               std::to_string(over));
}

void criterion8() {
    const Stopwatch sw;
    const PhiParams unit{1.0, 1.0};
    const double T1 = compute_T1(unit);
    const IterationOutcome low = iterate_v(0.0, 0.1, unit, 2000);
    const IterationOutcome past = iterate_v(0.0, 2.0 * T1, unit, 60);
    bool low_decreasing = true, high_increasing = true;
    std::string series;
    FixedPoints prev = fixed_points(0.1, unit);
    series += "v_low/v_high: " + fmt(prev.v_low) + "/" + fmt(prev.v_high);
    for (double t : {0.2, 0.3, 0.4}) {
        const FixedPoints fp = fixed_points(t, unit);
        low_decreasing = low_decreasing && fp.v_low <= prev.v_low + kTheoryTol;
        high_increasing = high_increasing && fp.v_high >= prev.v_high - kTheoryTol;
        series += " " + fmt(fp.v_low) + "/" + fmt(fp.v_high);
        prev = fp;
    }
    const double secs = sw.seconds();
    const bool t1_ok = std::abs(T1 - kT1Oracle) <= kTheoryTol;
    const bool low_ok = low.verdict == Verdict::Converged && std::abs(low.limit - kVlowOracle) <= kTheoryTol;
    const bool past_ok = past.verdict == Verdict::Diverged;
    report(8, "iteration theory suite",
           t1_ok && low_ok && past_ok && low_decreasing && high_increasing && secs < kTheorySeconds,
           "T1=" + fmt(T1) + (t1_ok ? " ok" : " off") + ", v_low(0.1)=" + fmt(low.limit) +
               (low_ok ? " ok" : " off") + ", t=2T1 " + to_string(past.verdict) + " in " +
               std::to_string(past.sequence.size() - 1) + " steps, " + series +
               ", v_low decreasing=" + (low_decreasing ? "yes" : "no") +
               ", v_high increasing=" + (high_increasing ? "yes" : "no"));
}

Equilibrium cosine_equilibrium(int nx, int np) {
    const PhaseGrid g(kTwoPi, nx, 8.0, np);
    std::vector<double> n_ext(nx);
    for (int j = 0; j < nx; ++j) n_ext[j] = 1.0 + 0.2 * std::cos(g.x(j));
    return solve_equilibrium(periodic_integral(n_ext, g.dx()), n_ext, g, maxwellian_generator(),
                             Model::QR);
}

void criterion9() {
    const Equilibrium eq = cosine_equilibrium(64, 129), fine = cosine_equilibrium(128, 257);
    const double pres = poisson_residual(eq);
    const double merr = std::abs(mass(eq.f_inf) - eq.mass);
    const double r0 = stationarity_residual(eq), r1 = stationarity_residual(fine);
    const PhaseGrid& g = eq.f_inf.grid();
    const EntropyGenerator gen = maxwellian_generator();
    const double kt0 = free_energy(eq.f_inf, eq.n_ext, eq.model, gen);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int violations = 0;
    double min_gain = INFINITY;
    for (int trial = 0; trial < 50; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), d = 0.3 * u(rng);
        const int k = 1 + trial % 3;
        std::vector<double> v(eq.f_inf.values().begin(), eq.f_inf.values().end());
        for (int j = 0; j < g.nx(); ++j)
            for (int i = 0; i < g.np(); ++i)
                v[std::size_t(j) * g.np() + i] *=
                    1.0 + d * (a * std::cos(k * g.x(j)) + b * std::sin(k * g.x(j)) * std::tanh(g.p(i)) +
                               c * std::cos(g.p(i)));
        DistSlice f(g, std::move(v));
        const double scale = eq.mass / mass(f);
        for (double& x : f.mutable_values()) x *= scale;
        const double gain = free_energy(f, eq.n_ext, eq.model, gen) - kt0;
        min_gain = std::min(min_gain, gain);
        if (!(gain > 0.0)) ++violations;
    }
    const bool ok = pres <= kPoissonTol && merr <= kMassTol * eq.mass && r0 / r1 >= kStationarityRatio &&
                    violations == 0;
    report(9, "equilibrium suite", ok,
           "poisson=" + fmt(pres) + " mass err=" + fmt(merr) + " stationarity " + fmt(r0) + "->" +
               fmt(r1) + " (x" + fmt(r0 / r1) + "), KT gain min=" + fmt(min_gain) +
               " violations=" + std::to_string(violations));
}

void criterion10() {
    const RunConfig cfg = load("equilibrium_nr.conf");
    const Equilibrium eq = equilibrium_from_config(cfg);
    const StabilityRun run = stability_experiment(eq, 0.01, 1, PerturbKind::density_mod,
                                                  solve_config(cfg), make_generator(cfg.sigma));
    if (!run.solution.completed || run.series.empty()) {
        report(10, "stability", false, "run failed: " + run.solution.failure);
        return;
    }
    const StabilityPoint& p0 = run.series.front();
    double dconst = 0.0, g1 = 0.0, g2 = 0.0, gh = 0.0;
    for (const auto& p : run.series) {
        dconst = std::max(dconst, std::abs(p.sigma_plus_WT - p0.sigma_plus_WT));
        g1 = std::max(g1, p.l1 / p0.l1);
        g2 = std::max(g2, p.l2 / p0.l2);
        gh = std::max(gh, p.h1 / p0.h1);
    }
    const double rel = dconst / std::abs(p0.sigma_plus_WT);
    const bool ok = rel <= kStabilityConst && g1 <= kDistanceGrowth && g2 <= kDistanceGrowth &&
                    gh <= kDistanceGrowth;
    report(10, "stability", ok,
           "Sigma+WT(0)=" + fmt(p0.sigma_plus_WT) + " relative variation=" + fmt(rel) +
               ", growth L1 x" + fmt(g1) + " L2 x" + fmt(g2) + " H1 x" + fmt(gh));
}

void criterion11(const std::vector<const Run*>& qr_runs) {
    bool quiet = true;
    for (const Run* r : qr_runs) quiet = quiet && sentinel_quiet(r->res);

    const Run stress = simulate(load("nr_stress.conf"));
    const bool stress_warned = !sentinel_quiet(stress.res);
    const bool stress_ok = stress.res.completed || stress_warned;

    // first attempt of the recorded two-stream window
    const RunConfig ts = load("sentinel_two_stream.conf");
    const PhaseGrid g = ts.grid();
    WindowConfig wc = solve_config(ts).window;
    wc.max_iters = 6;
    const std::vector<double> zero(g.nx(), 0.0);
    const WindowSolution w = solve_window(builtin_f0(ts.f0, g).f0, zero, zero, builtin_n_ext(ts.n_ext, g), wc);
    const bool exercised = w.sentinel_first_warning >= 0;

    report(11, "NR sentinel", quiet && stress_ok && exercised,
           std::string("QR runs quiet=") + (quiet ? "yes" : "no") + ", NR stress " +
               (stress.res.completed ? "converged" : "failed") + " (iterations " +
               (stress.res.windows.empty() ? std::string("-")
                                           : std::to_string(stress.res.windows[0].trace.iterations_used)) +
               ", warned=" + (stress_warned ? "yes" : "no") + "), two-stream window warns at iteration " +
               std::to_string(w.sentinel_first_warning));
}

}  // namespace

int main() {
    try {
        criterion1();
        const Run streaming = criterion2();
        const RunConfig pumped = load("pumped_qr.conf");
        const Run run3 = simulate(pumped);
        criterion3(run3);
        const Run run3_fine = simulate(refined(pumped));
        criterion4(run3, run3_fine);
        criterion5(run3);
        criterion6({&streaming, &run3, &run3_fine});
        criterion7();
        criterion8();
        criterion9();
        criterion10();
        const Run vacuum = simulate(load("vacuum.conf"));
        criterion11({&vacuum, &streaming, &run3, &run3_fine});
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
