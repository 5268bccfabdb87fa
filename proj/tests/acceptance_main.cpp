// Acceptance suite: one criterion per function, one [PASS]/[FAIL] line each,
// nonzero exit if any criterion fails. Criteria may be selected by number on
// the command line (default: all).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "etsim/protocol.hpp"
#include "etsim/reduced.hpp"
#include "etsim/scenario.hpp"

using namespace etsim;

namespace {

struct Collector {
    bool all_quality_ok = true;
    double worst_trace_dev = 0.0;
    double worst_min_eig = 1.0;

    void add(const QualityFlags& q) {
        all_quality_ok = all_quality_ok && q.all_ok();
        worst_trace_dev = std::max(worst_trace_dev, q.max_trace_dev);
        worst_min_eig = std::min(worst_min_eig, q.min_eigenvalue);
    }
};

Collector g_quality;
std::string g_out_dir = "acceptance_out";

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

bool report(int n, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %-28s %s  (%.1f s)\n", pass ? "PASS" : "FAIL", n,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    return pass;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

RunReport run_preset(const std::string& id) {
    ScenarioConfig cfg = preset(id);
    cfg.out_dir = g_out_dir;
    return run_scenario(cfg);
}

double checkpoint_value(const RunReport& r, const std::string& label) {
    for (const auto& c : r.checkpoints) {
        if (c.label == label) return c.value;
    }
    throw std::runtime_error("no checkpoint '" + label + "' in scenario " + r.scenario);
}

void collect_report_quality(const RunReport& r) {
    QualityFlags q;
    q.trace_ok = r.quality_trace;
    q.positivity_ok = r.quality_positivity;
    q.converged = r.quality_converged;
    g_quality.all_quality_ok = g_quality.all_quality_ok && r.quality_ok();
    (void)q;
}

// 1. det M = -2 Ve^2 gamma to 1e-12 relative over 1000 random draws; all
//    eigenvalue real parts negative.
bool criterion_1() {
    Timer timer;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_rel = 0.0;
    bool eigs_ok = true;
    for (int i = 0; i < 1000; ++i) {
        ReducedModel rm{1e-4 + 0.2 * unif(rng), 1e-4 + 0.5 * unif(rng), 2.0 * unif(rng)};
        const double det = rm.m_matrix().determinant();
        const double expected = rm.det_m();
        worst_rel = std::max(worst_rel, std::abs(det - expected) / std::abs(expected));
        for (const auto& ev : transfer_rate(rm).eigenvalues) {
            eigs_ok = eigs_ok && ev.real() < 0.0;
        }
    }
    const double secs = timer.seconds();
    const bool pass = worst_rel <= 1e-12 && eigs_ok && secs < 1.0;
    return report(1, "reduced-model algebra", pass,
                  fmt("max rel det error %.2e, eigenvalues %s", worst_rel,
                      eigs_ok ? "all negative" : "NOT all negative"),
                  secs);
}

// 2. transfer-rate scan: log-log slopes +1/-1 (+-0.1) and argmax in [1.5, 2.5].
bool criterion_2() {
    Timer timer;
    const double ve = std::abs(effective_rabi(0.01, 1.0, 1.0));
    auto scan = transfer_rate_scan(ve, 0.01, 100.0, 161);

    auto slope = [&](double lo, double hi) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (const auto& p : scan) {
            if (p.gamma_over_ve < lo || p.gamma_over_ve > hi) continue;
            const double x = std::log(p.gamma_over_ve), y = std::log(p.lambda_abs);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double s_lo = slope(0.01, 0.1);
    const double s_hi = slope(10.0, 100.0);
    double best_r = 0.0, best = 0.0;
    for (const auto& p : scan) {
        if (p.lambda_abs > best) {
            best = p.lambda_abs;
            best_r = p.gamma_over_ve;
        }
    }
    const double secs = timer.seconds();
    const bool pass = std::abs(s_lo - 1.0) <= 0.1 && std::abs(s_hi + 1.0) <= 0.1 &&
                      best_r >= 1.5 && best_r <= 2.5 && secs < 1.0;
    return report(2, "transfer-rate scan", pass,
                  fmt("slopes %+.3f / %+.3f, argmax at gamma/Ve = %.2f", s_lo, s_hi, best_r),
                  secs);
}

// 3. full-model vs reduced-model populations within 0.02; coherences < 0.05.
bool criterion_3() {
    Timer timer;
    ETParams p{1.0, 1.0, 0.01, 20.0};
    const int n_c = 10;
    const double ve = std::abs(effective_rabi(p.v, p.g_tilde(), 1.0));
    Operator h = build_single_site_et(p, n_c);
    Operator a_emb = embed(fock_ops(n_c).a, 1, h.space);
    LindbladModel model{h, thermal_channels(a_emb, BathParams{ve, 0.0})};

    Vector s1 = vibronic_state(Branch::Donor, 0, p, n_c);
    Vector s2 = vibronic_state(Branch::Acceptor, 1, p, n_c);
    Vector s3 = vibronic_state(Branch::Acceptor, 0, p, n_c);

    auto coherence = [](std::string name, Vector a, Vector b) {
        return Observable{std::move(name),
                          [a = std::move(a), b = std::move(b)](const Matrix& rho,
                                                               const SpaceSpec&) {
                              return std::abs(Complex(a.dot(rho * b)));
                          }};
    };
    std::vector<Observable> obs{projector_observable("p1", s1), projector_observable("p2", s2),
                                projector_observable("p3", s3), coherence("c13", s1, s3),
                                coherence("c23", s2, s3)};

    IntegratorConfig cfg = IntegratorConfig::defaults_for(p);
    DensityMatrix rho0 = DensityMatrix::pure(h.space, s1);
    TimeSeries ts = evolve(model, rho0, 2500.0, cfg, obs);
    g_quality.add(ts.quality);

    ReducedModel rm{ve, ve, p.g_tilde()};
    auto traj = solve_reduced(rm, {1.0, 0.0, 0.0}, ts.t_omega0);
    double max_dev = 0.0, max_coh = 0.0;
    for (std::size_t i = 0; i < ts.t_omega0.size(); ++i) {
        max_dev = std::max({max_dev, std::abs(ts.values[0][i] - traj.rho11[i]),
                            std::abs(ts.values[1][i] - traj.rho22[i]),
                            std::abs(ts.values[2][i] - traj.rho33[i])});
        max_coh = std::max({max_coh, ts.values[3][i], ts.values[4][i]});
    }
    // at late times the full model has pumped everything into |3>
    auto proj = project_full_state(ts.final_state.matrix, s1, s2, s3);
    const double secs = timer.seconds();
    const bool pass = max_dev < 0.02 && max_coh < 0.05 && proj.rho33 > 0.99 &&
                      ts.quality.all_ok() && secs < 120.0;
    return report(3, "reduced-vs-full agreement", pass,
                  fmt("max population dev %.4f, max coherence %.4f, final rho33 %.4f", max_dev,
                      max_coh, proj.rho33),
                  secs);
}

// 4. hybrid Dicke scheme: F(W_4^1) = 0.998 +- 0.005 at 3 ms, F(W_4^2) =
//    0.995 +- 0.005 at 6 ms.
bool criterion_4() {
    Timer timer;
    RunReport r = run_preset("fig3b");
    collect_report_quality(r);
    const double f1 = checkpoint_value(r, "W_4^1");
    const double f2 = checkpoint_value(r, "W_4^2");
    const double secs = timer.seconds();
    const bool pass = std::abs(f1 - 0.998) <= 0.005 && std::abs(f2 - 0.995) <= 0.005 &&
                      r.quality_ok() && secs < 900.0;
    return report(4, "hybrid Dicke scheme", pass,
                  fmt("F(W41) = %.4f, F(W42) = %.4f", f1, f2), secs);
}

// 5. fully dissipative scheme: F(W_4^2) = 0.993 +- 0.005 at 9 ms and donor
//    population > 0.98 at the repump end.
bool criterion_5() {
    Timer timer;
    RunReport r = run_preset("fig4b");
    collect_report_quality(r);
    const double f2 = checkpoint_value(r, "W_4^2");
    double p_d = 0.0;
    for (const auto& c : r.checkpoints) {
        if (c.label.rfind("P_D_after_repump", 0) == 0) p_d = c.value;
    }
    const double secs = timer.seconds();
    const bool pass =
        std::abs(f2 - 0.993) <= 0.005 && p_d > 0.98 && r.quality_ok() && secs < 900.0;
    return report(5, "fully dissipative scheme", pass,
                  fmt("F(W42) = %.4f, P_D after repump = %.4f", f2, p_d), secs);
}

// 6. seven-ion noisy experiment: F(W_4^1) = 0.994 +- 0.01 at 5 ms and
//    F(W_4^2) = 0.979 +- 0.01 at 10 ms.
bool criterion_6() {
    Timer timer;
    RunReport r = run_preset("fig6");
    collect_report_quality(r);
    const double f1 = checkpoint_value(r, "W_4^1");
    const double f2 = checkpoint_value(r, "W_4^2");
    const double secs = timer.seconds();
    const bool pass = std::abs(f1 - 0.994) <= 0.01 && std::abs(f2 - 0.979) <= 0.01 &&
                      r.quality_ok() && secs < 1800.0;
    return report(6, "noisy seven-ion scheme", pass,
                  fmt("F(W41) = %.4f, F(W42) = %.4f", f1, f2), secs);
}

// 7. steady-state sweep: decrease-then-increase shape per n_bar, optimum for
//    n_bar = 0.05 at 2 omega0 +- 1 grid step, dense vs long-time routes agree
//    to 1e-6 trace distance.
bool criterion_7() {
    Timer timer;
    ScenarioConfig cfg = preset("fig5");
    SweepResult res = delta_e_sweep(cfg.et, cfg.n_bar_grid, cfg.delta_e_grid,
                                    cfg.sweep_gamma_omega0, cfg.n_c);

    bool shape_ok = true;
    for (double nb : cfg.n_bar_grid) {
        double opt = 0.0;
        for (const auto& [n, de] : res.optimum) {
            if (n == nb) opt = de;
        }
        // strictly decreasing up to the optimum, increasing after
        for (std::size_t i = 1; i < cfg.delta_e_grid.size(); ++i) {
            const double prev = res.p_donor_at(cfg.delta_e_grid[i - 1], nb);
            const double cur = res.p_donor_at(cfg.delta_e_grid[i], nb);
            if (cfg.delta_e_grid[i] <= opt) {
                shape_ok = shape_ok && cur < prev;
            } else {
                shape_ok = shape_ok && cur > prev;
            }
        }
    }
    double opt_005 = 0.0;
    for (const auto& [n, de] : res.optimum) {
        if (n == 0.05) opt_005 = de;
    }
    const bool opt_ok = std::abs(opt_005 - 2.0) <= 1.0;

    // dense-Liouvillian vs long-time agreement on the single-site system;
    // V sets the slowest mode, so a moderate drive keeps the long-time route
    // converged well past the 1e-6 comparison tolerance
    ETParams p{1.0, 1.0, 0.025, 20.0};
    const int n_c = 12;  // d = 24 <= 30
    Operator h = build_single_site_et(p, n_c);
    Operator a_emb = embed(fock_ops(n_c).a, 1, h.space);
    LindbladModel model{h, thermal_channels(a_emb, BathParams{0.05, 0.05})};
    SteadyStateOptions dense_opts;
    dense_opts.route = SteadyStateOptions::Route::DenseLiouvillian;
    SteadyStateOptions lt_opts;
    lt_opts.route = SteadyStateOptions::Route::LongTime;
    DensityMatrix ss_d = steady_state(model, dense_opts);
    DensityMatrix ss_l = steady_state(model, lt_opts);
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(ss_d.matrix - ss_l.matrix),
                                             Eigen::EigenvaluesOnly);
    const double tdist = 0.5 * es.eigenvalues().cwiseAbs().sum();

    const double secs = timer.seconds();
    const bool pass = shape_ok && opt_ok && tdist < 1e-6 && secs < 300.0;
    return report(7, "steady-state sweep", pass,
                  fmt("shape %s, optimum(0.05) = %.0f, route distance %.2e",
                      shape_ok ? "ok" : "BROKEN", opt_005, tdist),
                  secs);
}

// 8. boson W fidelities {0.996, 0.904, 0.819} +- 0.01 at n_bar = {0, 0.05, 0.1}.
bool criterion_8() {
    Timer timer;
    RunReport r = run_preset("appC");
    collect_report_quality(r);
    const double f0 = checkpoint_value(r, "F_W_nbar_0");
    const double f5 = checkpoint_value(r, "F_W_nbar_0.05");
    const double f10 = checkpoint_value(r, "F_W_nbar_0.1");
    const double secs = timer.seconds();
    const bool pass = std::abs(f0 - 0.996) <= 0.01 && std::abs(f5 - 0.904) <= 0.01 &&
                      std::abs(f10 - 0.819) <= 0.01 && r.quality_ok() && secs < 600.0;
    return report(8, "boson W fidelities", pass,
                  fmt("F = %.4f / %.4f / %.4f", f0, f5, f10), secs);
}

// 9. GHZ fidelities 0.972 +- 0.005 (n_bar 0) and 0.951 +- 0.01 (n_bar 0.05).
bool criterion_9() {
    Timer timer;
    RunReport r = run_preset("appE");
    collect_report_quality(r);
    const double f0 = checkpoint_value(r, "F_GHZ_nbar_0");
    const double f5 = checkpoint_value(r, "F_GHZ_nbar_0.05");
    const double secs = timer.seconds();
    const bool pass = std::abs(f0 - 0.972) <= 0.005 && std::abs(f5 - 0.951) <= 0.01 &&
                      r.quality_ok() && secs < 600.0;
    return report(9, "GHZ fidelities", pass, fmt("F = %.4f / %.4f", f0, f5), secs);
}

// 10. physics property suite: analytic oracles, conservation laws, cutoff
//     convergence, and the quality flags of everything run above.
bool criterion_10() {
    Timer timer;
    bool pass = true;
    std::string detail;

    // damped-oscillator decay against the analytic law
    {
        const int n_c = 8;
        const double gamma = 0.1;
        auto f = fock_ops(n_c);
        LindbladModel model{f.n, thermal_channels(f.a, BathParams{gamma, 0.0})};
        Matrix rho0 = Matrix::Zero(n_c, n_c);
        rho0(3, 3) = 1.0;
        IntegratorConfig cfg;
        cfg.omega0_rad_per_ms = 1.0;
        cfg.sample_dt = 2.0;
        TimeSeries ts = evolve(model, DensityMatrix(model.h.space, rho0), 30.0, cfg,
                               {expectation_observable("n", f.n)});
        g_quality.add(ts.quality);
        double worst = 0.0;
        for (std::size_t i = 0; i < ts.t_omega0.size(); ++i) {
            const double expected = 3.0 * std::exp(-gamma * ts.t_omega0[i]);
            worst = std::max(worst, std::abs(ts.values[0][i] - expected) / expected);
        }
        pass = pass && worst < 1e-6;
        detail += fmt("decay err %.1e", worst);
        // Hermiticity is enforced exactly on the reported states
        pass = pass &&
               (ts.final_state.matrix - ts.final_state.matrix.adjoint()).cwiseAbs().maxCoeff() ==
                   0.0;
    }

    // thermal steady state <n> -> n_bar
    {
        const int n_c = 16;
        auto f = fock_ops(n_c);
        LindbladModel model{f.n, thermal_channels(f.a, BathParams{0.2, 0.5})};
        Matrix rho0 = Matrix::Zero(n_c, n_c);
        rho0(0, 0) = 1.0;
        IntegratorConfig cfg;
        cfg.omega0_rad_per_ms = 1.0;
        cfg.sample_dt = 40.0;
        TimeSeries ts = evolve(model, DensityMatrix(model.h.space, rho0), 80.0, cfg,
                               {expectation_observable("n", f.n)});
        g_quality.add(ts.quality);
        const double err = std::abs(ts.values[0].back() - 0.5);
        pass = pass && err < 1e-4;
        detail += fmt(", thermal err %.1e", err);
    }

    // excitation conservation inside pump segments of an ideal hybrid run
    {
        ETParams p{1.0, 1.0, 0.0, 20.0};
        BathParams bath{0.0, 0.0};
        NoiseSpec noise;
        auto schedule = build_hybrid_dicke_schedule(2, 2, p, 0.04, bath, 3.0, 0.001, noise, 6);
        InitialStateSpec ispec;
        DensityMatrix rho0 = build_initial(ispec, p, schedule.space);
        auto pauli = pauli_ops();
        Matrix up = 0.5 * (Matrix::Identity(2, 2) + pauli.sz.matrix);
        Matrix n_exc = Matrix::Zero(schedule.space.dim(), schedule.space.dim());
        for (int i = 0; i < schedule.space.num_factors(); ++i) {
            if (schedule.space.factor(i).kind == Factor::Kind::Qubit) {
                n_exc += embed(Operator(pauli.sz.space, up), i, schedule.space).matrix;
            }
        }
        IntegratorConfig cfg = IntegratorConfig::defaults_for(p);
        ProtocolResult res =
            run(schedule, rho0, cfg,
                {expectation_observable("N_exc", Operator(schedule.space, n_exc))});
        g_quality.add(res.series.quality);

        const auto& col = res.series.column("N_exc");
        const auto& t = res.series.t_omega0;
        const double omega0 = schedule.omega0_rad_per_ms;
        double drift = 0.0;
        // pump windows: [0, 3 ms] and [3.001 ms, 6.001 ms]
        auto window_drift = [&](double lo_ms, double hi_ms) {
            double first = -1.0, worst = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double t_ms = t[i] / omega0;
                if (t_ms < lo_ms - 1e-9 || t_ms > hi_ms + 1e-9) continue;
                if (first < 0.0) first = col[i];
                worst = std::max(worst, std::abs(col[i] - first));
            }
            return worst;
        };
        drift = std::max(window_drift(0.0, 3.0), window_drift(3.001, 6.001));
        pass = pass && drift < 1e-6;
        detail += fmt(", pump drift %.1e", drift);
    }

    // n_c doubling on the first hybrid checkpoint
    {
        ETParams p{1.0, 1.0, 0.0, 20.0};
        BathParams bath{0.0, 0.0};
        NoiseSpec noise;
        double f[2];
        int idx = 0;
        for (int n_c : {12, 24}) {
            auto schedule = build_hybrid_dicke_schedule(4, 1, p, 0.025, bath, 3.0, 0.001,
                                                        noise, n_c);
            InitialStateSpec ispec;
            DensityMatrix rho0 = build_initial(ispec, p, schedule.space);
            IntegratorConfig cfg = IntegratorConfig::defaults_for(p);
            ProtocolResult res = run(schedule, rho0, cfg, {});
            g_quality.add(res.series.quality);
            f[idx++] = res.checkpoints[0].fidelity;
        }
        const double shift = std::abs(f[1] - f[0]);
        pass = pass && shift < 5e-4;
        detail += fmt(", n_c-doubling shift %.1e", shift);
    }

    // quality flags accumulated across the whole suite
    pass = pass && g_quality.all_quality_ok && g_quality.worst_trace_dev < 1e-7 &&
           g_quality.worst_min_eig >= -1e-6;
    detail += fmt(", trace dev %.1e, min eig %.1e%s", g_quality.worst_trace_dev,
                  g_quality.worst_min_eig, g_quality.all_quality_ok ? "" : " [quality FAIL]");

    return report(10, "physics property suite", pass, detail, timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto want = [&](int n) { return selected.empty() || selected.count(n); };

    std::filesystem::create_directories(g_out_dir);

    bool ok = true;
    if (want(1)) ok = criterion_1() && ok;
    if (want(2)) ok = criterion_2() && ok;
    if (want(3)) ok = criterion_3() && ok;
    if (want(4)) ok = criterion_4() && ok;
    if (want(5)) ok = criterion_5() && ok;
    if (want(6)) ok = criterion_6() && ok;
    if (want(7)) ok = criterion_7() && ok;
    if (want(8)) ok = criterion_8() && ok;
    if (want(9)) ok = criterion_9() && ok;
    if (want(10)) ok = criterion_10() && ok;

    std::printf("%s\n", ok ? "acceptance: ALL PASS" : "acceptance: FAILURES");
    return ok ? 0 : 1;
}
