// Acceptance criteria 1-9. One PASS/FAIL/SKIP line per criterion; the exit
// status is nonzero if any criterion fails. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "pflow/bench.hpp"
#include "pflow/jacobian.hpp"
#include "pflow/newton.hpp"
#include "pflow/residual.hpp"
#include "support.hpp"

using namespace pflow;

namespace {

constexpr double kEquivTol = 1e-12;            // 1: residual / Jacobian vs workflow 1
constexpr double kSolutionTol = 1e-8;          // 1: converged states vs workflow 1
constexpr int kRandomStates = 100;             // 1, 2
constexpr double kFdTol = 1e-6;                // 2: max relative entry error
constexpr int kMaxNewtonIter = 10;             // 3
constexpr double kMismatchTol = 1e-8;          // 3
constexpr double kOracleTol = 1e-8;            // 3: 2-bus oracle
constexpr std::size_t kTileCopies = 500;       // 4-8: tiled 14-bus case
constexpr std::size_t kMinLines = 10000;       // 4
constexpr double kSimdSpeedup = 3.0;           // 4
constexpr double kSimdTarget256 = 6.0;         // 4 (reported, not asserted)
constexpr std::size_t kIntraThreads = 4;       // 5, 8
constexpr double kThreadSpeedup = 2.0;         // 5
constexpr double kLineDominance = 5.0;         // 6
constexpr double kInterGainLimit = 0.20;       // 6
constexpr double kNestedRatio = 0.9;           // 8
constexpr unsigned kNestedMaxHwThreads = 8;    // 8
constexpr std::size_t k70kVars = 160780;       // 9
constexpr std::size_t k70kNonzeros = 998495;   // 9
constexpr int kTimingRounds = 31;

// 2-bus closed-form solution.
constexpr double kTwoBusV = 0.9782482306186261764;
constexpr double kTwoBusTheta = -0.051134051845636953889;

int g_failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void skip(int id, const char* title, const std::string& why) {
    std::printf("SKIP criterion %d (%s): %s\n", id, title, why.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Medians of interleaved runs, so that slow drifts in host load hit every
// candidate alike. One warm-up round is discarded.
std::vector<double> interleaved_medians_ms(const std::vector<std::function<void()>>& fns, int rounds) {
    using Clock = std::chrono::steady_clock;
    std::vector<std::vector<double>> samples(fns.size());
    for (int r = 0; r <= rounds; ++r) {
        for (std::size_t i = 0; i < fns.size(); ++i) {
            const auto t0 = Clock::now();
            fns[i]();
            const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            if (r > 0) samples[i].push_back(ms);
        }
    }
    std::vector<double> out;
    for (auto& s : samples) out.push_back(median(std::move(s)));
    return out;
}

void criterion1() {
    std::mt19937_64 rng(101);
    ThreadPool pool(kIntraThreads);
    double worst_g = 0.0, worst_j = 0.0, worst_y = 0.0;
    bool all_converged = true;
    for (const auto& name : test::bundled_cases()) {
        const PowerSystem sys = test::load_system(name);
        JacobianWorkspace ref_j = symbolic_pattern(sys);
        JacobianWorkspace wf_j = symbolic_pattern(sys);
        ResidualWorkspace ws(sys, kIntraThreads);
        std::vector<double> ref_g(sys.n_eq()), g(sys.n_eq());
        for (int s = 0; s < kRandomStates; ++s) {
            const std::vector<double> y = test::random_state(sys, rng);
            evaluate_residual(sys, y, make_workflow(1), ws, ref_g, pool);
            evaluate_jacobian(sys, y, make_workflow(1), ref_j, pool);
            for (int id = 2; id <= kWorkflowCount; ++id) {
                const WorkflowConfig cfg = make_workflow(id, kIntraThreads);
                evaluate_residual(sys, y, cfg, ws, g, pool);
                evaluate_jacobian(sys, y, cfg, wf_j, pool);
                worst_g = std::max(worst_g, max_abs_diff(g, ref_g));
                worst_j = std::max(worst_j, max_abs_diff(wf_j.csc.values, ref_j.csc.values));
            }
        }
        NewtonOptions opt;
        const SolveResult ref = newton_solve(sys, flat_start(sys), opt, pool);
        all_converged = all_converged && ref.converged;
        for (int id = 2; id <= kWorkflowCount; ++id) {
            opt.workflow = make_workflow(id, kIntraThreads);
            const SolveResult r = newton_solve(sys, flat_start(sys), opt, pool);
            all_converged = all_converged && r.converged;
            worst_y = std::max(worst_y, max_abs_diff(r.y, ref.y));
        }
    }
    const bool pass = worst_g <= kEquivTol && worst_j <= kEquivTol && worst_y <= kSolutionTol && all_converged;
    report(1, "workflow equivalence", pass,
           fmt("max |g - g1| = %.3g, max |J - J1| = %.3g (tol 1e-12); max |y - y1| = %.3g (tol 1e-8)", worst_g,
               worst_j, worst_y));
}

void criterion2() {
    std::mt19937_64 rng(202);
    ThreadPool pool(1);
    double worst = 0.0;
    for (const char* name : {"case2.m", "case14.m"}) {
        const PowerSystem sys = test::load_system(name);
        JacobianWorkspace ws = symbolic_pattern(sys);
        for (int s = 0; s < kRandomStates; ++s) {
            const std::vector<double> y = test::random_state(sys, rng);
            evaluate_jacobian(sys, y, make_workflow(1), ws, pool);
            worst = std::max(worst, worst_jacobian_mismatch(ws.csc, finite_difference_jacobian(sys, y)).rel_error);
        }
    }
    report(2, "Jacobian vs finite differences", worst < kFdTol,
           fmt("max relative entry error %.3g over 2 x %.0f states (tol 1e-6)", worst, kRandomStates));
}

void criterion3() {
    int worst_iter = 0;
    double worst_mismatch = 0.0;
    bool converged = true;
    for (const auto& name : test::bundled_cases()) {
        const PowerSystem sys = test::load_system(name);
        const SolveResult r = newton_solve(sys, flat_start(sys), NewtonOptions{});
        converged = converged && r.converged;
        worst_iter = std::max(worst_iter, r.iterations);
        worst_mismatch = std::max(worst_mismatch, r.final_mismatch);
    }
    const PowerSystem two = test::load_system("case2.m");
    const SolveResult r = newton_solve(two, flat_start(two), NewtonOptions{});
    const double dv = std::abs(r.y[two.addr.v_of_bus[1]] - kTwoBusV);
    const double dt = std::abs(r.y[two.addr.theta_of_bus[1]] - kTwoBusTheta);
    const bool pass = converged && r.converged && worst_iter <= kMaxNewtonIter && worst_mismatch <= kMismatchTol &&
                      dv <= kOracleTol && dt <= kOracleTol;
    report(3, "Newton convergence", pass,
           fmt("max iterations %.0f (limit 10), max |g| %.3g (tol 1e-8); 2-bus |dV| %.3g, |dtheta| %.3g (tol 1e-8)",
               worst_iter, worst_mismatch, dv, dt));
}

struct LargeCase {
    PowerSystem sys;
    std::vector<double> y;
};

LargeCase make_large_case() {
    LargeCase lc{build_system(tile_case(load_case(test::data_path("case14.m")), kTileCopies)), {}};
    NewtonOptions opt;
    opt.workflow = make_workflow(5);
    const SolveResult r = newton_solve(lc.sys, flat_start(lc.sys), opt);
    lc.y = r.converged ? r.y : flat_start(lc.sys);
    return lc;
}

void criterion4(const LargeCase& lc) {
    const BenchEnvironment env = detect_environment(1);
    if (env.simd_width_bits < 128) {
        skip(4, "SIMD effectiveness", "host has no 128-bit vector unit");
        return;
    }
    const PowerSystem& sys = lc.sys;
    ThreadPool pool(1);
    ResidualWorkspace ws(sys, 1);
    std::vector<double> g(sys.n_eq());
    const WorkflowConfig serial = make_workflow(1);
    const WorkflowConfig simd = make_workflow(5);
    const auto t = interleaved_medians_ms({[&] { evaluate_residual(sys, lc.y, serial, ws, g, pool); },
                                           [&] { evaluate_residual(sys, lc.y, simd, ws, g, pool); }},
                                          kTimingRounds);
    const double ratio = t[0] / t[1];

    const auto line = static_cast<std::size_t>(ModelId::Line);
    const double line_serial = per_model_timing(sys, lc.y, serial, kTimingRounds, pool).median_us[line];
    const double line_simd = per_model_timing(sys, lc.y, simd, kTimingRounds, pool).median_us[line];

    const bool pass = sys.lines.size() >= kMinLines && ratio >= kSimdSpeedup;
    std::string detail = fmt("%.0f lines; residual %.3f ms serial vs %.3f ms SIMD = %.2fx (need 3x)",
                             static_cast<double>(sys.lines.size()), t[0], t[1], ratio);
    detail += fmt("; Line kernel %.1f vs %.1f us = %.2fx", line_serial, line_simd, line_serial / line_simd);
    detail += " [" + env.simd_isa + fmt(", %.0f-bit", env.simd_width_bits) + "]";
    if (env.simd_width_bits >= 256) detail += ratio >= kSimdTarget256 ? "; 6x target met" : "; 6x target not met";
    report(4, "SIMD effectiveness", pass, detail);
}

struct ThreadingTimes {
    double serial_ms = 0.0, intra_ms = 0.0, nested_ms = 0.0;
    unsigned hw = 1;
};

// Residual plus Jacobian under workflows 1, 3 and 4 on a pool of four.
ThreadingTimes measure_threading(const LargeCase& lc) {
    const PowerSystem& sys = lc.sys;
    ThreadPool pool(kIntraThreads);
    ResidualWorkspace rws(sys, kIntraThreads);
    JacobianWorkspace jws = symbolic_pattern(sys);
    std::vector<double> g(sys.n_eq());
    const WorkflowConfig w1 = make_workflow(1);
    const WorkflowConfig w3 = make_workflow(3, kIntraThreads);
    const WorkflowConfig w4 = make_workflow(4, kIntraThreads);
    auto both = [&](const WorkflowConfig& cfg) {
        evaluate_residual(sys, lc.y, cfg, rws, g, pool);
        evaluate_jacobian(sys, lc.y, cfg, jws, pool);
    };
    const auto t = interleaved_medians_ms({[&] { both(w1); }, [&] { both(w3); }, [&] { both(w4); }},
                                          kTimingRounds);
    return {t[0], t[1], t[2], std::max(1u, std::thread::hardware_concurrency())};
}

void criterion5(const ThreadingTimes& t) {
    const double speedup = t.serial_ms / t.intra_ms;
    report(5, "intra-model threading", speedup >= kThreadSpeedup,
           fmt("residual+Jacobian %.3f ms serial vs %.3f ms with 4 threads = %.2fx (need 2x); ", t.serial_ms,
               t.intra_ms, speedup) +
               fmt("%.0f hardware thread(s)", t.hw));
}

void criterion8(const ThreadingTimes& t) {
    if (t.hw > kNestedMaxHwThreads) {
        skip(8, "nested parallelism", fmt("host has %.0f hardware threads (> 8)", t.hw));
        return;
    }
    const double ratio = t.nested_ms / t.intra_ms;
    report(8, "nested parallelism", ratio >= kNestedRatio,
           fmt("workflow 4 %.3f ms vs workflow 3 %.3f ms, time ratio %.2f (need >= 0.9); ", t.nested_ms, t.intra_ms,
               ratio) +
               fmt("%.0f hardware thread(s)", t.hw));
}

void criterion6(const LargeCase& lc) {
    const PowerSystem& sys = lc.sys;
    ThreadPool pool(kIntraThreads);
    const ModelTimings mt = per_model_timing(sys, lc.y, make_workflow(1), kTimingRounds, pool);
    const double line = mt.median_us[static_cast<std::size_t>(ModelId::Line)];
    double next = 0.0;
    ModelId next_id = ModelId::Pq;
    for (ModelId m : kModelOrder) {
        if (m == ModelId::Line) continue;
        if (mt.median_us[static_cast<std::size_t>(m)] > next) {
            next = mt.median_us[static_cast<std::size_t>(m)];
            next_id = m;
        }
    }
    const double dominance = line / next;

    ResidualWorkspace ws(sys, 1);
    std::vector<double> g(sys.n_eq());
    const WorkflowConfig w1 = make_workflow(1);
    const WorkflowConfig w2 = make_workflow(2);
    const auto t = interleaved_medians_ms({[&] { evaluate_residual(sys, lc.y, w1, ws, g, pool); },
                                           [&] { evaluate_residual(sys, lc.y, w2, ws, g, pool); }},
                                          kTimingRounds);
    const double gain = (t[0] - t[1]) / t[0];
    const bool pass = dominance >= kLineDominance && gain < kInterGainLimit;
    report(6, "Line bottleneck", pass,
           fmt("Line %.1f us vs next slowest %.1f us = %.1fx (need 5x); ", line, next, dominance) + "next is " +
               std::string(model_name(next_id)) +
               fmt("; inter-model threading %.3f -> %.3f ms, gain %.1f%% (need < 20%%)", t[0], t[1], 100.0 * gain));
}

void criterion7(const LargeCase& lc) {
    const PowerSystem& sys = lc.sys;
    ThreadPool pool(kIntraThreads);
    ResidualWorkspace rws(sys, kIntraThreads);
    std::vector<double> g(sys.n_eq());
    std::size_t res_allocs = 0, jac_allocs = 0;
    JacobianWorkspace jws = symbolic_pattern(sys);
    for (int id = 1; id <= kWorkflowCount; ++id) {
        const WorkflowConfig cfg = make_workflow(id, kIntraThreads);
        evaluate_residual(sys, lc.y, cfg, rws, g, pool);
        evaluate_jacobian(sys, lc.y, cfg, jws, pool);
        std::size_t before = test::allocation_count();
        for (int r = 0; r < 5; ++r) evaluate_residual(sys, lc.y, cfg, rws, g, pool);
        res_allocs += test::allocation_count() - before;
        before = test::allocation_count();
        for (int r = 0; r < 5; ++r) evaluate_jacobian(sys, lc.y, cfg, jws, pool);
        jac_allocs += test::allocation_count() - before;
    }
    report(7, "allocation-free evaluation", res_allocs == 0 && jac_allocs == 0,
           fmt("%.0f residual and %.0f Jacobian heap allocations over 6 workflows x 5 calls (need 0)",
               static_cast<double>(res_allocs), static_cast<double>(jac_allocs)));
}

void criterion9() {
    const char* path = std::getenv("PFLOW_70K_CASE");
    if (!path || !*path) {
        skip(9, "70,000-bus case", "PFLOW_70K_CASE not set; no case file supplied");
        return;
    }
    const PowerSystem sys = build_system(load_case(path));
    const JacobianWorkspace ws = symbolic_pattern(sys);
    const bool pass = sys.n_var() == k70kVars && ws.csc.nnz() == k70kNonzeros;
    report(9, "70,000-bus case", pass,
           fmt("%.0f variables (need 160780), %.0f structural nonzeros (need 998495)",
               static_cast<double>(sys.n_var()), static_cast<double>(ws.csc.nnz())));
}

}  // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();
        const LargeCase lc = make_large_case();
        criterion4(lc);
        const ThreadingTimes tt = measure_threading(lc);
        criterion5(tt);
        criterion6(lc);
        criterion7(lc);
        criterion8(tt);
        criterion9();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criterion failure(s)\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
