#include "pflow/newton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pflow/jacobian.hpp"
#include "pflow/residual.hpp"

namespace pflow {

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max-iterations";
        case SolveStatus::Diverged: return "diverged";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(x));
    }
    return m;
}

bool state_ok(const PowerSystem& sys, std::span<const double> y) {
    for (double x : y) {
        if (!std::isfinite(x)) return false;
    }
    for (std::size_t b = 0; b < sys.n_bus; ++b) {
        if (!(y[sys.addr.v_of_bus[b]] > 0.0)) return false;
    }
    return true;
}

}  // namespace

SolveResult newton_solve(const PowerSystem& sys, std::span<const double> y0, const NewtonOptions& opts,
                         ThreadPool& pool) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("newton: tol must be > 0");
    if (opts.max_iter < 1) throw std::invalid_argument("newton: max_iter must be >= 1");
    if (y0.size() != sys.n_var()) throw std::invalid_argument("newton: initial state length does not match");
    for (double x : y0) {
        if (!std::isfinite(x)) throw std::invalid_argument("newton: initial state is not finite");
    }

    const WorkflowConfig& cfg = opts.workflow;
    const std::size_t n = sys.n_var();
    ResidualWorkspace rws(sys, cfg.intra.n_threads);
    JacobianWorkspace jws = symbolic_pattern(sys);
    auto solver = make_solver(opts.solver);

    SolveResult res;
    res.y.assign(y0.begin(), y0.end());
    std::vector<double> g(n), rhs(n), dy(n);

    auto residual = [&] {
        const auto t0 = Clock::now();
        evaluate_residual(sys, res.y, cfg, rws, g, pool);
        res.timings.residual_ms += ms_since(t0);
        res.final_mismatch = inf_norm(g);
        res.mismatch_history.push_back(res.final_mismatch);
    };

    if (!state_ok(sys, res.y)) {
        res.status = SolveStatus::Diverged;
        res.final_mismatch = std::numeric_limits<double>::infinity();
        return res;
    }
    residual();
    while (true) {
        if (res.final_mismatch <= opts.tol) {
            res.converged = true;
            res.status = SolveStatus::Converged;
            return res;
        }
        if (!(res.final_mismatch <= opts.divergence_limit)) {
            res.status = SolveStatus::Diverged;
            return res;
        }
        if (res.iterations >= opts.max_iter) {
            res.status = SolveStatus::MaxIterations;
            return res;
        }

        auto t0 = Clock::now();
        evaluate_jacobian(sys, res.y, cfg, jws, pool);
        res.timings.jacobian_ms += ms_since(t0);

        t0 = Clock::now();
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
        solver->solve(jws.csc, rhs, dy);
        res.timings.linear_ms += ms_since(t0);

        t0 = Clock::now();
        for (std::size_t i = 0; i < n; ++i) res.y[i] += dy[i];
        ++res.iterations;
        const bool ok = state_ok(sys, res.y);
        res.timings.update_ms += ms_since(t0);
        if (!ok) {
            res.status = SolveStatus::Diverged;
            res.final_mismatch = std::numeric_limits<double>::infinity();
            return res;
        }
        residual();
    }
}

SolveResult newton_solve(const PowerSystem& sys, std::span<const double> y0, const NewtonOptions& opts) {
    const auto& cfg = opts.workflow;
    std::size_t threads = 1;
    if (cfg.inter == InterMode::Threaded || cfg.intra.kind == IntraKind::Threaded) {
        threads = std::max(cfg.intra.n_threads, default_thread_count());
    }
    ThreadPool pool(threads);
    return newton_solve(sys, y0, opts, pool);
}

}  // namespace pflow
