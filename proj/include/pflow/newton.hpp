#pragma once

// Full-step Newton-Raphson: residual, Jacobian, linear solve, update.

#include <span>
#include <vector>

#include "pflow/linear_solver.hpp"
#include "pflow/system.hpp"
#include "pflow/thread_pool.hpp"
#include "pflow/workflow.hpp"

namespace pflow {

struct NewtonOptions {
    double tol = 1e-8;           // infinity norm of g
    int max_iter = 20;
    WorkflowConfig workflow;
    SolverKind solver = SolverKind::Builtin;
    double divergence_limit = 1e6;
};

enum class SolveStatus { Converged, MaxIterations, Diverged };

std::string_view to_string(SolveStatus s);

struct StageTimings {
    double residual_ms = 0.0;
    double jacobian_ms = 0.0;
    double linear_ms = 0.0;
    double update_ms = 0.0;
};

struct SolveResult {
    bool converged = false;
    SolveStatus status = SolveStatus::MaxIterations;
    int iterations = 0;
    double final_mismatch = 0.0;
    std::vector<double> y;
    StageTimings timings;
    std::vector<double> mismatch_history;   // one entry per residual evaluation
};

/// Iterates y <- y + dy with J dy = -g until |g|_inf <= tol or max_iter
/// updates. Non-convergence and divergence (mismatch above the limit,
/// non-finite state, or a non-positive voltage) are reported, not thrown.
/// Throws std::invalid_argument on bad options or y0, SingularMatrixError
/// from the linear solver.
SolveResult newton_solve(const PowerSystem& sys, std::span<const double> y0, const NewtonOptions& opts,
                         ThreadPool& pool);

/// Same, with a pool sized for opts.workflow.
SolveResult newton_solve(const PowerSystem& sys, std::span<const double> y0, const NewtonOptions& opts);

}  // namespace pflow
