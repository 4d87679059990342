#pragma once

// Workflow benchmark matrix and its table / CSV / JSON reports.

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pflow/linear_solver.hpp"
#include "pflow/system.hpp"
#include "pflow/workflow.hpp"

namespace pflow {

struct TimingStat {
    double median = 0.0;
    double min = 0.0;
};

struct BenchRecord {
    int workflow = 1;
    TimingStat residual_ms;
    TimingStat jacobian_ms;
    TimingStat solve_ms;
    int iterations = 0;
    bool converged = false;
    std::array<double, kModelCount> residual_model_us{};   // medians, indexed by ModelId
    std::array<double, kModelCount> jacobian_model_us{};
};

struct BenchEnvironment {
    std::size_t threads = 1;
    std::size_t hardware_threads = 1;
    int simd_width_bits = 64;
    std::string simd_isa;
};

struct BenchReport {
    std::string case_name;
    std::size_t repeats = 0;   // runs per measurement, warm-up included
    BenchEnvironment env;
    std::vector<BenchRecord> records;
};

struct BenchOptions {
    std::vector<int> workflows = {1, 2, 3, 4, 5, 6};
    std::size_t repeats = 5;
    std::size_t threads = 1;
    SolverKind solver = SolverKind::Builtin;
    double tol = 1e-8;
    int max_iter = 20;
};

/// Compile-time vector ISA of the packed kernels.
BenchEnvironment detect_environment(std::size_t threads);

/// Times residual-only, Jacobian-only and full-solve for each workflow.
/// Residual and Jacobian are timed at one fixed state shared by all
/// workflows: the serial converged solution, or the flat start if the
/// serial solve fails. The first of `repeats` runs is discarded.
/// Throws std::invalid_argument if repeats < 2 or a workflow id is invalid.
BenchReport run_bench(const PowerSystem& sys, std::string case_name, const BenchOptions& opts);

/// Header: workflow,phase,time_ms,model,threads. One row per phase total
/// (model "all") and one per model and phase.
std::string to_csv(const BenchReport& r);

/// RFC 4180 field quoting.
std::string csv_field(std::string_view s);

std::string to_json(const BenchReport& r);
/// Throws std::invalid_argument on malformed input.
BenchReport bench_report_from_json(std::string_view text);

/// Inter x intra grid of residual / Jacobian medians plus the per-model breakdown.
std::string to_table(const BenchReport& r);

}  // namespace pflow
