#pragma once

// Residual g(y): per-model kernels followed by join-by-summation into bus rows.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pflow/kernels.hpp"
#include "pflow/system.hpp"
#include "pflow/workflow.hpp"

namespace pflow {

/// Scratch owned by one evaluation at a time. Sized once; evaluate_residual
/// never resizes it.
struct ResidualWorkspace {
    ResidualWorkspace(const PowerSystem& sys, std::size_t max_chunks);

    std::vector<double> pq_p, pq_q;
    std::vector<double> pv_p, pv_q;
    std::vector<double> slack_p, slack_q;
    std::vector<double> shunt_p, shunt_q;
    std::vector<double> ph, pk, qh, qk;

    // Private per-chunk bus buffers for the threaded join, chunk-major,
    // each 2 * n_bus long (gp block then gq block).
    std::vector<double> partial;
    std::size_t max_chunks;
    std::size_t n_bus;

    // Barrier bookkeeping: a model stamps the current epoch when its
    // kernel completes; the join refuses to run on stale stamps.
    std::uint64_t epoch = 0;
    std::array<std::uint64_t, kModelCount> model_epoch{};

    kernels::LineFlows line_flows();
};

/// out = g(y). `ws` must have been built for `sys` with max_chunks >=
/// cfg.intra.n_threads. Allocation-free.
void evaluate_residual(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg,
                       ResidualWorkspace& ws, std::span<double> out, ThreadPool& pool);

/// Convenience wrapper that allocates its own workspace and a serial pool;
/// intended for tests and tools, not the Newton hot path.
std::vector<double> evaluate_residual(const PowerSystem& sys, std::span<const double> y,
                                      const WorkflowConfig& cfg = {});

}  // namespace pflow
