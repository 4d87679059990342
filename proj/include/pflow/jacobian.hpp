#pragma once

// Jacobian dg/dy: fixed triplet pattern, per-model slot values, and a
// values-only refresh of the CSC matrix through a precomputed slot map.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pflow/kernels.hpp"
#include "pflow/sparse.hpp"
#include "pflow/system.hpp"
#include "pflow/workflow.hpp"

namespace pflow {

struct JacobianWorkspace {
    // Triplet pattern, one entry per slot. Slots are grouped by model
    // (PV, slack, line, shunt); inside a model, by partial then device.
    std::vector<Index> rows, cols;
    std::vector<double> vals;

    std::array<std::size_t, kModelCount> slot_offset{};   // indexed by ModelId

    CscMatrix csc;
    std::vector<Index> slot_to_csc;
    // Inverse map: slots feeding csc value p are
    // csc_slots[csc_slot_ptr[p] .. csc_slot_ptr[p + 1]), ascending.
    std::vector<Index> csc_slot_ptr, csc_slots;

    std::uint64_t epoch = 0;
    std::array<std::uint64_t, kModelCount> model_epoch{};

    kernels::SlotBlock block(ModelId m, std::size_t n_devices) {
        return {vals.data() + slot_offset[static_cast<std::size_t>(m)], n_devices};
    }
};

/// State-independent pattern plus CSC structure; the only allocating step.
JacobianWorkspace symbolic_pattern(const PowerSystem& sys);

/// Refreshes ws.vals with analytic partials at y, then ws.csc values.
void evaluate_jacobian(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg,
                       JacobianWorkspace& ws, ThreadPool& pool);

/// Sums slot values into ws.csc.values (duplicates added in slot order).
void assemble_jacobian(const WorkflowConfig& cfg, JacobianWorkspace& ws, ThreadPool& pool);

/// Largest system accepted by finite_difference_jacobian.
inline constexpr std::size_t kFiniteDifferenceMaxVars = 2000;

/// Central differences of the serial residual, column by column, with step
/// rel_step * max(1, |y_j|). Throws std::invalid_argument above the size guard.
DenseMatrix finite_difference_jacobian(const PowerSystem& sys, std::span<const double> y,
                                       double rel_step = 1e-6);

struct JacobianMismatch {
    std::size_t row = 0, col = 0;
    double analytic = 0.0, fd = 0.0;
    double rel_error = 0.0;   // |analytic - fd| / max(1, |fd|)
};

/// Entry with the largest relative error over every (row, col) of the
/// dense finite-difference matrix, structural zeros of `analytic` included.
JacobianMismatch worst_jacobian_mismatch(const CscMatrix& analytic, const DenseMatrix& fd);

}  // namespace pflow
