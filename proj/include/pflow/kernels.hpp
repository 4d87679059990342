#pragma once

// Per-model residual and Jacobian kernels.
//
// Each kernel works on a device range [begin, end) and writes only the slots
// of those devices, so disjoint ranges can run concurrently. Two families
// share one signature set:
//   kernels::scalar  - plain loops, compiled with auto-vectorization off
//   kernels::packed  - contiguous, branch-free loops annotated for SIMD
// Bus power contributions are written per device and summed into the
// residual by the join step in residual.cpp.

#include <cstddef>

#include "pflow/system.hpp"

namespace pflow::kernels {

/// Read-only view of the state vector split into its blocks.
struct StateView {
    const double* theta;   // n_bus
    const double* vm;      // n_bus
    const double* y;       // full vector, for Q_g / P_s lookups
};

/// Per-device active/reactive contributions to the bus power balance.
struct BusContrib {
    double* p;
    double* q;
};

/// Line outputs: powers leaving each terminal.
struct LineFlows {
    double* ph;
    double* pk;
    double* qh;
    double* qk;
};

/// Number of Jacobian slots per line and their order. Rows are
/// {gp_h, gq_h, gp_k, gq_k}, columns {theta_h, theta_k, V_h, V_k}; slot
/// (row, col) sits at index 4 * row + col, each a contiguous block of n_line.
inline constexpr std::size_t kLineSlots = 16;
inline constexpr std::size_t kShuntSlots = 2;   // dgp/dV, dgq/dV
inline constexpr std::size_t kPvSlots = 2;      // dgq/dQg, dgV/dV
inline constexpr std::size_t kSlackSlots = 4;   // dgp/dPs, dgq/dQg, dgV/dV, dgtheta/dtheta

/// Base pointer and block stride of one model's Jacobian value slots.
struct SlotBlock {
    double* vals;
    std::size_t stride;
};

#define PFLOW_KERNEL_SET                                                                                   \
    void pq_residual(const PqGroup& g, BusContrib out, std::size_t begin, std::size_t end);                \
    void pv_residual(const PvGroup& g, StateView s, BusContrib out, double* residual, std::size_t begin,   \
                     std::size_t end);                                                                     \
    void slack_residual(const SlackGroup& g, StateView s, BusContrib out, double* residual,                \
                        std::size_t begin, std::size_t end);                                               \
    void shunt_residual(const ShuntGroup& g, StateView s, BusContrib out, std::size_t begin,               \
                        std::size_t end);                                                                  \
    void line_residual(const LineGroup& g, StateView s, LineFlows out, std::size_t begin,                  \
                       std::size_t end);                                                                   \
    void pv_jacobian(const PvGroup& g, SlotBlock out, std::size_t begin, std::size_t end);                 \
    void slack_jacobian(const SlackGroup& g, SlotBlock out, std::size_t begin, std::size_t end);           \
    void shunt_jacobian(const ShuntGroup& g, StateView s, SlotBlock out, std::size_t begin,                \
                        std::size_t end);                                                                  \
    void line_jacobian(const LineGroup& g, StateView s, SlotBlock out, std::size_t begin,                  \
                       std::size_t end);

namespace scalar {
PFLOW_KERNEL_SET
}  // namespace scalar

namespace packed {
PFLOW_KERNEL_SET
}  // namespace packed

#undef PFLOW_KERNEL_SET

}  // namespace pflow::kernels
