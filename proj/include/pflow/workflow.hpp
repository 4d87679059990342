#pragma once

// The six evaluation workflows (inter-model x intra-model execution) and the
// model dispatcher shared by residual and Jacobian evaluation.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

#include "pflow/thread_pool.hpp"

namespace pflow {

struct PowerSystem;
struct ResidualWorkspace;
struct JacobianWorkspace;

enum class InterMode { Serial, Threaded };

enum class IntraKind { SerialScalar, Threaded, Vectorized };

struct IntraStrategy {
    IntraKind kind = IntraKind::SerialScalar;
    std::size_t n_threads = 1;   // chunk count for IntraKind::Threaded, >= 1
};

struct WorkflowConfig {
    int id = 1;
    InterMode inter = InterMode::Serial;
    IntraStrategy intra;
};

inline constexpr int kWorkflowCount = 6;

/// Workflow by number:
///   1 serial inter / serial intra      2 threaded inter / serial intra
///   3 serial inter / threaded intra    4 threaded inter / threaded intra
///   5 serial inter / SIMD intra        6 threaded inter / SIMD intra
/// Throws std::invalid_argument for ids outside 1..6 or n_threads == 0.
WorkflowConfig make_workflow(int id, std::size_t n_threads = 1);

std::string_view workflow_description(int id);

enum class ModelId : std::size_t { Pq = 0, Pv, Slack, Line, Shunt };

inline constexpr std::size_t kModelCount = 5;

/// Serial execution order.
inline constexpr std::array<ModelId, kModelCount> kModelOrder = {ModelId::Pq, ModelId::Pv, ModelId::Slack,
                                                                 ModelId::Line, ModelId::Shunt};

std::string_view model_name(ModelId m);

enum class Phase { Residual, Jacobian };

/// Everything a model kernel may write during one phase.
struct ModelOutputs {
    ResidualWorkspace* residual_ws = nullptr;   // Phase::Residual
    double* residual = nullptr;                 // Phase::Residual, gV/gtheta rows
    JacobianWorkspace* jacobian_ws = nullptr;   // Phase::Jacobian
};

/// Runs every model kernel of `phase` under `cfg` and returns after all of
/// them finished. Does not join; the caller sums device contributions.
void run_models(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg, Phase phase,
                ModelOutputs out, ThreadPool& pool);

/// Runs a single model kernel (intra-model strategy only).
void run_model(ModelId m, const PowerSystem& sys, std::span<const double> y, const IntraStrategy& intra,
               Phase phase, ModelOutputs out, ThreadPool& pool);

struct ModelTimings {
    std::array<double, kModelCount> median_us{};
};

/// Median wall time of each model's kernel over `repeats` runs (one extra
/// warm-up run is discarded). Throws std::invalid_argument if repeats == 0.
ModelTimings per_model_timing(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg,
                              std::size_t repeats, ThreadPool& pool, Phase phase = Phase::Residual);

}  // namespace pflow
