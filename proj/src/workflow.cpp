#include "pflow/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include "pflow/jacobian.hpp"
#include "pflow/kernels.hpp"
#include "pflow/residual.hpp"
#include "pflow/system.hpp"

namespace pflow {

namespace {

struct WorkflowEntry {
    InterMode inter;
    IntraKind intra;
    std::string_view description;
};

// Numbering follows the inter x intra grid of the timing table: rows are
// intra-model modes, columns inter-model modes.
constexpr std::array<WorkflowEntry, kWorkflowCount> kWorkflows = {{
    {InterMode::Serial, IntraKind::SerialScalar, "Serial inter-model and intra-model execution"},
    {InterMode::Threaded, IntraKind::SerialScalar,
     "Multi-threaded inter-model execution, serial intra-model execution"},
    {InterMode::Serial, IntraKind::Threaded, "Serial inter-model execution, multi-threaded intra-model execution"},
    {InterMode::Threaded, IntraKind::Threaded, "Multi-threaded inter-model and intra-model execution"},
    {InterMode::Serial, IntraKind::Vectorized, "Serial inter-model execution with intra-model SIMD"},
    {InterMode::Threaded, IntraKind::Vectorized, "Multi-threaded inter-model execution with intra-model SIMD"},
}};

template <class Body>
void run_intra(const IntraStrategy& intra, std::size_t n, ThreadPool& pool, Body&& body) {
    if (n == 0) return;
    switch (intra.kind) {
        case IntraKind::SerialScalar:
            body(std::size_t{0}, n, false);
            break;
        case IntraKind::Vectorized:
            body(std::size_t{0}, n, true);
            break;
        case IntraKind::Threaded: {
            const std::size_t chunks = std::clamp<std::size_t>(intra.n_threads, 1, n);
            pool.parallel_for(chunks, [&](std::size_t c) { body(n * c / chunks, n * (c + 1) / chunks, false); });
            break;
        }
    }
}

double median(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

WorkflowConfig make_workflow(int id, std::size_t n_threads) {
    if (id < 1 || id > kWorkflowCount) {
        throw std::invalid_argument("workflow id must be in 1..6, got " + std::to_string(id));
    }
    if (n_threads == 0) throw std::invalid_argument("workflow thread count must be >= 1");
    const auto& e = kWorkflows[static_cast<std::size_t>(id - 1)];
    WorkflowConfig cfg;
    cfg.id = id;
    cfg.inter = e.inter;
    cfg.intra.kind = e.intra;
    cfg.intra.n_threads = e.intra == IntraKind::Threaded ? n_threads : 1;
    return cfg;
}

std::string_view workflow_description(int id) {
    if (id < 1 || id > kWorkflowCount) return "unknown workflow";
    return kWorkflows[static_cast<std::size_t>(id - 1)].description;
}

std::string_view model_name(ModelId m) {
    switch (m) {
        case ModelId::Pq: return "PQ";
        case ModelId::Pv: return "PV";
        case ModelId::Slack: return "Slack";
        case ModelId::Line: return "Line";
        case ModelId::Shunt: return "Shunt";
    }
    return "?";
}

void run_model(ModelId m, const PowerSystem& sys, std::span<const double> y, const IntraStrategy& intra,
               Phase phase, ModelOutputs out, ThreadPool& pool) {
    namespace ks = kernels::scalar;
    namespace kp = kernels::packed;
    const kernels::StateView s{y.data(), y.data() + sys.n_bus, y.data()};
    const auto mi = static_cast<std::size_t>(m);

    if (phase == Phase::Residual) {
        ResidualWorkspace& ws = *out.residual_ws;
        double* g = out.residual;
        switch (m) {
            case ModelId::Pq:
                run_intra(intra, sys.pq.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                    kernels::BusContrib c{ws.pq_p.data(), ws.pq_q.data()};
                    packed ? kp::pq_residual(sys.pq, c, b, e) : ks::pq_residual(sys.pq, c, b, e);
                });
                break;
            case ModelId::Pv:
                run_intra(intra, sys.pv.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                    kernels::BusContrib c{ws.pv_p.data(), ws.pv_q.data()};
                    packed ? kp::pv_residual(sys.pv, s, c, g, b, e) : ks::pv_residual(sys.pv, s, c, g, b, e);
                });
                break;
            case ModelId::Slack:
                run_intra(intra, sys.slack.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                    kernels::BusContrib c{ws.slack_p.data(), ws.slack_q.data()};
                    packed ? kp::slack_residual(sys.slack, s, c, g, b, e)
                           : ks::slack_residual(sys.slack, s, c, g, b, e);
                });
                break;
            case ModelId::Line:
                run_intra(intra, sys.lines.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                    packed ? kp::line_residual(sys.lines, s, ws.line_flows(), b, e)
                           : ks::line_residual(sys.lines, s, ws.line_flows(), b, e);
                });
                break;
            case ModelId::Shunt:
                run_intra(intra, sys.shunts.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                    kernels::BusContrib c{ws.shunt_p.data(), ws.shunt_q.data()};
                    packed ? kp::shunt_residual(sys.shunts, s, c, b, e) : ks::shunt_residual(sys.shunts, s, c, b, e);
                });
                break;
        }
        ws.model_epoch[mi] = ws.epoch;
        return;
    }

    JacobianWorkspace& ws = *out.jacobian_ws;
    switch (m) {
        case ModelId::Pq:
            break;   // constant power: no partials
        case ModelId::Pv: {
            auto blk = ws.block(m, sys.pv.size());
            run_intra(intra, sys.pv.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                packed ? kp::pv_jacobian(sys.pv, blk, b, e) : ks::pv_jacobian(sys.pv, blk, b, e);
            });
            break;
        }
        case ModelId::Slack: {
            auto blk = ws.block(m, sys.slack.size());
            run_intra(intra, sys.slack.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                packed ? kp::slack_jacobian(sys.slack, blk, b, e) : ks::slack_jacobian(sys.slack, blk, b, e);
            });
            break;
        }
        case ModelId::Line: {
            auto blk = ws.block(m, sys.lines.size());
            run_intra(intra, sys.lines.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                packed ? kp::line_jacobian(sys.lines, s, blk, b, e)
                       : ks::line_jacobian(sys.lines, s, blk, b, e);
            });
            break;
        }
        case ModelId::Shunt: {
            auto blk = ws.block(m, sys.shunts.size());
            run_intra(intra, sys.shunts.size(), pool, [&](std::size_t b, std::size_t e, bool packed) {
                packed ? kp::shunt_jacobian(sys.shunts, s, blk, b, e) : ks::shunt_jacobian(sys.shunts, s, blk, b, e);
            });
            break;
        }
    }
    ws.model_epoch[mi] = ws.epoch;
}

void run_models(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg, Phase phase,
                ModelOutputs out, ThreadPool& pool) {
    if (cfg.inter == InterMode::Serial) {
        for (ModelId m : kModelOrder) run_model(m, sys, y, cfg.intra, phase, out, pool);
        return;
    }
    pool.parallel_for(kModelCount, [&](std::size_t i) { run_model(kModelOrder[i], sys, y, cfg.intra, phase, out, pool); });
}

ModelTimings per_model_timing(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg,
                              std::size_t repeats, ThreadPool& pool, Phase phase) {
    if (repeats == 0) throw std::invalid_argument("per_model_timing: repeats must be >= 1");
    using clock = std::chrono::steady_clock;

    ResidualWorkspace rws(sys, cfg.intra.n_threads);
    std::vector<double> g(sys.n_eq(), 0.0);
    JacobianWorkspace jws;
    if (phase == Phase::Jacobian) jws = symbolic_pattern(sys);
    ModelOutputs out{&rws, g.data(), &jws};

    ModelTimings result;
    std::vector<double> samples(repeats);
    for (ModelId m : kModelOrder) {
        run_model(m, sys, y, cfg.intra, phase, out, pool);   // warm-up
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t0 = clock::now();
            run_model(m, sys, y, cfg.intra, phase, out, pool);
            samples[r] = std::chrono::duration<double, std::micro>(clock::now() - t0).count();
        }
        result.median_us[static_cast<std::size_t>(m)] = median(samples);
    }
    return result;
}

}  // namespace pflow
