#include "pflow/residual.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pflow {

ResidualWorkspace::ResidualWorkspace(const PowerSystem& sys, std::size_t chunks)
    : pq_p(sys.pq.size()),
      pq_q(sys.pq.size()),
      pv_p(sys.pv.size()),
      pv_q(sys.pv.size()),
      slack_p(sys.slack.size()),
      slack_q(sys.slack.size()),
      shunt_p(sys.shunts.size()),
      shunt_q(sys.shunts.size()),
      ph(sys.lines.size()),
      pk(sys.lines.size()),
      qh(sys.lines.size()),
      qk(sys.lines.size()),
      partial(std::max<std::size_t>(chunks, 1) * 2 * sys.n_bus),
      max_chunks(std::max<std::size_t>(chunks, 1)),
      n_bus(sys.n_bus) {}

kernels::LineFlows ResidualWorkspace::line_flows() {
    return {ph.data(), pk.data(), qh.data(), qk.data()};
}

namespace {

void scatter(std::span<const Index> bus, const std::vector<double>& p, const std::vector<double>& q, double* gp,
             double* gq) {
    for (std::size_t i = 0; i < bus.size(); ++i) {
        gp[bus[i]] += p[i];
        gq[bus[i]] += q[i];
    }
}

void scatter_lines(const LineGroup& L, const ResidualWorkspace& ws, std::size_t begin, std::size_t end, double* gp,
                   double* gq) {
    for (std::size_t i = begin; i < end; ++i) {
        const Index h = L.bus_h[i];
        const Index k = L.bus_k[i];
        gp[h] -= ws.ph[i];
        gq[h] -= ws.qh[i];
        gp[k] -= ws.pk[i];
        gq[k] -= ws.qk[i];
    }
}

// Sums every model's device contributions into the gp/gq rows. Runs after
// all kernels completed.
void join(const PowerSystem& sys, const WorkflowConfig& cfg, ResidualWorkspace& ws, std::span<double> out,
          ThreadPool& pool) {
    for (std::size_t m = 0; m < kModelCount; ++m) {
        if (ws.model_epoch[m] != ws.epoch) {
            throw std::logic_error("residual join reached before model " +
                                   std::string(model_name(static_cast<ModelId>(m))) + " completed");
        }
    }
    const std::size_t n = sys.n_bus;
    double* gp = out.data();
    double* gq = out.data() + n;
    std::fill(gp, gp + 2 * n, 0.0);

    scatter(sys.pq.bus, ws.pq_p, ws.pq_q, gp, gq);
    scatter(sys.pv.bus, ws.pv_p, ws.pv_q, gp, gq);
    scatter(sys.slack.bus, ws.slack_p, ws.slack_q, gp, gq);

    const std::size_t n_line = sys.lines.size();
    if (cfg.intra.kind == IntraKind::Threaded && n_line > 0) {
        // Each chunk accumulates into its private buffer; buffers are then
        // reduced in fixed chunk order, one bus range per task.
        const std::size_t chunks = std::clamp<std::size_t>(cfg.intra.n_threads, 1, n_line);
        pool.parallel_for(chunks, [&](std::size_t c) {
            double* buf = ws.partial.data() + c * 2 * n;
            std::fill(buf, buf + 2 * n, 0.0);
            scatter_lines(sys.lines, ws, n_line * c / chunks, n_line * (c + 1) / chunks, buf, buf + n);
        });
        const std::size_t rows = 2 * n;
        pool.parallel_for(chunks, [&](std::size_t t) {
            const std::size_t b = rows * t / chunks;
            const std::size_t e = rows * (t + 1) / chunks;
            for (std::size_t c = 0; c < chunks; ++c) {
                const double* buf = ws.partial.data() + c * rows;
                for (std::size_t r = b; r < e; ++r) gp[r] += buf[r];
            }
        });
    } else {
        scatter_lines(sys.lines, ws, 0, n_line, gp, gq);
    }

    scatter(sys.shunts.bus, ws.shunt_p, ws.shunt_q, gp, gq);
}

}  // namespace

void evaluate_residual(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg,
                       ResidualWorkspace& ws, std::span<double> out, ThreadPool& pool) {
    if (y.size() != sys.n_var() || out.size() != sys.n_eq()) {
        throw std::invalid_argument("evaluate_residual: state or output length does not match the system");
    }
    if (cfg.intra.kind == IntraKind::Threaded && cfg.intra.n_threads > ws.max_chunks) {
        throw std::invalid_argument("evaluate_residual: workspace sized for fewer chunks than requested");
    }
    ++ws.epoch;
    run_models(sys, y, cfg, Phase::Residual, {&ws, out.data(), nullptr}, pool);
    join(sys, cfg, ws, out, pool);
}

std::vector<double> evaluate_residual(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg) {
    ThreadPool pool(1);
    ResidualWorkspace ws(sys, cfg.intra.n_threads);
    std::vector<double> out(sys.n_eq(), 0.0);
    evaluate_residual(sys, y, cfg, ws, out, pool);
    return out;
}

}  // namespace pflow
