#include "pflow/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pflow/residual.hpp"

namespace pflow {

JacobianWorkspace symbolic_pattern(const PowerSystem& sys) {
    const auto& A = sys.addr;
    JacobianWorkspace ws;

    auto emit = [&](Index r, Index c) {
        ws.rows.push_back(r);
        ws.cols.push_back(c);
    };

    ws.slot_offset[static_cast<std::size_t>(ModelId::Pq)] = 0;

    ws.slot_offset[static_cast<std::size_t>(ModelId::Pv)] = ws.rows.size();
    for (std::size_t i = 0; i < sys.pv.size(); ++i) emit(A.gq_of_bus[sys.pv.bus[i]], sys.pv.qg[i]);
    for (std::size_t i = 0; i < sys.pv.size(); ++i) emit(sys.pv.qg[i], A.v_of_bus[sys.pv.bus[i]]);

    ws.slot_offset[static_cast<std::size_t>(ModelId::Slack)] = ws.rows.size();
    const auto& S = sys.slack;
    for (std::size_t i = 0; i < S.size(); ++i) emit(A.gp_of_bus[S.bus[i]], S.ps[i]);
    for (std::size_t i = 0; i < S.size(); ++i) emit(A.gq_of_bus[S.bus[i]], S.qg[i]);
    for (std::size_t i = 0; i < S.size(); ++i) emit(S.qg[i], A.v_of_bus[S.bus[i]]);
    for (std::size_t i = 0; i < S.size(); ++i) emit(S.ps[i], A.theta_of_bus[S.bus[i]]);

    ws.slot_offset[static_cast<std::size_t>(ModelId::Line)] = ws.rows.size();
    const auto& L = sys.lines;
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            for (std::size_t i = 0; i < L.size(); ++i) {
                const Index h = L.bus_h[i];
                const Index k = L.bus_k[i];
                const Index row_of[4] = {A.gp_of_bus[h], A.gq_of_bus[h], A.gp_of_bus[k], A.gq_of_bus[k]};
                const Index col_of[4] = {A.theta_of_bus[h], A.theta_of_bus[k], A.v_of_bus[h], A.v_of_bus[k]};
                emit(row_of[r], col_of[c]);
            }
        }
    }

    ws.slot_offset[static_cast<std::size_t>(ModelId::Shunt)] = ws.rows.size();
    for (std::size_t i = 0; i < sys.shunts.size(); ++i) {
        emit(A.gp_of_bus[sys.shunts.bus[i]], A.v_of_bus[sys.shunts.bus[i]]);
    }
    for (std::size_t i = 0; i < sys.shunts.size(); ++i) {
        emit(A.gq_of_bus[sys.shunts.bus[i]], A.v_of_bus[sys.shunts.bus[i]]);
    }

    ws.vals.assign(ws.rows.size(), 0.0);
    ws.csc = csc_from_triplets(sys.n_eq(), sys.n_var(), ws.rows, ws.cols, {}, &ws.slot_to_csc);

    const std::size_t nnz = ws.csc.nnz();
    ws.csc_slot_ptr.assign(nnz + 1, 0);
    for (Index p : ws.slot_to_csc) ++ws.csc_slot_ptr[p + 1];
    for (std::size_t p = 0; p < nnz; ++p) ws.csc_slot_ptr[p + 1] += ws.csc_slot_ptr[p];
    ws.csc_slots.resize(ws.slot_to_csc.size());
    std::vector<Index> fill(ws.csc_slot_ptr.begin(), ws.csc_slot_ptr.end() - 1);
    for (std::size_t s = 0; s < ws.slot_to_csc.size(); ++s) {
        ws.csc_slots[fill[ws.slot_to_csc[s]]++] = static_cast<Index>(s);
    }

    return ws;
}

void assemble_jacobian(const WorkflowConfig& cfg, JacobianWorkspace& ws, ThreadPool& pool) {
    const std::size_t nnz = ws.csc.nnz();
    auto gather = [&](std::size_t b, std::size_t e) {
        const Index* ptr = ws.csc_slot_ptr.data();
        const Index* slots = ws.csc_slots.data();
        const double* vals = ws.vals.data();
        double* out = ws.csc.values.data();
        for (std::size_t p = b; p < e; ++p) {
            double acc = 0.0;
            for (Index t = ptr[p]; t < ptr[p + 1]; ++t) acc += vals[slots[t]];
            out[p] = acc;
        }
    };
    if (cfg.intra.kind == IntraKind::Threaded && nnz > 0) {
        const std::size_t chunks = std::clamp<std::size_t>(cfg.intra.n_threads, 1, nnz);
        pool.parallel_for(chunks, [&](std::size_t c) { gather(nnz * c / chunks, nnz * (c + 1) / chunks); });
    } else {
        gather(0, nnz);
    }
}

void evaluate_jacobian(const PowerSystem& sys, std::span<const double> y, const WorkflowConfig& cfg,
                       JacobianWorkspace& ws, ThreadPool& pool) {
    if (y.size() != sys.n_var()) throw std::invalid_argument("evaluate_jacobian: state length does not match");
    if (ws.csc.n_cols != sys.n_var()) {
        throw std::invalid_argument("evaluate_jacobian: workspace was built for a different system");
    }
    ++ws.epoch;
    run_models(sys, y, cfg, Phase::Jacobian, {nullptr, nullptr, &ws}, pool);
    for (std::size_t m = 0; m < kModelCount; ++m) {
        if (ws.model_epoch[m] != ws.epoch) {
            throw std::logic_error("jacobian assembly reached before model " +
                                   std::string(model_name(static_cast<ModelId>(m))) + " completed");
        }
    }
    assemble_jacobian(cfg, ws, pool);
}

DenseMatrix finite_difference_jacobian(const PowerSystem& sys, std::span<const double> y, double rel_step) {
    const std::size_t n = sys.n_var();
    if (n > kFiniteDifferenceMaxVars) {
        throw std::invalid_argument("finite_difference_jacobian: " + std::to_string(n) + " variables exceed the " +
                                    std::to_string(kFiniteDifferenceMaxVars) + "-variable guard");
    }
    if (y.size() != n) throw std::invalid_argument("finite_difference_jacobian: state length does not match");

    const WorkflowConfig serial = make_workflow(1);
    ThreadPool pool(1);
    ResidualWorkspace rws(sys, 1);
    std::vector<double> yp(y.begin(), y.end());
    std::vector<double> gp(n), gm(n);
    DenseMatrix J(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = rel_step * std::max(1.0, std::abs(y[j]));
        yp[j] = y[j] + h;
        evaluate_residual(sys, yp, serial, rws, gp, pool);
        yp[j] = y[j] - h;
        evaluate_residual(sys, yp, serial, rws, gm, pool);
        yp[j] = y[j];
        const double inv = 1.0 / (2.0 * h);
        for (std::size_t i = 0; i < n; ++i) J(i, j) = (gp[i] - gm[i]) * inv;
    }
    return J;
}

JacobianMismatch worst_jacobian_mismatch(const CscMatrix& analytic, const DenseMatrix& fd) {
    const DenseMatrix a = to_dense(analytic);
    if (a.n_rows != fd.n_rows || a.n_cols != fd.n_cols) {
        throw std::invalid_argument("worst_jacobian_mismatch: matrix shapes differ");
    }
    JacobianMismatch worst;
    worst.rel_error = -1.0;
    for (std::size_t j = 0; j < a.n_cols; ++j) {
        for (std::size_t i = 0; i < a.n_rows; ++i) {
            const double e = std::abs(a(i, j) - fd(i, j)) / std::max(1.0, std::abs(fd(i, j)));
            if (e > worst.rel_error || std::isnan(e)) worst = {i, j, a(i, j), fd(i, j), e};
            if (std::isnan(e)) return worst;
        }
    }
    return worst;
}

}  // namespace pflow
