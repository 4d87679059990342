// Scalar reference kernels. This translation unit is built with
// auto-vectorization disabled so it measures one device per instruction.

#include <cmath>

#include "pflow/kernels.hpp"

namespace pflow::kernels::scalar {

void pq_residual(const PqGroup& g, BusContrib out, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        out.p[i] = -g.p0[i];
        out.q[i] = -g.q0[i];
    }
}

void pv_residual(const PvGroup& g, StateView s, BusContrib out, double* residual, std::size_t begin,
                 std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        const Index q = g.qg[i];
        out.p[i] = g.p0[i];
        out.q[i] = s.y[q];
        residual[q] = s.vm[g.bus[i]] - g.v0[i];
    }
}

void slack_residual(const SlackGroup& g, StateView s, BusContrib out, double* residual, std::size_t begin,
                    std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        const Index bus = g.bus[i];
        out.p[i] = s.y[g.ps[i]];
        out.q[i] = s.y[g.qg[i]];
        residual[g.qg[i]] = s.vm[bus] - g.v0[i];
        residual[g.ps[i]] = s.theta[bus] - g.theta0[i];
    }
}

void shunt_residual(const ShuntGroup& g, StateView s, BusContrib out, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        const double v = s.vm[g.bus[i]];
        out.p[i] = -g.g[i] * v * v;
        out.q[i] = g.b[i] * v * v;
    }
}

void line_residual(const LineGroup& g, StateView s, LineFlows out, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        const Index h = g.bus_h[i];
        const Index k = g.bus_k[i];
        const double vh = s.vm[h];
        const double vk = s.vm[k];
        const double t = s.theta[h] - s.theta[k];
        const double c = std::cos(t);
        const double sn = std::sin(t);
        const double w = vh * vk;
        out.ph[i] = vh * vh * (g.gl[i] + g.glh[i]) - w * (g.gl[i] * c + g.bl[i] * sn);
        out.qh[i] = -vh * vh * (g.bl[i] + g.blh[i]) - w * (g.gl[i] * sn - g.bl[i] * c);
        out.pk[i] = vk * vk * (g.gl_k[i] + g.glk[i]) - w * (g.gl_k[i] * c - g.bl_k[i] * sn);
        out.qk[i] = -vk * vk * (g.bl_k[i] + g.blk[i]) + w * (g.gl_k[i] * sn + g.bl_k[i] * c);
    }
}

void pv_jacobian(const PvGroup& g, SlotBlock out, std::size_t begin, std::size_t end) {
    (void)g;
    double* dq_dqg = out.vals;
    double* dv_dv = out.vals + out.stride;
    for (std::size_t i = begin; i < end; ++i) {
        dq_dqg[i] = 1.0;
        dv_dv[i] = 1.0;
    }
}

void slack_jacobian(const SlackGroup& g, SlotBlock out, std::size_t begin, std::size_t end) {
    (void)g;
    for (std::size_t j = 0; j < kSlackSlots; ++j) {
        double* block = out.vals + j * out.stride;
        for (std::size_t i = begin; i < end; ++i) block[i] = 1.0;
    }
}

void shunt_jacobian(const ShuntGroup& g, StateView s, SlotBlock out, std::size_t begin, std::size_t end) {
    double* dp_dv = out.vals;
    double* dq_dv = out.vals + out.stride;
    for (std::size_t i = begin; i < end; ++i) {
        const double v = s.vm[g.bus[i]];
        dp_dv[i] = -2.0 * g.g[i] * v;
        dq_dv[i] = 2.0 * g.b[i] * v;
    }
}

void line_jacobian(const LineGroup& g, StateView s, SlotBlock out, std::size_t begin, std::size_t end) {
    double* J[kLineSlots];
    for (std::size_t j = 0; j < kLineSlots; ++j) J[j] = out.vals + j * out.stride;

    for (std::size_t i = begin; i < end; ++i) {
        const Index h = g.bus_h[i];
        const Index k = g.bus_k[i];
        const double vh = s.vm[h];
        const double vk = s.vm[k];
        const double t = s.theta[h] - s.theta[k];
        const double c = std::cos(t);
        const double sn = std::sin(t);
        const double w = vh * vk;
        const double ah = g.gl[i] * c + g.bl[i] * sn;
        const double bh = g.gl[i] * sn - g.bl[i] * c;
        const double ak = g.gl_k[i] * c - g.bl_k[i] * sn;
        const double bk = g.gl_k[i] * sn + g.bl_k[i] * c;

        // Residual rows carry the negated terminal injections.
        J[0][i] = -w * bh;
        J[1][i] = w * bh;
        J[2][i] = -(2.0 * vh * (g.gl[i] + g.glh[i]) - vk * ah);
        J[3][i] = vh * ah;

        J[4][i] = w * ah;
        J[5][i] = -w * ah;
        J[6][i] = 2.0 * vh * (g.bl[i] + g.blh[i]) + vk * bh;
        J[7][i] = vh * bh;

        J[8][i] = -w * bk;
        J[9][i] = w * bk;
        J[10][i] = vk * ak;
        J[11][i] = -(2.0 * vk * (g.gl_k[i] + g.glk[i]) - vh * ak);

        J[12][i] = -w * ak;
        J[13][i] = w * ak;
        J[14][i] = -vk * bk;
        J[15][i] = 2.0 * vk * (g.bl_k[i] + g.blk[i]) - vh * bk;
    }
}

}  // namespace pflow::kernels::scalar
