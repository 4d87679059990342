// SIMD kernels. Hot loops read contiguous arrays through restrict-qualified
// raw pointers (no bounds checks), contain no per-lane branches, and carry
// `omp simd` so the compiler packs them. Trigonometry goes through
// simd::sincos, which packs as well.

#include <algorithm>

#include "pflow/kernels.hpp"
#include "pflow/simd_math.hpp"

#define PFLOW_SIMD _Pragma("omp simd")

namespace pflow::kernels::packed {

void pq_residual(const PqGroup& g, BusContrib out, std::size_t begin, std::size_t end) {
    const double* __restrict p0 = g.p0.data();
    const double* __restrict q0 = g.q0.data();
    double* __restrict p = out.p;
    double* __restrict q = out.q;
    PFLOW_SIMD
    for (std::size_t i = begin; i < end; ++i) {
        p[i] = -p0[i];
        q[i] = -q0[i];
    }
}

void pv_residual(const PvGroup& g, StateView s, BusContrib out, double* residual, std::size_t begin,
                 std::size_t end) {
    const Index* __restrict bus = g.bus.data();
    const Index* __restrict qg = g.qg.data();
    const double* __restrict p0 = g.p0.data();
    const double* __restrict v0 = g.v0.data();
    const double* __restrict vm = s.vm;
    const double* __restrict y = s.y;
    double* __restrict p = out.p;
    double* __restrict q = out.q;
    PFLOW_SIMD
    for (std::size_t i = begin; i < end; ++i) {
        p[i] = p0[i];
        q[i] = y[qg[i]];
    }
    // Scattered residual rows, distinct per device.
    for (std::size_t i = begin; i < end; ++i) residual[qg[i]] = vm[bus[i]] - v0[i];
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
    const Index* __restrict bus = g.bus.data();
    const double* __restrict gs = g.g.data();
    const double* __restrict bs = g.b.data();
    const double* __restrict vm = s.vm;
    double* __restrict p = out.p;
    double* __restrict q = out.q;
    PFLOW_SIMD
    for (std::size_t i = begin; i < end; ++i) {
        const double v2 = vm[bus[i]] * vm[bus[i]];
        p[i] = -gs[i] * v2;
        q[i] = bs[i] * v2;
    }
}

namespace {

// Lines are processed in blocks small enough that the gathered terminal
// states stay in L1 between the indexed-load pass and the packed pass.
constexpr std::size_t kBlock = 256;

struct Terminals {
    alignas(64) double vh[kBlock];
    alignas(64) double vk[kBlock];
    alignas(64) double angle[kBlock];
};

// Indexed loads do not pack without hardware gathers, so they run as a
// plain loop into block-local arrays.
void gather_terminals(const LineGroup& g, StateView s, std::size_t begin, std::size_t end, Terminals& t) {
    const Index* __restrict bh = g.bus_h.data();
    const Index* __restrict bk = g.bus_k.data();
    const double* __restrict theta = s.theta;
    const double* __restrict vm = s.vm;
    for (std::size_t i = begin, j = 0; i < end; ++i, ++j) {
        const Index h = bh[i];
        const Index k = bk[i];
        t.vh[j] = vm[h];
        t.vk[j] = vm[k];
        t.angle[j] = theta[h] - theta[k];
    }
}

}  // namespace

void line_residual(const LineGroup& g, StateView s, LineFlows out, std::size_t begin, std::size_t end) {
    Terminals t;
    for (std::size_t b0 = begin; b0 < end; b0 += kBlock) {
        const std::size_t len = std::min(kBlock, end - b0);
        gather_terminals(g, s, b0, b0 + len, t);

        const double* __restrict gl = g.gl.data() + b0;
        const double* __restrict bl = g.bl.data() + b0;
        const double* __restrict glk_s = g.gl_k.data() + b0;
        const double* __restrict blk_s = g.bl_k.data() + b0;
        const double* __restrict glh = g.glh.data() + b0;
        const double* __restrict blh = g.blh.data() + b0;
        const double* __restrict glk = g.glk.data() + b0;
        const double* __restrict blk = g.blk.data() + b0;
        const double* __restrict vhs = t.vh;
        const double* __restrict vks = t.vk;
        const double* __restrict ang = t.angle;
        double* __restrict ph = out.ph + b0;
        double* __restrict pk = out.pk + b0;
        double* __restrict qh = out.qh + b0;
        double* __restrict qk = out.qk + b0;

        PFLOW_SIMD
        for (std::size_t i = 0; i < len; ++i) {
            double si, c;
            simd::sincos(ang[i], si, c);
            const double vh = vhs[i];
            const double vk = vks[i];
            const double w = vh * vk;
            ph[i] = vh * vh * (gl[i] + glh[i]) - w * (gl[i] * c + bl[i] * si);
            qh[i] = -vh * vh * (bl[i] + blh[i]) - w * (gl[i] * si - bl[i] * c);
            pk[i] = vk * vk * (glk_s[i] + glk[i]) - w * (glk_s[i] * c - blk_s[i] * si);
            qk[i] = -vk * vk * (blk_s[i] + blk[i]) + w * (glk_s[i] * si + blk_s[i] * c);
        }
    }
}

void pv_jacobian(const PvGroup& g, SlotBlock out, std::size_t begin, std::size_t end) {
    (void)g;
    double* __restrict a = out.vals;
    double* __restrict b = out.vals + out.stride;
    PFLOW_SIMD
    for (std::size_t i = begin; i < end; ++i) {
        a[i] = 1.0;
        b[i] = 1.0;
    }
}

void slack_jacobian(const SlackGroup& g, SlotBlock out, std::size_t begin, std::size_t end) {
    (void)g;
    for (std::size_t j = 0; j < kSlackSlots; ++j) {
        double* __restrict block = out.vals + j * out.stride;
        PFLOW_SIMD
        for (std::size_t i = begin; i < end; ++i) block[i] = 1.0;
    }
}

void shunt_jacobian(const ShuntGroup& g, StateView s, SlotBlock out, std::size_t begin, std::size_t end) {
    const Index* __restrict bus = g.bus.data();
    const double* __restrict gs = g.g.data();
    const double* __restrict bs = g.b.data();
    const double* __restrict vm = s.vm;
    double* __restrict dp = out.vals;
    double* __restrict dq = out.vals + out.stride;
    PFLOW_SIMD
    for (std::size_t i = begin; i < end; ++i) {
        const double v = vm[bus[i]];
        dp[i] = -2.0 * gs[i] * v;
        dq[i] = 2.0 * bs[i] * v;
    }
}

void line_jacobian(const LineGroup& g, StateView s, SlotBlock out, std::size_t begin, std::size_t end) {
    const std::size_t n = out.stride;
    Terminals t;
    for (std::size_t b0 = begin; b0 < end; b0 += kBlock) {
        const std::size_t len = std::min(kBlock, end - b0);
        gather_terminals(g, s, b0, b0 + len, t);

        const double* __restrict gl = g.gl.data() + b0;
        const double* __restrict bl = g.bl.data() + b0;
        const double* __restrict glk_s = g.gl_k.data() + b0;
        const double* __restrict blk_s = g.bl_k.data() + b0;
        const double* __restrict glh = g.glh.data() + b0;
        const double* __restrict blh = g.blh.data() + b0;
        const double* __restrict glk = g.glk.data() + b0;
        const double* __restrict blk = g.blk.data() + b0;
        const double* __restrict vhs = t.vh;
        const double* __restrict vks = t.vk;
        const double* __restrict ang = t.angle;
        double* __restrict J = out.vals + b0;

        PFLOW_SIMD
        for (std::size_t i = 0; i < len; ++i) {
            double si, c;
            simd::sincos(ang[i], si, c);
            const double vh = vhs[i];
            const double vk = vks[i];
            const double w = vh * vk;
            const double ah = gl[i] * c + bl[i] * si;
            const double bhh = gl[i] * si - bl[i] * c;
            const double ak = glk_s[i] * c - blk_s[i] * si;
            const double bkk = glk_s[i] * si + blk_s[i] * c;

            J[0 * n + i] = -w * bhh;
            J[1 * n + i] = w * bhh;
            J[2 * n + i] = -(2.0 * vh * (gl[i] + glh[i]) - vk * ah);
            J[3 * n + i] = vh * ah;

            J[4 * n + i] = w * ah;
            J[5 * n + i] = -w * ah;
            J[6 * n + i] = 2.0 * vh * (bl[i] + blh[i]) + vk * bhh;
            J[7 * n + i] = vh * bhh;

            J[8 * n + i] = -w * bkk;
            J[9 * n + i] = w * bkk;
            J[10 * n + i] = vk * ak;
            J[11 * n + i] = -(2.0 * vk * (glk_s[i] + glk[i]) - vh * ak);

            J[12 * n + i] = -w * ak;
            J[13 * n + i] = w * ak;
            J[14 * n + i] = -vk * bkk;
            J[15 * n + i] = 2.0 * vk * (blk_s[i] + blk[i]) - vh * bkk;
        }
    }
}

}  // namespace pflow::kernels::packed
