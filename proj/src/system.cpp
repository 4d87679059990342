#include "pflow/system.hpp"

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace pflow {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct BusGen {
    double pg = 0.0;
    double qg = 0.0;
    double vg = 0.0;
    int count = 0;
};

}  // namespace

PowerSystem build_system(const RawCase& raw) {
    if (auto v = validate_case(raw); !v.empty()) {
        throw std::invalid_argument("case is not valid: " + std::string(to_string(v.front().code)) + ": " +
                                    v.front().message);
    }
    const double base = raw.base_mva;
    PowerSystem sys;
    sys.base_mva = base;

    std::unordered_map<int, Index> index_of;
    for (const auto& b : raw.buses) {
        if (b.type == static_cast<int>(BusType::Isolated)) continue;
        index_of.emplace(b.id, static_cast<Index>(sys.buses.id.size()));
        sys.buses.id.push_back(b.id);
    }
    const std::size_t n = sys.buses.size();
    sys.n_bus = n;

    // Generators are aggregated per bus: one Q_g / g_V pair per regulated bus.
    std::unordered_map<int, BusGen> gen_at;
    for (const auto& g : raw.gens) {
        if (g.status == 0 || !index_of.count(g.bus)) continue;
        auto& acc = gen_at[g.bus];
        acc.pg += g.pg;
        acc.qg += g.qg;
        if (acc.count++ == 0) acc.vg = g.vg;
    }

    for (const auto& b : raw.buses) {
        auto it = index_of.find(b.id);
        if (it == index_of.end()) continue;
        const Index bus = it->second;
        auto gen = gen_at.find(b.id);
        const bool has_gen = gen != gen_at.end();

        double p_load = b.pd;
        double q_load = b.qd;
        if (b.type == static_cast<int>(BusType::Slack)) {
            sys.slack.bus.push_back(bus);
            sys.slack.v0.push_back(gen->second.vg);
            sys.slack.theta0.push_back(b.va * kDegToRad);
        } else if (b.type == static_cast<int>(BusType::PV) && has_gen) {
            sys.pv.bus.push_back(bus);
            sys.pv.p0.push_back(gen->second.pg / base);
            sys.pv.v0.push_back(gen->second.vg);
        } else if (has_gen) {
            // Generators on load buses are fixed injections.
            p_load -= gen->second.pg;
            q_load -= gen->second.qg;
        }
        if (p_load != 0.0 || q_load != 0.0) {
            sys.pq.bus.push_back(bus);
            sys.pq.p0.push_back(p_load / base);
            sys.pq.q0.push_back(q_load / base);
        }
        if (b.gs != 0.0 || b.bs != 0.0) {
            sys.shunts.bus.push_back(bus);
            sys.shunts.g.push_back(b.gs / base);
            sys.shunts.b.push_back(b.bs / base);
        }
    }

    auto& L = sys.lines;
    for (const auto& br : raw.branches) {
        if (br.status == 0) continue;
        auto fh = index_of.find(br.fbus);
        auto fk = index_of.find(br.tbus);
        if (fh == index_of.end() || fk == index_of.end()) continue;

        using C = std::complex<double>;
        const C ys = 1.0 / C(br.r, br.x);
        const C charging(0.0, br.b / 2.0);
        const double m = br.ratio;
        const C shift = std::polar(1.0, br.angle * kDegToRad);
        const C series_h = ys * shift / m;
        const C series_k = ys * std::conj(shift) / m;
        const C yff = (ys + charging) / (m * m);
        const C ytt = ys + charging;
        const C shunt_h = yff - series_h;
        const C shunt_k = ytt - series_k;

        L.bus_h.push_back(fh->second);
        L.bus_k.push_back(fk->second);
        L.gl.push_back(series_h.real());
        L.bl.push_back(series_h.imag());
        L.gl_k.push_back(series_k.real());
        L.bl_k.push_back(series_k.imag());
        L.glh.push_back(shunt_h.real());
        L.blh.push_back(shunt_h.imag());
        L.glk.push_back(shunt_k.real());
        L.blk.push_back(shunt_k.imag());
    }

    const std::size_t n_pv = sys.pv.size();
    const std::size_t n_slack = sys.slack.size();
    auto& A = sys.addr;
    A.n_var = 2 * n + n_pv + 2 * n_slack;
    A.theta_of_bus.resize(n);
    A.v_of_bus.resize(n);
    A.gp_of_bus.resize(n);
    A.gq_of_bus.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        A.theta_of_bus[i] = A.gp_of_bus[i] = static_cast<Index>(i);
        A.v_of_bus[i] = A.gq_of_bus[i] = static_cast<Index>(n + i);
    }
    for (std::size_t k = 0; k < n_pv; ++k) {
        const auto pos = static_cast<Index>(2 * n + k);
        A.qg_of_gen.push_back(pos);
        A.gv_of_gen.push_back(pos);
        sys.pv.qg.push_back(pos);
    }
    for (std::size_t j = 0; j < n_slack; ++j) {
        const auto qpos = static_cast<Index>(2 * n + n_pv + j);
        const auto ppos = static_cast<Index>(2 * n + n_pv + n_slack + j);
        A.qg_of_gen.push_back(qpos);
        A.gv_of_gen.push_back(qpos);
        A.ps_of_slack.push_back(ppos);
        A.gtheta_of_slack.push_back(ppos);
        sys.slack.qg.push_back(qpos);
        sys.slack.ps.push_back(ppos);
    }
    return sys;
}

std::size_t count_variables(const PowerSystem& sys) {
    return 2 * sys.n_bus + sys.pv.size() + 2 * sys.slack.size();
}

std::vector<double> flat_start(const PowerSystem& sys) {
    std::vector<double> y(sys.n_var(), 0.0);
    const double theta_ref = sys.slack.size() ? sys.slack.theta0.front() : 0.0;
    for (std::size_t i = 0; i < sys.n_bus; ++i) {
        y[sys.addr.theta_of_bus[i]] = theta_ref;
        y[sys.addr.v_of_bus[i]] = 1.0;
    }
    for (std::size_t k = 0; k < sys.pv.size(); ++k) y[sys.addr.v_of_bus[sys.pv.bus[k]]] = sys.pv.v0[k];
    for (std::size_t j = 0; j < sys.slack.size(); ++j) {
        y[sys.addr.v_of_bus[sys.slack.bus[j]]] = sys.slack.v0[j];
    }
    return y;
}

}  // namespace pflow
