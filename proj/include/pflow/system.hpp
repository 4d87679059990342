#pragma once

// Per-unit network in structure-of-arrays form plus the global addressing
// of variables y = [theta, V, Qg, Ps] and equations g = [gp, gq, gV, gtheta].

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pflow/case_io.hpp"

namespace pflow {

using Index = std::int32_t;

struct BusGroup {
    std::vector<int> id;   // external bus number, in file order
    std::size_t size() const { return id.size(); }
};

/// Pi-model branches. Every array has one slot per in-service line.
///
/// Terminal injections leaving the bus (theta = theta_h - theta_k):
///   P_h = v_h^2 (gl + glh)     - v_h v_k (gl cos + bl sin)
///   Q_h = -v_h^2 (bl + blh)    - v_h v_k (gl sin - bl cos)
///   P_k = v_k^2 (gl_k + glk)   - v_h v_k (gl_k cos - bl_k sin)
///   Q_k = -v_k^2 (bl_k + blk)  + v_h v_k (gl_k sin + bl_k cos)
/// For a line without phase shift gl_k == gl and bl_k == bl.
struct LineGroup {
    std::vector<Index> bus_h, bus_k;
    std::vector<double> gl, bl;       // series term seen from h
    std::vector<double> gl_k, bl_k;   // series term seen from k
    std::vector<double> glh, blh;     // shunt part at h
    std::vector<double> glk, blk;     // shunt part at k
    std::size_t size() const { return bus_h.size(); }
};

struct PqGroup {
    std::vector<Index> bus;
    std::vector<double> p0, q0;   // pu demand
    std::size_t size() const { return bus.size(); }
};

struct PvGroup {
    std::vector<Index> bus;
    std::vector<double> p0, v0;
    std::vector<Index> qg;   // variable position of Q_g (also the g_V row)
    std::size_t size() const { return bus.size(); }
};

struct SlackGroup {
    std::vector<Index> bus;
    std::vector<double> v0, theta0;   // theta0 in radians
    std::vector<Index> qg;            // variable position of Q_g (also the g_V row)
    std::vector<Index> ps;            // variable position of P_s (also the g_theta row)
    std::size_t size() const { return bus.size(); }
};

struct ShuntGroup {
    std::vector<Index> bus;
    std::vector<double> g, b;
    std::size_t size() const { return bus.size(); }
};

/// Blocks are contiguous: theta (n_bus), V (n_bus), Qg (n_pv + n_slack),
/// Ps (n_slack). Equations mirror the layout: gp, gq, gV, gtheta.
struct AddressMap {
    std::vector<Index> theta_of_bus, v_of_bus;
    std::vector<Index> qg_of_gen;   // PV devices first, then slack devices
    std::vector<Index> ps_of_slack;
    std::vector<Index> gp_of_bus, gq_of_bus;
    std::vector<Index> gv_of_gen;
    std::vector<Index> gtheta_of_slack;
    std::size_t n_var = 0;
};

struct PowerSystem {
    std::size_t n_bus = 0;
    double base_mva = 100.0;
    BusGroup buses;
    PqGroup pq;
    PvGroup pv;
    SlackGroup slack;
    LineGroup lines;
    ShuntGroup shunts;
    AddressMap addr;

    std::size_t n_var() const { return addr.n_var; }
    std::size_t n_eq() const { return addr.n_var; }
};

/// Throws std::invalid_argument if validate_case(raw) is not empty.
PowerSystem build_system(const RawCase& raw);

std::size_t count_variables(const PowerSystem& sys);

std::vector<double> flat_start(const PowerSystem& sys);

}  // namespace pflow
