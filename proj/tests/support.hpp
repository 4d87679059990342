#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pflow/case_io.hpp"
#include "pflow/system.hpp"

namespace pflow::test {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(PFLOW_DATA_DIR) / name;
}

inline PowerSystem load_system(const std::string& name) { return build_system(load_case(data_path(name))); }

inline const std::vector<std::string>& bundled_cases() {
    static const std::vector<std::string> names = {"case2.m", "case5_shift.m", "case9.m", "case14.m"};
    return names;
}

/// Heap allocations (operator new, all forms) since process start.
std::size_t allocation_count();

/// Flat start perturbed by uniform noise: theta +- 0.3 rad, V +- 0.1 pu,
/// generator variables +- 0.5 pu.
inline std::vector<double> random_state(const PowerSystem& sys, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> y = flat_start(sys);
    for (std::size_t b = 0; b < sys.n_bus; ++b) {
        y[sys.addr.theta_of_bus[b]] += 0.3 * u(rng);
        y[sys.addr.v_of_bus[b]] += 0.1 * u(rng);
    }
    for (std::size_t i = 2 * sys.n_bus; i < y.size(); ++i) y[i] += 0.5 * u(rng);
    return y;
}

}  // namespace pflow::test
