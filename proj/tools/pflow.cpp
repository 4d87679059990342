// pflow {solve|bench|check} <case> [flags]

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pflow/bench.hpp"
#include "pflow/case_io.hpp"
#include "pflow/jacobian.hpp"
#include "pflow/newton.hpp"
#include "pflow/residual.hpp"

namespace {

using namespace pflow;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitCheckFailed = 3;

constexpr double kFdTolerance = 1e-6;
constexpr double kWorkflowTolerance = 1e-12;

PowerSystem load_system(const std::string& path) {
    if (!std::filesystem::exists(path)) throw std::runtime_error("file not found: " + path);
    return build_system(load_case(path));
}

void dump_jacobian(const std::string& path, const CscMatrix& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    write_matrix_market(os, j);
}

struct SolveArgs {
    std::string path;
    int workflow = 1;
    double tol = 1e-8;
    int max_iter = 20;
    std::string solver = "builtin";
    std::size_t threads = 0;
    bool json = false;
    std::string dump;
};

int cmd_solve(const SolveArgs& a) {
    const PowerSystem sys = load_system(a.path);
    NewtonOptions opt;
    opt.tol = a.tol;
    opt.max_iter = a.max_iter;
    opt.solver = parse_solver_kind(a.solver);
    opt.workflow = make_workflow(a.workflow, a.threads);
    ThreadPool pool(a.threads);

    const std::vector<double> y0 = flat_start(sys);
    SolveResult r;
    std::string failure;
    try {
        r = newton_solve(sys, y0, opt, pool);
    } catch (const SingularMatrixError& e) {
        failure = e.what();
        r.status = SolveStatus::Diverged;
        r.final_mismatch = std::numeric_limits<double>::infinity();
    }

    if (!a.dump.empty() && !r.y.empty()) {
        JacobianWorkspace jws = symbolic_pattern(sys);
        evaluate_jacobian(sys, r.y, opt.workflow, jws, pool);
        dump_jacobian(a.dump, jws.csc);
    }

    if (a.json) {
        nlohmann::json j;
        j["case"] = std::filesystem::path(a.path).stem().string();
        j["workflow"] = a.workflow;
        j["status"] = std::string(to_string(r.status));
        j["converged"] = r.converged;
        j["iterations"] = r.iterations;
        j["final_mismatch"] = std::isfinite(r.final_mismatch) ? nlohmann::json(r.final_mismatch) : nlohmann::json();
        j["timings_ms"] = {{"residual", r.timings.residual_ms},
                           {"jacobian", r.timings.jacobian_ms},
                           {"linear", r.timings.linear_ms},
                           {"update", r.timings.update_ms}};
        if (!failure.empty()) j["error"] = failure;
        std::vector<double> vm, va;
        if (r.converged) {
            for (std::size_t b = 0; b < sys.n_bus; ++b) {
                vm.push_back(r.y[sys.addr.v_of_bus[b]]);
                va.push_back(r.y[sys.addr.theta_of_bus[b]] * 180.0 / M_PI);
            }
        }
        j["bus_id"] = sys.buses.id;
        j["vm"] = vm;
        j["va_deg"] = va;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "case        " << a.path << "\n"
                  << "workflow    " << a.workflow << " (" << workflow_description(a.workflow) << ")\n"
                  << "status      " << to_string(r.status) << "\n"
                  << "iterations  " << r.iterations << "\n"
                  << "mismatch    " << r.final_mismatch << "\n"
                  << "time (ms)   residual " << r.timings.residual_ms << ", jacobian " << r.timings.jacobian_ms
                  << ", linear " << r.timings.linear_ms << ", update " << r.timings.update_ms << "\n";
        if (!failure.empty()) std::cout << "error       " << failure << "\n";
        if (r.converged) {
            std::cout << "\n  bus        Vm (pu)     Va (deg)\n";
            for (std::size_t b = 0; b < sys.n_bus; ++b) {
                char line[96];
                std::snprintf(line, sizeof line, "%5d  %12.6f  %11.5f\n", sys.buses.id[b],
                              r.y[sys.addr.v_of_bus[b]], r.y[sys.addr.theta_of_bus[b]] * 180.0 / M_PI);
                std::cout << line;
            }
        }
    }
    return r.converged ? kExitOk : kExitNotConverged;
}

struct BenchArgs {
    std::string path;
    std::vector<int> workflows = {1, 2, 3, 4, 5, 6};
    std::size_t repeat = 5;
    std::string format = "table";
    std::size_t threads = 0;
    std::string solver = "builtin";
};

int cmd_bench(const BenchArgs& a) {
    const PowerSystem sys = load_system(a.path);
    BenchOptions opt;
    opt.workflows = a.workflows;
    opt.repeats = a.repeat;
    opt.threads = a.threads;
    opt.solver = parse_solver_kind(a.solver);
    const BenchReport rep = run_bench(sys, std::filesystem::path(a.path).stem().string(), opt);
    if (a.format == "csv") {
        std::cout << to_csv(rep);
    } else if (a.format == "json") {
        std::cout << to_json(rep) << "\n";
    } else {
        std::cout << to_table(rep);
    }
    return kExitOk;
}

struct CheckArgs {
    std::string path;
    double fd_step = 1e-6;
    std::size_t threads = 0;
    long corrupt_slot = -1;
    std::string dump;
};

// Flat start moved by a fixed pseudo-random offset so that no partial
// vanishes by symmetry.
std::vector<double> check_state(const PowerSystem& sys) {
    std::vector<double> y = flat_start(sys);
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t b = 0; b < sys.n_bus; ++b) {
        y[sys.addr.theta_of_bus[b]] += 0.1 * u(rng);
        y[sys.addr.v_of_bus[b]] += 0.05 * u(rng);
    }
    for (std::size_t i = 2 * sys.n_bus; i < y.size(); ++i) y[i] += 0.1 * u(rng);
    return y;
}

int cmd_check(const CheckArgs& a) {
    const PowerSystem sys = load_system(a.path);
    ThreadPool pool(a.threads);
    const std::vector<double> y = check_state(sys);
    bool ok = true;

    const WorkflowConfig serial = make_workflow(1);
    JacobianWorkspace jws = symbolic_pattern(sys);
    evaluate_jacobian(sys, y, serial, jws, pool);
    if (a.corrupt_slot >= 0) {
        if (static_cast<std::size_t>(a.corrupt_slot) >= jws.vals.size()) {
            throw std::invalid_argument("--corrupt-slot out of range (" + std::to_string(jws.vals.size()) + " slots)");
        }
        jws.vals[a.corrupt_slot] += 1.0;
        assemble_jacobian(serial, jws, pool);
    }
    if (!a.dump.empty()) dump_jacobian(a.dump, jws.csc);

    const DenseMatrix fd = finite_difference_jacobian(sys, y, a.fd_step);
    const JacobianMismatch w = worst_jacobian_mismatch(jws.csc, fd);
    const bool fd_ok = w.rel_error < kFdTolerance;
    ok = ok && fd_ok;
    std::cout << "jacobian vs finite difference: " << (fd_ok ? "ok" : "FAILED") << "  worst rel error "
              << w.rel_error << " at (row " << w.row << ", col " << w.col << "): analytic " << w.analytic
              << ", fd " << w.fd << "\n";

    ResidualWorkspace rws(sys, pool.size());
    std::vector<double> g_ref(sys.n_eq()), g(sys.n_eq());
    evaluate_residual(sys, y, serial, rws, g_ref, pool);
    if (a.corrupt_slot >= 0) evaluate_jacobian(sys, y, serial, jws, pool);
    const std::vector<double> j_clean = jws.csc.values;
    for (int id = 2; id <= kWorkflowCount; ++id) {
        const WorkflowConfig cfg = make_workflow(id, pool.size());
        evaluate_residual(sys, y, cfg, rws, g, pool);
        evaluate_jacobian(sys, y, cfg, jws, pool);
        double dg = 0.0, dj = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dg = std::max(dg, std::abs(g[i] - g_ref[i]));
        for (std::size_t i = 0; i < j_clean.size(); ++i) dj = std::max(dj, std::abs(jws.csc.values[i] - j_clean[i]));
        const bool wf_ok = dg <= kWorkflowTolerance && dj <= kWorkflowTolerance;
        ok = ok && wf_ok;
        std::cout << "workflow " << id << " vs 1: " << (wf_ok ? "ok" : "FAILED") << "  max |dg| " << dg
                  << ", max |dJ| " << dj << "\n";
    }
    return ok ? kExitOk : kExitCheckFailed;
}

std::vector<int> parse_workflow_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int id = 0;
        try {
            id = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || id < 1 || id > kWorkflowCount) {
            throw std::invalid_argument("invalid workflow id '" + item + "' (expected 1..6)");
        }
        out.push_back(id);
    }
    if (out.empty()) throw std::invalid_argument("empty workflow list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Newton-Raphson AC power flow with per-model parallel kernels"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve a case from flat start");
    solve->add_option("case", sa.path, "MATPOWER case file")->required();
    solve->add_option("--workflow", sa.workflow, "Workflow 1..6")->check(CLI::Range(1, kWorkflowCount));
    solve->add_option("--tol", sa.tol, "Mismatch tolerance (infinity norm)")->check(CLI::PositiveNumber);
    solve->add_option("--max-iter", sa.max_iter, "Iteration limit")->check(CLI::Range(1, 1000000));
    solve->add_option("--solver", sa.solver, "builtin, dense or external")
        ->check(CLI::IsMember({"builtin", "dense", "external"}));
    solve->add_option("--threads", sa.threads, "Worker threads (default PFLOW_THREADS or hardware)");
    solve->add_flag("--json", sa.json, "JSON report");
    solve->add_option("--dump-jacobian", sa.dump, "Write the final Jacobian as MatrixMarket");

    BenchArgs ba;
    std::string wf_list = "1,2,3,4,5,6";
    auto* bench = app.add_subcommand("bench", "Time residual, Jacobian and solve per workflow");
    bench->add_option("case", ba.path, "MATPOWER case file")->required();
    bench->add_option("--workflows", wf_list, "Comma-separated workflow ids");
    bench->add_option("--repeat", ba.repeat, "Runs per measurement, first is warm-up")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
    bench->add_option("--format", ba.format, "table, csv or json")->check(CLI::IsMember({"table", "csv", "json"}));
    bench->add_option("--threads", ba.threads, "Worker threads (default PFLOW_THREADS or hardware)");
    bench->add_option("--solver", ba.solver, "builtin, dense or external")
        ->check(CLI::IsMember({"builtin", "dense", "external"}));

    CheckArgs ca;
    auto* check = app.add_subcommand("check", "Compare the Jacobian with finite differences and workflows with each other");
    check->add_option("case", ca.path, "MATPOWER case file")->required();
    check->add_option("--fd-step", ca.fd_step, "Relative finite-difference step")->check(CLI::PositiveNumber);
    check->add_option("--threads", ca.threads, "Worker threads (default PFLOW_THREADS or hardware)");
    check->add_option("--dump-jacobian", ca.dump, "Write the analytic Jacobian as MatrixMarket");
    check->add_option("--corrupt-slot", ca.corrupt_slot, "Perturb one Jacobian slot (fault injection)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*solve) {
            if (sa.threads == 0) sa.threads = default_thread_count();
            return cmd_solve(sa);
        }
        if (*bench) {
            if (ba.threads == 0) ba.threads = default_thread_count();
            ba.workflows = parse_workflow_list(wf_list);
            return cmd_bench(ba);
        }
        if (ca.threads == 0) ca.threads = default_thread_count();
        return cmd_check(ca);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
