#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "pflow/newton.hpp"
#include "pflow/residual.hpp"
#include "support.hpp"

using namespace pflow;

TEST_CASE("two-bus solution matches the closed-form oracle") {
    const PowerSystem sys = test::load_system("case2.m");
    for (SolverKind k : {SolverKind::Builtin, SolverKind::Dense, SolverKind::External}) {
        NewtonOptions opt;
        opt.solver = k;
        const SolveResult r = newton_solve(sys, flat_start(sys), opt);
        REQUIRE(r.converged);
        CHECK(r.status == SolveStatus::Converged);
        CHECK(r.final_mismatch <= 1e-8);
        CHECK(std::abs(r.y[sys.addr.v_of_bus[1]] - 0.9782482306186261764) <= 1e-8);
        CHECK(std::abs(r.y[sys.addr.theta_of_bus[1]] - -0.051134051845636953889) <= 1e-8);
        CHECK(std::abs(r.y[sys.slack.ps[0]] - 0.5) <= 1e-8);
        CHECK(std::abs(r.y[sys.slack.qg[0]] - 0.23030399291527175424) <= 1e-8);
    }
}

TEST_CASE("bundled cases converge from flat start") {
    for (const auto& name : test::bundled_cases()) {
        CAPTURE(name);
        const PowerSystem sys = test::load_system(name);
        const SolveResult r = newton_solve(sys, flat_start(sys), NewtonOptions{});
        CHECK(r.converged);
        CHECK(r.iterations <= 10);
        CHECK(r.final_mismatch <= 1e-8);
        CHECK(r.mismatch_history.size() == static_cast<std::size_t>(r.iterations) + 1);
    }
}

TEST_CASE("case14 reproduces the published voltages") {
    const RawCase raw = load_case(test::data_path("case14.m"));
    const PowerSystem sys = build_system(raw);
    const SolveResult r = newton_solve(sys, flat_start(sys), NewtonOptions{});
    REQUIRE(r.converged);
    for (std::size_t b = 0; b < sys.n_bus; ++b) {
        CAPTURE(b);
        CHECK(std::abs(r.y[sys.addr.v_of_bus[b]] - raw.buses[b].vm) <= 0.005);
        CHECK(std::abs(r.y[sys.addr.theta_of_bus[b]] * 180.0 / std::numbers::pi - raw.buses[b].va) <= 0.05);
    }
}

TEST_CASE("all workflows converge to the same solution") {
    for (const auto& name : test::bundled_cases()) {
        CAPTURE(name);
        const PowerSystem sys = test::load_system(name);
        const SolveResult ref = newton_solve(sys, flat_start(sys), NewtonOptions{});
        ThreadPool pool(4);
        for (int id = 2; id <= kWorkflowCount; ++id) {
            NewtonOptions opt;
            opt.workflow = make_workflow(id, 4);
            const SolveResult r = newton_solve(sys, flat_start(sys), opt, pool);
            REQUIRE(r.converged);
            CHECK(r.iterations == ref.iterations);
            double worst = 0.0;
            for (std::size_t i = 0; i < r.y.size(); ++i) worst = std::max(worst, std::abs(r.y[i] - ref.y[i]));
            CHECK(worst <= 1e-8);
        }
    }
}

TEST_CASE("convergence is quadratic near the solution") {
    for (const auto& name : test::bundled_cases()) {
        CAPTURE(name);
        const PowerSystem sys = test::load_system(name);
        NewtonOptions opt;
        opt.tol = 1e-13;
        const SolveResult r = newton_solve(sys, flat_start(sys), opt);
        const auto& h = r.mismatch_history;
        for (std::size_t k = 1; k < h.size(); ++k) {
            if (h[k - 1] > 1e-2 || h[k] < 1e-12) continue;
            CAPTURE(k);
            CHECK(h[k] <= 10.0 * h[k - 1] * h[k - 1]);
        }
    }
}

TEST_CASE("a converged state needs at most one more iteration") {
    const PowerSystem sys = test::load_system("case9.m");
    const SolveResult first = newton_solve(sys, flat_start(sys), NewtonOptions{});
    REQUIRE(first.converged);
    const SolveResult again = newton_solve(sys, first.y, NewtonOptions{});
    CHECK(again.converged);
    CHECK(again.iterations <= 1);
}

TEST_CASE("iteration cap and bad options") {
    const PowerSystem sys = test::load_system("case14.m");
    NewtonOptions opt;
    opt.max_iter = 1;
    const SolveResult r = newton_solve(sys, flat_start(sys), opt);
    CHECK_FALSE(r.converged);
    CHECK(r.status == SolveStatus::MaxIterations);
    CHECK(r.iterations == 1);
    CHECK(to_string(r.status) == "max-iterations");

    opt.max_iter = 0;
    CHECK_THROWS_AS(newton_solve(sys, flat_start(sys), opt), std::invalid_argument);
    opt = NewtonOptions{};
    opt.tol = -1.0;
    CHECK_THROWS_AS(newton_solve(sys, flat_start(sys), opt), std::invalid_argument);
    std::vector<double> y = flat_start(sys);
    y[3] = std::nan("");
    CHECK_THROWS_AS(newton_solve(sys, y, NewtonOptions{}), std::invalid_argument);
    y.pop_back();
    CHECK_THROWS_AS(newton_solve(sys, y, NewtonOptions{}), std::invalid_argument);
}

TEST_CASE("an infeasible load is reported, not thrown as success") {
    RawCase c = load_case(test::data_path("case2.m"));
    c.buses[1].pd = 5000.0;
    const PowerSystem sys = build_system(c);
    SolveResult r;
    try {
        r = newton_solve(sys, flat_start(sys), NewtonOptions{});
        CHECK_FALSE(r.converged);
        CHECK(r.status != SolveStatus::Converged);
    } catch (const SingularMatrixError&) {
        CHECK(true);
    }
}
