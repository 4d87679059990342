#include "pflow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "pflow/jacobian.hpp"
#include "pflow/newton.hpp"
#include "pflow/residual.hpp"

namespace pflow {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

// Runs fn `runs` times and summarizes all but the first.
template <class F>
TimingStat time_runs(std::size_t runs, F&& fn) {
    std::vector<double> samples;
    samples.reserve(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        const auto t0 = Clock::now();
        fn();
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (r > 0) samples.push_back(ms);
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t m = samples.size();
    TimingStat s;
    s.min = samples.front();
    s.median = m % 2 ? samples[m / 2] : 0.5 * (samples[m / 2 - 1] + samples[m / 2]);
    return s;
}

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

json stat_json(const TimingStat& s) { return {{"median", s.median}, {"min", s.min}}; }

TimingStat stat_from(const json& j) { return {j.at("median").get<double>(), j.at("min").get<double>()}; }

json models_json(const std::array<double, kModelCount>& us) {
    json o = json::object();
    for (ModelId m : kModelOrder) o[std::string(model_name(m))] = us[static_cast<std::size_t>(m)];
    return o;
}

std::array<double, kModelCount> models_from(const json& j) {
    std::array<double, kModelCount> us{};
    for (ModelId m : kModelOrder) us[static_cast<std::size_t>(m)] = j.at(std::string(model_name(m))).get<double>();
    return us;
}

}  // namespace

BenchEnvironment detect_environment(std::size_t threads) {
    BenchEnvironment env;
    env.threads = threads;
    env.hardware_threads = std::max(1u, std::thread::hardware_concurrency());
#if defined(__AVX512F__)
    env.simd_width_bits = 512;
    env.simd_isa = "avx512";
#elif defined(__AVX__)
    env.simd_width_bits = 256;
#if defined(__FMA__)
    env.simd_isa = "avx2-fma";
#else
    env.simd_isa = "avx";
#endif
#elif defined(__SSE2__)
    env.simd_width_bits = 128;
    env.simd_isa = "sse2";
#elif defined(__ARM_NEON)
    env.simd_width_bits = 128;
    env.simd_isa = "neon";
#else
    env.simd_width_bits = 64;
    env.simd_isa = "scalar";
#endif
    return env;
}

BenchReport run_bench(const PowerSystem& sys, std::string case_name, const BenchOptions& opts) {
    if (opts.repeats < 2) throw std::invalid_argument("bench: repeat count must be >= 2 (first run is warm-up)");
    if (opts.threads == 0) throw std::invalid_argument("bench: thread count must be >= 1");
    std::vector<WorkflowConfig> cfgs;
    for (int id : opts.workflows) cfgs.push_back(make_workflow(id, opts.threads));

    BenchReport rep;
    rep.case_name = std::move(case_name);
    rep.repeats = opts.repeats;
    rep.env = detect_environment(opts.threads);

    ThreadPool pool(opts.threads);
    NewtonOptions nopt;
    nopt.tol = opts.tol;
    nopt.max_iter = opts.max_iter;
    nopt.solver = opts.solver;

    const std::vector<double> y0 = flat_start(sys);
    std::vector<double> y_fixed = y0;
    {
        nopt.workflow = make_workflow(1);
        const SolveResult ref = newton_solve(sys, y0, nopt, pool);
        if (ref.converged) y_fixed = ref.y;
    }

    std::vector<double> g(sys.n_eq());
    for (const WorkflowConfig& cfg : cfgs) {
        BenchRecord rec;
        rec.workflow = cfg.id;

        ResidualWorkspace rws(sys, cfg.intra.n_threads);
        rec.residual_ms = time_runs(opts.repeats, [&] { evaluate_residual(sys, y_fixed, cfg, rws, g, pool); });

        JacobianWorkspace jws = symbolic_pattern(sys);
        rec.jacobian_ms = time_runs(opts.repeats, [&] { evaluate_jacobian(sys, y_fixed, cfg, jws, pool); });

        nopt.workflow = cfg;
        SolveResult last;
        rec.solve_ms = time_runs(opts.repeats, [&] { last = newton_solve(sys, y0, nopt, pool); });
        rec.iterations = last.iterations;
        rec.converged = last.converged;

        rec.residual_model_us =
            per_model_timing(sys, y_fixed, cfg, opts.repeats - 1, pool, Phase::Residual).median_us;
        rec.jacobian_model_us =
            per_model_timing(sys, y_fixed, cfg, opts.repeats - 1, pool, Phase::Jacobian).median_us;
        rep.records.push_back(rec);
    }
    return rep;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string to_csv(const BenchReport& r) {
    std::ostringstream os;
    os.precision(9);
    os << "workflow,phase,time_ms,model,threads\r\n";
    auto row = [&](int wf, std::string_view phase, double ms, std::string_view model) {
        os << wf << ',' << csv_field(phase) << ',' << ms << ',' << csv_field(model) << ',' << r.env.threads << "\r\n";
    };
    for (const BenchRecord& rec : r.records) {
        row(rec.workflow, "residual", rec.residual_ms.median, "all");
        row(rec.workflow, "jacobian", rec.jacobian_ms.median, "all");
        row(rec.workflow, "solve", rec.solve_ms.median, "all");
        for (ModelId m : kModelOrder) {
            row(rec.workflow, "residual", rec.residual_model_us[static_cast<std::size_t>(m)] / 1000.0, model_name(m));
        }
        for (ModelId m : kModelOrder) {
            row(rec.workflow, "jacobian", rec.jacobian_model_us[static_cast<std::size_t>(m)] / 1000.0, model_name(m));
        }
    }
    return os.str();
}

std::string to_json(const BenchReport& r) {
    json j;
    j["case"] = r.case_name;
    j["repeats"] = r.repeats;
    j["environment"] = {{"threads", r.env.threads},
                        {"hardware_threads", r.env.hardware_threads},
                        {"simd_width_bits", r.env.simd_width_bits},
                        {"simd_isa", r.env.simd_isa}};
    j["records"] = json::array();
    for (const BenchRecord& rec : r.records) {
        j["records"].push_back({{"workflow", rec.workflow},
                                {"residual_ms", stat_json(rec.residual_ms)},
                                {"jacobian_ms", stat_json(rec.jacobian_ms)},
                                {"solve_ms", stat_json(rec.solve_ms)},
                                {"iterations", rec.iterations},
                                {"converged", rec.converged},
                                {"residual_model_us", models_json(rec.residual_model_us)},
                                {"jacobian_model_us", models_json(rec.jacobian_model_us)}});
    }
    return j.dump(2);
}

BenchReport bench_report_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        BenchReport r;
        r.case_name = j.at("case").get<std::string>();
        r.repeats = j.at("repeats").get<std::size_t>();
        const json& e = j.at("environment");
        r.env.threads = e.at("threads").get<std::size_t>();
        r.env.hardware_threads = e.at("hardware_threads").get<std::size_t>();
        r.env.simd_width_bits = e.at("simd_width_bits").get<int>();
        r.env.simd_isa = e.at("simd_isa").get<std::string>();
        for (const json& x : j.at("records")) {
            BenchRecord rec;
            rec.workflow = x.at("workflow").get<int>();
            rec.residual_ms = stat_from(x.at("residual_ms"));
            rec.jacobian_ms = stat_from(x.at("jacobian_ms"));
            rec.solve_ms = stat_from(x.at("solve_ms"));
            rec.iterations = x.at("iterations").get<int>();
            rec.converged = x.at("converged").get<bool>();
            rec.residual_model_us = models_from(x.at("residual_model_us"));
            rec.jacobian_model_us = models_from(x.at("jacobian_model_us"));
            r.records.push_back(rec);
        }
        return r;
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("bench report: ") + ex.what());
    }
}

std::string to_table(const BenchReport& r) {
    std::ostringstream os;
    os << "case " << r.case_name << ", " << r.env.threads << " thread(s), " << r.env.simd_isa << " ("
       << r.env.simd_width_bits << "-bit), median of " << (r.repeats - 1) << " run(s)\n\n";

    auto find = [&](int id) -> const BenchRecord* {
        for (const auto& rec : r.records) {
            if (rec.workflow == id) return &rec;
        }
        return nullptr;
    };
    auto cell = [&](int id) {
        const BenchRecord* rec = find(id);
        std::string s = "(" + std::to_string(id) + ") ";
        s += rec ? fmt(rec->residual_ms.median) + " / " + fmt(rec->jacobian_ms.median) : "-";
        return s;
    };
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };

    os << "residual / jacobian time (ms)\n";
    os << pad("", 18) << pad("serial intra", 26) << pad("threaded intra", 26) << "SIMD intra\n";
    os << pad("serial inter", 18) << pad(cell(1), 26) << pad(cell(3), 26) << cell(5) << "\n";
    os << pad("threaded inter", 18) << pad(cell(2), 26) << pad(cell(4), 26) << cell(6) << "\n\n";

    const BenchRecord* base = find(1);
    os << pad("workflow", 10) << pad("solve ms", 12) << pad("iters", 7) << pad("residual x", 12) << "jacobian x\n";
    for (const auto& rec : r.records) {
        os << pad(std::to_string(rec.workflow), 10) << pad(fmt(rec.solve_ms.median), 12)
           << pad(std::to_string(rec.iterations) + (rec.converged ? "" : "!"), 7);
        if (base && rec.residual_ms.median > 0 && rec.jacobian_ms.median > 0) {
            os << pad(fmt(base->residual_ms.median / rec.residual_ms.median, 2), 12)
               << fmt(base->jacobian_ms.median / rec.jacobian_ms.median, 2);
        }
        os << "\n";
    }

    os << "\nresidual time by model (us)\n" << pad("workflow", 10);
    for (ModelId m : kModelOrder) os << pad(std::string(model_name(m)), 12);
    os << "\n";
    for (const auto& rec : r.records) {
        os << pad(std::to_string(rec.workflow), 10);
        for (ModelId m : kModelOrder) os << pad(fmt(rec.residual_model_us[static_cast<std::size_t>(m)], 2), 12);
        os << "\n";
    }
    return os.str();
}

}  // namespace pflow
