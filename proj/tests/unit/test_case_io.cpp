#include <algorithm>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "pflow/case_io.hpp"
#include "support.hpp"

using namespace pflow;

namespace {

const char* kTiny = R"(function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	230	1	1.1	0.9;
	2	1	50	20	0	0	1	1	0	230	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	100	-100	1	100	1	200	0;
];
mpc.branch = [
	1	2	0	0.1	0	0	0	0	0	0	1	-360	360;
];
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

bool has_code(const std::vector<Violation>& v, ViolationCode c) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == c; });
}

}  // namespace

TEST_CASE("case14 row counts") {
    const RawCase c = load_case(test::data_path("case14.m"));
    CHECK(c.buses.size() == 14);
    CHECK(c.gens.size() == 5);
    CHECK(c.branches.size() == 20);
    CHECK(c.base_mva == 100.0);
    CHECK(validate_case(c).empty());
}

TEST_CASE("case9 row counts") {
    const RawCase c = load_case(test::data_path("case9.m"));
    CHECK(c.buses.size() == 9);
    CHECK(c.gens.size() == 3);
    CHECK(c.branches.size() == 9);
}

TEST_CASE("zero tap ratio is stored as one") {
    const RawCase c = parse_case(kTiny);
    REQUIRE(c.branches.size() == 1);
    CHECK(c.branches[0].ratio == 1.0);
    const RawCase s = load_case(test::data_path("case5_shift.m"));
    CHECK(s.branches[4].ratio == 1.05);
    CHECK(s.branches[4].angle == -3.0);
}

TEST_CASE("comments, continuation and comma separators") {
    std::string text = replace(kTiny, "\t2\t1\t50\t20", "\t2, 1, 50 ...\n 20");
    text = replace(text, "mpc.gen = [", "% generators\nmpc.gen = [ % inline comment");
    const RawCase c = parse_case(text);
    CHECK(c.buses[1].pd == 50.0);
    CHECK(c.buses[1].qd == 20.0);
}

TEST_CASE("unknown statements and cell arrays are skipped") {
    const std::string text = std::string(kTiny) + "mpc.bus_name = {\n 'a';\n 'b';\n};\nmpc.gencost = [\n 2 0 0 3 0.1 1 0;\n];\n";
    const RawCase c = parse_case(text);
    CHECK(c.buses.size() == 2);
}

TEST_CASE("ragged matrix is rejected") {
    const std::string text = replace(kTiny, "\t2\t1\t50\t20\t0\t0\t1\t1\t0\t230\t1\t1.1\t0.9;", "\t2\t1\t50\t20\t0\t0\t1\t1\t0\t230;");
    CHECK_THROWS_WITH_AS(parse_case(text), doctest::Contains("malformed matrix"), ParseError);
}

TEST_CASE("non-numeric token reports its line") {
    const std::string text = replace(kTiny, "\t2\t1\t50", "\t2\t1\tfifty");
    try {
        parse_case(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 6);
        CHECK(std::string(e.what()).find("fifty") != std::string::npos);
    }
}

TEST_CASE("missing gen matrix") {
    std::string text = kTiny;
    const auto a = text.find("mpc.gen");
    const auto b = text.find("mpc.branch");
    text.erase(a, b - a);
    CHECK_THROWS_WITH_AS(parse_case(text), "missing required matrix 'gen'", ParseError);
}

TEST_CASE("duplicate bus id reports its line") {
    const std::string text = replace(kTiny, "\t2\t1\t50", "\t1\t1\t50");
    try {
        parse_case(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 6);
        CHECK(std::string(e.what()).find("duplicate bus id 1") != std::string::npos);
    }
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_case(test::data_path("does_not_exist.m")), std::runtime_error);
}

TEST_CASE("load_case prefixes path and line") {
    const auto dir = std::filesystem::temp_directory_path() / "pflow_case_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "bad.m";
    {
        std::ofstream os(path);
        os << replace(kTiny, "\t2\t1\t50", "\t2\t1\tx");
    }
    CHECK_THROWS_WITH_AS(load_case(path), doctest::Contains((path.string() + ":6:").c_str()), ParseError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("validation codes") {
    const RawCase good = parse_case(kTiny);

    RawCase c = good;
    c.base_mva = 0.0;
    CHECK(has_code(validate_case(c), ViolationCode::BadBaseMva));

    c = good;
    c.buses[1].type = 7;
    CHECK(has_code(validate_case(c), ViolationCode::BadBusType));

    c = good;
    c.branches[0].tbus = 99;
    CHECK(has_code(validate_case(c), ViolationCode::UnknownBus));

    c = good;
    c.buses[0].type = 1;
    CHECK(has_code(validate_case(c), ViolationCode::NoSlack));

    c = good;
    c.buses[1].type = 3;
    CHECK(has_code(validate_case(c), ViolationCode::MultipleSlack));

    c = good;
    c.gens[0].status = 0;
    CHECK(has_code(validate_case(c), ViolationCode::SlackWithoutGen));

    c = good;
    c.branches[0].x = 0.0;
    CHECK(has_code(validate_case(c), ViolationCode::ZeroImpedance));

    c = good;
    c.gens[0].vg = -1.0;
    CHECK(has_code(validate_case(c), ViolationCode::BadVoltage));

    CHECK(to_string(ViolationCode::ZeroImpedance) == "ZERO_IMPEDANCE");
    CHECK_THROWS_AS(build_system(c), std::invalid_argument);
}

TEST_CASE("zero impedance on an out-of-service branch is allowed") {
    RawCase c = parse_case(kTiny);
    BranchRow br = c.branches[0];
    br.r = br.x = 0.0;
    br.status = 0;
    c.branches.push_back(br);
    CHECK(validate_case(c).empty());
}

TEST_CASE("write then parse reproduces random cases") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-500.0, 500.0);
    std::uniform_int_distribution<int> pick(1, 3);
    for (int trial = 0; trial < 50; ++trial) {
        RawCase c;
        c.base_mva = 10.0 + std::abs(u(rng));
        const int n = 2 + trial % 9;
        for (int i = 0; i < n; ++i) {
            BusRow b;
            b.id = 3 * i + 1;
            b.type = i == 0 ? 3 : pick(rng) == 1 ? 2 : 1;
            b.pd = u(rng);
            b.qd = u(rng);
            b.gs = u(rng) * 1e-3;
            b.bs = u(rng) * 1e-3;
            b.vm = 1.0 + u(rng) * 1e-4;
            b.va = u(rng) / 10.0;
            b.base_kv = 100.0;
            c.buses.push_back(b);
            if (b.type != 1) c.gens.push_back({b.id, u(rng), u(rng), 100.0, -100.0, 1.0 + u(rng) * 1e-4, 1});
        }
        for (int i = 1; i < n; ++i) {
            BranchRow br;
            br.fbus = c.buses[static_cast<std::size_t>(i - 1)].id;
            br.tbus = c.buses[static_cast<std::size_t>(i)].id;
            br.r = std::abs(u(rng)) * 1e-4;
            br.x = 0.01 + std::abs(u(rng)) * 1e-3;
            br.b = std::abs(u(rng)) * 1e-4;
            br.ratio = 1.0 + u(rng) * 1e-4;
            br.angle = u(rng) / 100.0;
            br.status = pick(rng) == 1 ? 0 : 1;
            c.branches.push_back(br);
        }

        const RawCase back = parse_case(write_case(c));
        REQUIRE(back.buses.size() == c.buses.size());
        REQUIRE(back.gens.size() == c.gens.size());
        REQUIRE(back.branches.size() == c.branches.size());
        CHECK(back.base_mva == c.base_mva);
        for (std::size_t i = 0; i < c.buses.size(); ++i) {
            const auto& a = c.buses[i];
            const auto& b = back.buses[i];
            CHECK((a.id == b.id && a.type == b.type && a.pd == b.pd && a.qd == b.qd && a.gs == b.gs &&
                   a.bs == b.bs && a.vm == b.vm && a.va == b.va));
        }
        for (std::size_t i = 0; i < c.gens.size(); ++i) {
            const auto& a = c.gens[i];
            const auto& b = back.gens[i];
            CHECK((a.bus == b.bus && a.pg == b.pg && a.qg == b.qg && a.vg == b.vg && a.status == b.status));
        }
        for (std::size_t i = 0; i < c.branches.size(); ++i) {
            const auto& a = c.branches[i];
            const auto& b = back.branches[i];
            CHECK((a.fbus == b.fbus && a.tbus == b.tbus && a.r == b.r && a.x == b.x && a.b == b.b &&
                   a.ratio == b.ratio && a.angle == b.angle && a.status == b.status));
        }
    }
}

TEST_CASE("tile_case structure") {
    const RawCase base = load_case(test::data_path("case14.m"));
    const RawCase t = tile_case(base, 5);
    CHECK(t.buses.size() == 70);
    CHECK(t.gens.size() == 25);
    CHECK(t.branches.size() == 5 * 20 + 4);
    CHECK(std::count_if(t.buses.begin(), t.buses.end(), [](const BusRow& b) { return b.type == 3; }) == 1);
    CHECK(validate_case(t).empty());
    CHECK_THROWS_AS(tile_case(base, 0), std::invalid_argument);
}
