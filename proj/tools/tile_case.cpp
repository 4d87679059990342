// tile_case <base.m> <copies> <out.m>
//
// Writes `copies` replicas of a case chained by tie lines, for benchmarks.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pflow/case_io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Replicate a MATPOWER case into a larger connected case"};
    std::string in, out;
    std::size_t copies = 1;
    app.add_option("base", in, "Base case file")->required()->check(CLI::ExistingFile);
    app.add_option("copies", copies, "Number of replicas")->required()->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    app.add_option("out", out, "Output case file")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        const pflow::RawCase tiled = pflow::tile_case(pflow::load_case(in), copies);
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot write '" + out + "'");
        os << pflow::write_case(tiled, "tiled");
        std::cout << out << ": " << tiled.buses.size() << " buses, " << tiled.branches.size() << " branches\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
