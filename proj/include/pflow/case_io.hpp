#pragma once

// MATPOWER case files: parsing, validation and a debug writer.
//
// Only the numeric-matrix subset of the format is accepted. Values in a
// RawCase are taken verbatim from the file (MW, MVAr, degrees); the one
// normalization applied is a zero tap ratio becoming 1.0.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pflow {

enum class BusType : int { PQ = 1, PV = 2, Slack = 3, Isolated = 4 };

struct BusRow {
    int id = 0;
    int type = 1;
    double pd = 0.0;      // MW
    double qd = 0.0;      // MVAr
    double gs = 0.0;      // MW at 1 pu
    double bs = 0.0;      // MVAr at 1 pu
    double vm = 1.0;      // pu
    double va = 0.0;      // degrees
    double base_kv = 0.0;
};

struct GenRow {
    int bus = 0;
    double pg = 0.0;
    double qg = 0.0;
    double qmax = 0.0;
    double qmin = 0.0;
    double vg = 1.0;
    int status = 1;
};

struct BranchRow {
    int fbus = 0;
    int tbus = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;       // total line charging, pu
    double ratio = 1.0;   // off-nominal tap; 0 in the file is stored as 1
    double angle = 0.0;   // phase shift, degrees
    int status = 1;
};

struct RawCase {
    double base_mva = 100.0;
    std::vector<BusRow> buses;
    std::vector<GenRow> gens;
    std::vector<BranchRow> branches;
};

/// Thrown for malformed case text. `line()` is 1-based, 0 when the error is
/// not tied to a line (e.g. a missing matrix).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line);
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

RawCase parse_case(std::string_view text);
RawCase load_case(const std::filesystem::path& path);

enum class ViolationCode {
    BadBaseMva,
    BadBusType,
    UnknownBus,
    NoSlack,
    MultipleSlack,
    SlackWithoutGen,
    ZeroImpedance,
    BadVoltage,
};

/// Which table a violation points into.
enum class RowKind { Case, Bus, Gen, Branch };

struct Violation {
    ViolationCode code;
    RowKind table;
    std::size_t row;   // index into the table, 0 for RowKind::Case
    std::string message;
};

std::string_view to_string(ViolationCode code);

/// Every structural problem that would make build_system reject the case.
std::vector<Violation> validate_case(const RawCase& raw);

/// Writes a case that parse_case reads back with identical numeric content.
/// Columns not carried by RawCase are filled with neutral defaults.
std::string write_case(const RawCase& raw, std::string_view name = "pflow_case");

/// Joins `copies` replicas of `base` into one case. Replica 0 keeps the
/// original slack; in every other replica the slack bus becomes a PV bus
/// with the same generator dispatch. Replica c > 0 is tied to replica
/// (c - 1) / 2 by a line between their former slack buses, so tie paths
/// stay logarithmic in the replica count. Bus ids are offset by a
/// multiple of the largest id in `base`.
RawCase tile_case(const RawCase& base, std::size_t copies);

}  // namespace pflow
