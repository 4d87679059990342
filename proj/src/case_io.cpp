#include "pflow/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pflow {

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

struct Matrix {
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
    std::size_t line = 0;
};

bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.';
}

bool is_token_end(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ',' || c == ';' || c == ']' || c == '%';
}

class Scanner {
  public:
    explicit Scanner(std::string_view text) : s_(text) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    std::size_t line() const { return line_; }

    void advance() {
        if (s_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip_blanks() {
        while (!done() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
    }

    // Leaves the scanner on the '\n' (or at end of input).
    void skip_to_eol() {
        bool in_string = false;
        while (!done() && peek() != '\n') {
            if (peek() == '\'') in_string = !in_string;
            if (peek() == '%' && !in_string) {
                while (!done() && peek() != '\n') advance();
                return;
            }
            advance();
        }
    }

    std::string_view identifier() {
        std::size_t start = pos_;
        while (!done() && is_ident_char(peek())) advance();
        return s_.substr(start, pos_ - start);
    }

    std::string_view token() {
        std::size_t start = pos_;
        while (!done() && !is_token_end(peek())) advance();
        return s_.substr(start, pos_ - start);
    }

    bool starts_with(std::string_view prefix) const { return s_.substr(pos_).starts_with(prefix); }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::optional<double> to_number(std::string_view tok) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    if (tok.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
    return v;
}

Matrix read_matrix(Scanner& sc, std::string_view name) {
    Matrix m;
    m.line = sc.line();
    std::vector<double> row;
    std::size_t row_line = sc.line();
    auto end_row = [&] {
        if (row.empty()) return;
        if (!m.rows.empty() && row.size() != m.rows.front().size()) {
            throw ParseError("malformed matrix '" + std::string(name) + "': row has " +
                                 std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(m.rows.front().size()),
                             row_line);
        }
        m.rows.push_back(std::move(row));
        m.row_lines.push_back(row_line);
        row.clear();
    };
    while (true) {
        if (sc.done()) throw ParseError("unterminated matrix '" + std::string(name) + "'", m.line);
        char c = sc.peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
            sc.advance();
        } else if (c == '\n' || c == ';') {
            end_row();
            sc.advance();
        } else if (c == '%') {
            sc.skip_to_eol();
        } else if (c == ']') {
            end_row();
            sc.advance();
            return m;
        } else if (sc.starts_with("...")) {
            sc.skip_to_eol();
            if (!sc.done()) sc.advance();
        } else {
            if (row.empty()) row_line = sc.line();
            std::size_t tok_line = sc.line();
            std::string_view tok = sc.token();
            auto v = to_number(tok);
            if (!v) {
                throw ParseError("non-numeric token '" + std::string(tok) + "' in matrix '" +
                                     std::string(name) + "'",
                                 tok_line);
            }
            row.push_back(*v);
        }
    }
}

void skip_cell_array(Scanner& sc) {
    std::size_t start = sc.line();
    int depth = 0;
    bool in_string = false;
    while (!sc.done()) {
        char c = sc.peek();
        if (c == '\'') in_string = !in_string;
        if (!in_string) {
            if (c == '%') {
                sc.skip_to_eol();
                continue;
            }
            if (c == '{') ++depth;
            if (c == '}' && --depth == 0) {
                sc.advance();
                return;
            }
        }
        sc.advance();
    }
    throw ParseError("unterminated cell array", start);
}

int as_int(double v, std::string_view what, std::size_t line) {
    if (!std::isfinite(v) || v != std::floor(v)) {
        throw ParseError("expected an integer for " + std::string(what), line);
    }
    return static_cast<int>(v);
}

void require_columns(const Matrix& m, std::size_t cols, std::string_view name) {
    if (!m.rows.empty() && m.rows.front().size() < cols) {
        throw ParseError("matrix '" + std::string(name) + "' needs at least " + std::to_string(cols) +
                             " columns, found " + std::to_string(m.rows.front().size()),
                         m.line);
    }
}

}  // namespace

RawCase parse_case(std::string_view text) {
    Scanner sc(text);
    std::optional<double> base_mva;
    std::optional<Matrix> bus, gen, branch;

    while (!sc.done()) {
        char c = sc.peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';') {
            sc.advance();
            continue;
        }
        if (c == '%' || !is_ident_char(c)) {
            sc.skip_to_eol();
            continue;
        }
        std::size_t stmt_line = sc.line();
        std::string_view ident = sc.identifier();
        if (ident == "function") {
            sc.skip_to_eol();
            continue;
        }
        sc.skip_blanks();
        if (sc.peek() != '=') {
            sc.skip_to_eol();
            continue;
        }
        sc.advance();
        sc.skip_blanks();

        std::string_view field = ident;
        if (auto dot = field.rfind('.'); dot != std::string_view::npos) field.remove_prefix(dot + 1);

        if (sc.peek() == '[') {
            sc.advance();
            Matrix m = read_matrix(sc, field);
            std::optional<Matrix>* slot = nullptr;
            if (field == "bus") slot = &bus;
            else if (field == "gen") slot = &gen;
            else if (field == "branch") slot = &branch;
            if (slot) {
                if (*slot) throw ParseError("duplicate matrix '" + std::string(field) + "'", stmt_line);
                *slot = std::move(m);
            }
        } else if (sc.peek() == '{') {
            skip_cell_array(sc);
        } else if (field == "baseMVA") {
            std::string_view tok = sc.token();
            auto v = to_number(tok);
            if (!v) throw ParseError("non-numeric baseMVA '" + std::string(tok) + "'", stmt_line);
            base_mva = *v;
            sc.skip_to_eol();
        } else {
            sc.skip_to_eol();
        }
    }

    if (!base_mva) throw ParseError("missing required assignment 'baseMVA'", 0);
    if (!bus) throw ParseError("missing required matrix 'bus'", 0);
    if (!gen) throw ParseError("missing required matrix 'gen'", 0);
    if (!branch) throw ParseError("missing required matrix 'branch'", 0);
    require_columns(*bus, 10, "bus");
    require_columns(*gen, 8, "gen");
    require_columns(*branch, 11, "branch");

    RawCase raw;
    raw.base_mva = *base_mva;

    raw.buses.reserve(bus->rows.size());
    std::unordered_set<int> seen;
    for (std::size_t i = 0; i < bus->rows.size(); ++i) {
        const auto& r = bus->rows[i];
        const std::size_t ln = bus->row_lines[i];
        BusRow b;
        b.id = as_int(r[0], "bus id", ln);
        b.type = as_int(r[1], "bus type", ln);
        b.pd = r[2];
        b.qd = r[3];
        b.gs = r[4];
        b.bs = r[5];
        b.vm = r[7];
        b.va = r[8];
        b.base_kv = r[9];
        if (!seen.insert(b.id).second) throw ParseError("duplicate bus id " + std::to_string(b.id), ln);
        raw.buses.push_back(b);
    }

    raw.gens.reserve(gen->rows.size());
    for (std::size_t i = 0; i < gen->rows.size(); ++i) {
        const auto& r = gen->rows[i];
        const std::size_t ln = gen->row_lines[i];
        GenRow g;
        g.bus = as_int(r[0], "generator bus", ln);
        g.pg = r[1];
        g.qg = r[2];
        g.qmax = r[3];
        g.qmin = r[4];
        g.vg = r[5];
        g.status = as_int(r[7], "generator status", ln);
        raw.gens.push_back(g);
    }

    raw.branches.reserve(branch->rows.size());
    for (std::size_t i = 0; i < branch->rows.size(); ++i) {
        const auto& r = branch->rows[i];
        const std::size_t ln = branch->row_lines[i];
        BranchRow br;
        br.fbus = as_int(r[0], "branch from-bus", ln);
        br.tbus = as_int(r[1], "branch to-bus", ln);
        br.r = r[2];
        br.x = r[3];
        br.b = r[4];
        br.ratio = r[8] == 0.0 ? 1.0 : r[8];
        br.angle = r[9];
        br.status = as_int(r[10], "branch status", ln);
        raw.branches.push_back(br);
    }
    return raw;
}

RawCase load_case(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open case file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_case(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ":" + std::to_string(e.line()) + ": " + e.what(), e.line());
    }
}

std::string_view to_string(ViolationCode code) {
    switch (code) {
        case ViolationCode::BadBaseMva: return "BAD_BASE_MVA";
        case ViolationCode::BadBusType: return "BAD_BUS_TYPE";
        case ViolationCode::UnknownBus: return "UNKNOWN_BUS";
        case ViolationCode::NoSlack: return "NO_SLACK";
        case ViolationCode::MultipleSlack: return "MULTIPLE_SLACK";
        case ViolationCode::SlackWithoutGen: return "SLACK_WITHOUT_GEN";
        case ViolationCode::ZeroImpedance: return "ZERO_IMPEDANCE";
        case ViolationCode::BadVoltage: return "BAD_VOLTAGE";
    }
    return "UNKNOWN";
}

std::vector<Violation> validate_case(const RawCase& raw) {
    std::vector<Violation> out;
    auto add = [&](ViolationCode c, RowKind t, std::size_t row, std::string msg) {
        out.push_back({c, t, row, std::move(msg)});
    };

    if (!(raw.base_mva > 0.0)) add(ViolationCode::BadBaseMva, RowKind::Case, 0, "baseMVA must be positive");

    std::unordered_map<int, std::size_t> bus_row;
    std::size_t n_slack = 0;
    for (std::size_t i = 0; i < raw.buses.size(); ++i) {
        const auto& b = raw.buses[i];
        bus_row.emplace(b.id, i);
        if (b.type < 1 || b.type > 4) {
            add(ViolationCode::BadBusType, RowKind::Bus, i, "bus " + std::to_string(b.id) + " has type " +
                                                                std::to_string(b.type));
        }
        if (b.type == static_cast<int>(BusType::Slack)) {
            if (++n_slack > 1) {
                add(ViolationCode::MultipleSlack, RowKind::Bus, i,
                    "bus " + std::to_string(b.id) + " is an additional slack bus");
            }
        }
    }
    if (n_slack == 0) add(ViolationCode::NoSlack, RowKind::Case, 0, "no bus has type 3");

    auto in_service_bus = [&](int id) {
        auto it = bus_row.find(id);
        return it != bus_row.end() && raw.buses[it->second].type != static_cast<int>(BusType::Isolated);
    };

    std::unordered_set<int> buses_with_gen;
    for (std::size_t i = 0; i < raw.gens.size(); ++i) {
        const auto& g = raw.gens[i];
        if (!bus_row.count(g.bus)) {
            add(ViolationCode::UnknownBus, RowKind::Gen, i, "generator on unknown bus " + std::to_string(g.bus));
            continue;
        }
        if (g.status == 0) continue;
        buses_with_gen.insert(g.bus);
        if (!(g.vg > 0.0) || !std::isfinite(g.vg)) {
            add(ViolationCode::BadVoltage, RowKind::Gen, i, "generator voltage setpoint must be positive");
        }
    }
    for (std::size_t i = 0; i < raw.buses.size(); ++i) {
        const auto& b = raw.buses[i];
        if (b.type == static_cast<int>(BusType::Slack) && !buses_with_gen.count(b.id)) {
            add(ViolationCode::SlackWithoutGen, RowKind::Bus, i,
                "slack bus " + std::to_string(b.id) + " has no in-service generator");
        }
    }

    for (std::size_t i = 0; i < raw.branches.size(); ++i) {
        const auto& br = raw.branches[i];
        bool known = true;
        for (int id : {br.fbus, br.tbus}) {
            if (!bus_row.count(id)) {
                add(ViolationCode::UnknownBus, RowKind::Branch, i, "branch on unknown bus " + std::to_string(id));
                known = false;
            }
        }
        if (!known || br.status == 0 || !in_service_bus(br.fbus) || !in_service_bus(br.tbus)) continue;
        if (br.r * br.r + br.x * br.x == 0.0) {
            add(ViolationCode::ZeroImpedance, RowKind::Branch, i,
                "branch " + std::to_string(br.fbus) + "-" + std::to_string(br.tbus) + " has r = x = 0");
        }
    }
    return out;
}

std::string write_case(const RawCase& raw, std::string_view name) {
    std::ostringstream os;
    os.precision(17);
    os << "function mpc = " << name << "\n";
    os << "mpc.version = '2';\n";
    os << "mpc.baseMVA = " << raw.base_mva << ";\n\n";
    os << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
    os << "mpc.bus = [\n";
    for (const auto& b : raw.buses) {
        os << '\t' << b.id << '\t' << b.type << '\t' << b.pd << '\t' << b.qd << '\t' << b.gs << '\t' << b.bs
           << "\t1\t" << b.vm << '\t' << b.va << '\t' << b.base_kv << "\t1\t1.1\t0.9;\n";
    }
    os << "];\n\n";
    os << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
    os << "mpc.gen = [\n";
    for (const auto& g : raw.gens) {
        os << '\t' << g.bus << '\t' << g.pg << '\t' << g.qg << '\t' << g.qmax << '\t' << g.qmin << '\t' << g.vg
           << '\t' << raw.base_mva << '\t' << g.status << "\t0\t0;\n";
    }
    os << "];\n\n";
    os << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n";
    os << "mpc.branch = [\n";
    for (const auto& br : raw.branches) {
        os << '\t' << br.fbus << '\t' << br.tbus << '\t' << br.r << '\t' << br.x << '\t' << br.b << "\t0\t0\t0\t"
           << br.ratio << '\t' << br.angle << '\t' << br.status << "\t-360\t360;\n";
    }
    os << "];\n";
    return os.str();
}

RawCase tile_case(const RawCase& base, std::size_t copies) {
    if (copies == 0) throw std::invalid_argument("tile_case: copies must be >= 1");
    int max_id = 0;
    int slack_id = 0;
    for (const auto& b : base.buses) {
        max_id = std::max(max_id, b.id);
        if (b.type == static_cast<int>(BusType::Slack)) slack_id = b.id;
    }
    if (slack_id == 0) throw std::invalid_argument("tile_case: base case has no slack bus");
    const int stride = max_id;

    RawCase out;
    out.base_mva = base.base_mva;
    out.buses.reserve(base.buses.size() * copies);
    out.gens.reserve(base.gens.size() * copies);
    out.branches.reserve((base.branches.size() + 1) * copies);
    for (std::size_t c = 0; c < copies; ++c) {
        const int off = static_cast<int>(c) * stride;
        for (auto b : base.buses) {
            b.id += off;
            if (c > 0 && b.type == static_cast<int>(BusType::Slack)) b.type = static_cast<int>(BusType::PV);
            out.buses.push_back(b);
        }
        for (auto g : base.gens) {
            g.bus += off;
            out.gens.push_back(g);
        }
        for (auto br : base.branches) {
            br.fbus += off;
            br.tbus += off;
            out.branches.push_back(br);
        }
        if (c > 0) {
            BranchRow tie;
            tie.fbus = slack_id + static_cast<int>((c - 1) / 2) * stride;
            tie.tbus = slack_id + off;
            tie.r = 0.01;
            tie.x = 0.05;
            tie.b = 0.02;
            out.branches.push_back(tie);
        }
    }
    return out;
}

}  // namespace pflow
