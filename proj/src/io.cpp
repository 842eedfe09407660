#include "jdlv/io.hpp"

#include "jdlv/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef JDLV_VERSION
#define JDLV_VERSION "0.1.0"
#endif

namespace jdlv {

namespace fs = std::filesystem;

std::string version_string() { return JDLV_VERSION; }

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

void write_preamble(std::ostream& out, const nlohmann::json& config) {
    out << "# version: " << version_string() << "\n";
    out << "# config: " << config.dump() << "\n";
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    if (!line.empty() && line.back() == sep) parts.emplace_back();
    return parts;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const fs::path& path, int line_no) {
    const std::string t = trim(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used == t.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + t + "'");
}

/// Data lines of a CSV with their 1-based line numbers; comment and blank lines dropped.
std::vector<std::pair<int, std::string>> data_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::vector<std::pair<int, std::string>> lines;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        lines.emplace_back(no, line);
    }
    return lines;
}

}  // namespace

std::string grid_line(const Grid& grid) {
    return "grid,tau_max=" + format_number(grid.tau_max()) + ",dtau=" + format_number(grid.dtau()) +
           ",y_min=" + format_number(grid.y_min()) + ",y_max=" + format_number(grid.y_max()) +
           ",dy=" + format_number(grid.dy());
}

Grid parse_grid_line(const std::string& line) {
    const auto parts = split(line);
    if (parts.empty() || trim(parts[0]) != "grid") throw ConfigError("expected a grid line, got '" + line + "'");
    std::map<std::string, double> kv;
    for (std::size_t k = 1; k < parts.size(); ++k) {
        const auto eq = parts[k].find('=');
        if (eq == std::string::npos) throw ConfigError("malformed grid line '" + line + "'");
        kv[trim(parts[k].substr(0, eq))] = std::stod(parts[k].substr(eq + 1));
    }
    for (const char* key : {"tau_max", "dtau", "y_min", "y_max", "dy"}) {
        if (!kv.count(key)) throw ConfigError(std::string("grid line lacks ") + key);
    }
    return Grid(kv["tau_max"], kv["dtau"], kv["y_min"], kv["y_max"], kv["dy"]);
}

nlohmann::json grid_to_json(const Grid& grid) {
    return {{"tau_max", grid.tau_max()}, {"dtau", grid.dtau()}, {"y_min", grid.y_min()},
            {"y_max", grid.y_max()},     {"dy", grid.dy()}};
}

Grid grid_from_json(const nlohmann::json& j) {
    for (const auto& [key, _] : j.items()) {
        if (key != "tau_max" && key != "dtau" && key != "y_min" && key != "y_max" && key != "dy")
            throw ConfigError("unknown grid key '" + key + "'");
    }
    return Grid(j.value("tau_max", 1.0), j.value("dtau", 0.005), j.value("y_min", -5.0), j.value("y_max", 5.0),
                j.value("dy", 0.025));
}

void write_quotes(const fs::path& path, const QuoteSet& quotes, const nlohmann::json& config) {
    std::ofstream out = open_out(path);
    write_preamble(out, config);
    out << "# provenance: " << to_string(quotes.provenance) << "\n";
    if (quotes.noise) out << "# noise: " << format_number(*quotes.noise) << "\n";
    out << "# seed: " << quotes.seed << "\n";
    bool all_iv = !quotes.quotes.empty();
    bool any_weight = false;
    for (const Quote& q : quotes.quotes) {
        all_iv = all_iv && q.implied_vol.has_value();
        any_weight = any_weight || q.weight != 1.0;
    }
    out << "tau,y,price" << (all_iv ? ",implied_vol" : "") << (any_weight ? ",weight" : "") << "\n";
    for (const Quote& q : quotes.quotes) {
        out << format_number(q.tau) << "," << format_number(q.y) << "," << format_number(q.price);
        if (all_iv) out << "," << format_number(*q.implied_vol);
        if (any_weight) out << "," << format_number(q.weight);
        out << "\n";
    }
}

QuoteSet read_quotes(const fs::path& path) {
    QuoteSet qs;
    {
        std::ifstream in(path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("# provenance: ", 0) == 0) qs.provenance = provenance_from_string(trim(line.substr(14)));
            else if (line.rfind("# noise: ", 0) == 0) qs.noise = std::stod(line.substr(9));
            else if (line.rfind("# seed: ", 0) == 0) qs.seed = std::stoull(line.substr(8));
        }
    }
    const auto lines = data_lines(path);
    if (lines.empty()) throw ConfigError(path.string() + ": missing header");
    const auto header = split(lines[0].second);
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) {
        const std::string name = trim(header[k]);
        if (name != "tau" && name != "y" && name != "price" && name != "implied_vol" && name != "weight")
            throw ConfigError(path.string() + ": unknown column '" + name + "'");
        col[name] = k;
    }
    for (const char* need : {"tau", "y", "price"}) {
        if (!col.count(need)) throw ConfigError(path.string() + ": header lacks column " + need);
    }
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [no, text] = lines[r];
        const auto f = split(text);
        if (f.size() != header.size())
            throw ConfigError(path.string() + ":" + std::to_string(no) + ": expected " +
                              std::to_string(header.size()) + " fields");
        Quote q;
        q.tau = parse_number(f[col["tau"]], path, no);
        q.y = parse_number(f[col["y"]], path, no);
        q.price = parse_number(f[col["price"]], path, no);
        if (col.count("implied_vol") && !trim(f[col["implied_vol"]]).empty())
            q.implied_vol = parse_number(f[col["implied_vol"]], path, no);
        if (col.count("weight")) q.weight = parse_number(f[col["weight"]], path, no);
        qs.quotes.push_back(q);
    }
    return qs;
}

namespace {

void write_table(std::ostream& out, const std::vector<double>& taus, const std::vector<double>& ys,
                 const std::vector<double>& values) {
    out << "tau\\y";
    for (double y : ys) out << "," << format_number(y);
    out << "\n";
    for (std::size_t r = 0; r < taus.size(); ++r) {
        out << format_number(taus[r]);
        for (std::size_t c = 0; c < ys.size(); ++c) out << "," << format_number(values[r * ys.size() + c]);
        out << "\n";
    }
}

struct Table {
    std::optional<Grid> grid;
    std::vector<double> taus;
    std::vector<double> ys;
    std::vector<double> values;
};

Table read_table(const fs::path& path) {
    const auto lines = data_lines(path);
    Table t;
    std::size_t k = 0;
    if (k < lines.size() && lines[k].second.rfind("grid", 0) == 0) t.grid = parse_grid_line(lines[k++].second);
    if (k >= lines.size()) throw ConfigError(path.string() + ": missing column header");
    const auto head = split(lines[k].second);
    for (std::size_t c = 1; c < head.size(); ++c) t.ys.push_back(parse_number(head[c], path, lines[k].first));
    for (++k; k < lines.size(); ++k) {
        const auto& [no, text] = lines[k];
        const auto f = split(text);
        if (f.size() != t.ys.size() + 1)
            throw ConfigError(path.string() + ":" + std::to_string(no) + ": row width does not match the header");
        t.taus.push_back(parse_number(f[0], path, no));
        for (std::size_t c = 1; c < f.size(); ++c) t.values.push_back(parse_number(f[c], path, no));
    }
    return t;
}

}  // namespace

void write_surface(const fs::path& path, const Grid& grid, const Surface& s, const nlohmann::json& config) {
    if (s.rows() != grid.levels() || s.cols() != grid.nodes()) throw ConfigError("surface does not match the grid");
    std::ofstream out = open_out(path);
    write_preamble(out, config);
    out << grid_line(grid) << "\n";
    std::vector<double> taus(grid.levels());
    for (int i = 0; i < grid.levels(); ++i) taus[i] = grid.tau(i);
    write_table(out, taus, grid.y_nodes(), s.values());
}

SurfaceFile read_surface(const fs::path& path) {
    Table t = read_table(path);
    if (!t.grid) throw ConfigError(path.string() + ": surface file lacks a grid line");
    const Grid& g = *t.grid;
    if (t.taus.size() != static_cast<std::size_t>(g.levels()) || t.ys.size() != static_cast<std::size_t>(g.nodes()))
        throw ConfigError(path.string() + ": table shape does not match its grid line");
    SurfaceFile f{g, Surface(g.levels(), g.nodes())};
    f.values.values() = std::move(t.values);
    return f;
}

void write_lattice(const fs::path& path, const VolLattice& lattice, const nlohmann::json& config) {
    std::ofstream out = open_out(path);
    write_preamble(out, config);
    write_table(out, lattice.taus, lattice.ys, lattice.values);
}

VolLattice read_lattice(const fs::path& path) {
    Table t = read_table(path);
    if (t.grid) throw ConfigError(path.string() + ": expected a lattice file, found a full grid surface");
    return VolLattice{std::move(t.taus), std::move(t.ys), std::move(t.values)};
}

void write_nodal(const fs::path& path, const Grid& grid, std::span<const double> values, const std::string& column,
                 const nlohmann::json& config) {
    if (values.size() != static_cast<std::size_t>(grid.nodes())) throw ConfigError("nodal vector does not match the grid");
    std::ofstream out = open_out(path);
    write_preamble(out, config);
    out << grid_line(grid) << "\n";
    out << "y," << column << "\n";
    for (int c = 0; c < grid.nodes(); ++c) out << format_number(grid.y_at_col(c)) << "," << format_number(values[c]) << "\n";
}

NodalFile read_nodal(const fs::path& path) {
    const auto lines = data_lines(path);
    if (lines.size() < 2 || lines[0].second.rfind("grid", 0) != 0)
        throw ConfigError(path.string() + ": nodal file needs a grid line and a header");
    NodalFile f{parse_grid_line(lines[0].second), {}};
    for (std::size_t k = 2; k < lines.size(); ++k) {
        const auto fields = split(lines[k].second);
        if (fields.size() != 2) throw ConfigError(path.string() + ":" + std::to_string(lines[k].first) + ": expected 2 fields");
        f.values.push_back(parse_number(fields[1], path, lines[k].first));
    }
    if (f.values.size() != static_cast<std::size_t>(f.grid.nodes()))
        throw ConfigError(path.string() + ": row count does not match the grid");
    return f;
}

void write_json(const fs::path& path, nlohmann::json doc, const nlohmann::json& config) {
    doc["version"] = version_string();
    doc["config"] = config;
    std::ofstream out = open_out(path);
    out << doc.dump(2) << "\n";
}

nlohmann::json read_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# config: ", 0) == 0) return nlohmann::json::parse(line.substr(10));
        if (!line.empty() && line[0] != '#') break;
    }
    return nullptr;
}

namespace {

std::chrono::sys_days parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char a = 0;
    char b = 0;
    std::istringstream in(trim(text));
    in >> y >> a >> m >> b >> d;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!in || a != '-' || b != '-' || !ymd.ok()) throw ConfigError("bad date '" + text + "' (expected YYYY-MM-DD)");
    return std::chrono::sys_days{ymd};
}

}  // namespace

ImportResult import_market_quotes(const fs::path& path, const ImportOptions& opts) {
    if (!(opts.S0 > 0.0)) throw DomainError("spot must be positive");
    const auto lines = data_lines(path);
    if (lines.empty()) throw ConfigError(path.string() + ": missing header");
    const auto header = split(lines[0].second);
    std::map<std::string, std::size_t> col;
    for (std::size_t k = 0; k < header.size(); ++k) col[trim(header[k])] = k;
    if (!col.count("strike") || !col.count("price") || (!col.count("expiry") && !col.count("days")))
        throw ConfigError(path.string() + ": need columns strike, price and expiry or days");
    if (col.count("expiry") && !opts.valuation_date)
        throw ConfigError("expiry dates need a valuation date");
    const auto valuation = opts.valuation_date ? std::optional(parse_date(*opts.valuation_date)) : std::nullopt;

    ImportResult res;
    res.quotes.provenance = Provenance::market;
    std::set<std::pair<int, int>> seen;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [no, text] = lines[r];
        const auto f = split(text);
        const std::string where = path.string() + ":" + std::to_string(no) + ": ";
        if (f.size() != header.size()) {
            res.rejected.push_back(where + "wrong field count");
            continue;
        }
        const double strike = parse_number(f[col["strike"]], path, no);
        const double price = parse_number(f[col["price"]], path, no);
        double days = 0.0;
        if (col.count("days")) days = parse_number(f[col["days"]], path, no);
        else days = static_cast<double>((parse_date(f[col["expiry"]]) - *valuation).count());
        Quote q;
        q.tau = days / 365.0;
        q.y = log_moneyness(strike, opts.S0);
        q.price = price / opts.S0;
        if (!(q.tau > 0.0)) {
            res.rejected.push_back(where + "nonpositive maturity");
            continue;
        }
        if (opts.snap) {
            const Grid& g = *opts.snap;
            const int i = static_cast<int>(std::lround(q.tau / g.dtau()));
            const int j = static_cast<int>(std::lround(q.y / g.dy()));
            if (i < 1 || i > g.steps() || !g.contains_j(j)) {
                res.rejected.push_back(where + "outside the grid");
                continue;
            }
            if (!seen.emplace(i, j).second) {
                res.rejected.push_back(where + "duplicate grid node after snapping");
                continue;
            }
            q.tau = g.tau(i);
            q.y = g.y(j);
        }
        const double lower = std::max(0.0, 1.0 - std::exp(q.y - opts.r * q.tau));
        if (!(q.price > lower && q.price < 1.0)) {
            res.rejected.push_back(where + "price outside the arbitrage band");
            continue;
        }
        res.quotes.quotes.push_back(q);
    }
    return res;
}

}  // namespace jdlv
