/**
 * @file io.hpp
 * @brief Flat-file artifacts: quote, surface, lattice and nodal-vector CSVs
 *
 * Every file starts with `# version: ...` and `# config: <json>` comment lines so
 * reruns with the same configuration are byte-identical. Numbers are written
 * with 17 significant digits.
 */
#pragma once

#include "jdlv/grid.hpp"
#include "jdlv/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jdlv {

std::string version_string();

/// "%.17g"
std::string format_number(double v);

/// Columns tau,y,price[,implied_vol][,weight]; implied_vol is written when every quote has one.
void write_quotes(const std::filesystem::path& path, const QuoteSet& quotes, const nlohmann::json& config);
/// Reads quote CSVs (header mandatory, '#' lines skipped). Throws ConfigError with the line number.
QuoteSet read_quotes(const std::filesystem::path& path);

/// Dense surface: a `grid,...` line, then `tau\y,<y values>`, then one row per level.
void write_surface(const std::filesystem::path& path, const Grid& grid, const Surface& s,
                   const nlohmann::json& config);

struct SurfaceFile {
    Grid grid;
    Surface values;
};

SurfaceFile read_surface(const std::filesystem::path& path);

void write_lattice(const std::filesystem::path& path, const VolLattice& lattice, const nlohmann::json& config);
VolLattice read_lattice(const std::filesystem::path& path);

/// Nodal vector on the y-lattice: `grid,...` line, then `y,<column>` rows.
void write_nodal(const std::filesystem::path& path, const Grid& grid, std::span<const double> values,
                 const std::string& column, const nlohmann::json& config);

struct NodalFile {
    Grid grid;
    std::vector<double> values;
};

NodalFile read_nodal(const std::filesystem::path& path);

/// Writes a JSON document with the version and config merged in.
void write_json(const std::filesystem::path& path, nlohmann::json doc, const nlohmann::json& config);

/// Reads the `# config:` line of an artifact, or null when absent.
nlohmann::json read_config(const std::filesystem::path& path);

std::string grid_line(const Grid& grid);
Grid parse_grid_line(const std::string& line);
nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);

struct ImportOptions {
    double S0 = 1.0;
    double r = 0.0;
    std::optional<std::string> valuation_date;  ///< YYYY-MM-DD, needed for expiry dates
    std::optional<Grid> snap;                   ///< snap (tau, y) to this grid's nodes
};

struct ImportResult {
    QuoteSet quotes;
    std::vector<std::string> rejected;  ///< one message per dropped row
};

/**
 * Market export with columns strike, price and either expiry (YYYY-MM-DD) or
 * days. Maturity is days/365 (ACT/365 fixed), y = log(K/S0), price u = C/S0.
 * Rows outside the arbitrage band are dropped and logged.
 */
ImportResult import_market_quotes(const std::filesystem::path& path, const ImportOptions& opts);

}  // namespace jdlv
