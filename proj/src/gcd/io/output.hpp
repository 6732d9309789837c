#pragma once

#include <string>
#include <vector>

#include "gcd/integrator/integrator.hpp"

namespace gcd::io {

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

/// 17 significant digits.
std::string format_double(double v);

/// t, the free variables, dependents, multipliers and marginal ratios.
std::string trajectory_csv(const integrator::Trajectory& tr);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numeric CSV with a header row. Throws ConfigError on malformed input.
Table parse_csv(const std::string& text);

/// Line chart of the named columns against the first column. Throws
/// ConfigError on an empty list or unknown column.
std::string plot_svg(const Table& t, const std::vector<std::string>& columns,
                     const std::string& title = "");

}  // namespace gcd::io
