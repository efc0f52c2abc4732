#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lookback::tools {

// RFC-4180-style quoting; fields containing commas, quotes, or newlines are
// quoted, embedded quotes doubled
std::string csv_escape(const std::string& field);

// shortest round-trippable decimal (17 significant digits)
std::string csv_double(double v);

// LF line endings
void write_csv(std::ostream& out,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace lookback::tools
