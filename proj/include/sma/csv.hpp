#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sma::csv {

// Shortest-safe text for a double: 17 significant digits, "." decimal.
std::string num(double x);
std::string quote(const std::string& field);  // RFC 4180 quoting when needed

void write_row(std::ostream& os, const std::vector<std::string>& fields);
void write_row(std::ostream& os, const std::vector<double>& values);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
Table read(std::istream& is);

} // namespace sma::csv
