#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace treerecon::cli {

// A header plus string cells; the common shape behind CSV and text output.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string fixed(double x, int decimals);
// Shortest form that still identifies the double ("%.12g").
std::string general(double x);
double rounded(double x, int decimals);

// RFC 4180 style: fields with commas, quotes or newlines are quoted.
std::string to_csv(const Table& t);
// Throws BadInput on ragged rows or unterminated quotes.
Table parse_csv(std::string_view text);

// Aligned columns; a single-row table is printed as key/value lines.
std::string to_text(const Table& t);

}  // namespace treerecon::cli
