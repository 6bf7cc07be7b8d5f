#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "treerecon/error.hpp"

namespace treerecon::cli {

std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded(x, decimals));
  return buf;
}

std::string general(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double rounded(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(x * scale) / scale + 0.0;  // + 0.0 turns -0 into 0
}

namespace {

void put_field(std::ostream& os, const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) {
    os << f;
    return;
  }
  os << '"';
  for (char c : f) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void put_row(std::ostream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    put_field(os, row[i]);
  }
  os << '\n';
}

}  // namespace

std::string to_csv(const Table& t) {
  std::ostringstream os;
  put_row(os, t.header);
  for (const auto& r : t.rows) put_row(os, r);
  return os.str();
}

Table parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          row.push_back(std::move(field));
          lines.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        any = false;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::BadInput, "CSV: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    lines.push_back(std::move(row));
  }
  if (lines.empty()) throw Error(ErrorCode::BadInput, "CSV: no header");
  Table t;
  t.header = std::move(lines.front());
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].size() != t.header.size()) {
      throw Error(ErrorCode::BadInput, "CSV: row " + std::to_string(k) + " has " +
                                           std::to_string(lines[k].size()) + " fields, expected " +
                                           std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(lines[k]));
  }
  return t;
}

std::string to_text(const Table& t) {
  std::ostringstream os;
  if (t.rows.size() == 1) {
    std::size_t w = 0;
    for (const auto& h : t.header) w = std::max(w, h.size());
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      os << t.header[i] << std::string(w - t.header[i].size() + 2, ' ') << t.rows[0][i] << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> w(t.header.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = t.header[i].size();
    for (const auto& r : t.rows) w[i] = std::max(w[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << r[i];
      if (i + 1 < r.size()) os << std::string(w[i] - r[i].size() + 2, ' ');
    }
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

}  // namespace treerecon::cli
