#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "pairbench/errors.hpp"

namespace pairbench::detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& field, const std::string& context) {
  const std::string t = trim(field);
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (t.empty() || end != begin + t.size())
    throw DomainError("cannot parse number '" + field + "' in " + context);
  return v;
}

/// Shortest representation that round-trips a double, for stable CSV output.
/// strtod rather than stod: subnormals parse to their value instead of
/// throwing.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace pairbench::detail
