#pragma once

#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace pin::csv {

/// Shortest round-trip decimal form; identical on every platform.
inline std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string num(std::int64_t v) { return std::to_string(v); }
inline std::string num(std::uint64_t v) { return std::to_string(v); }
inline std::string num(int v) { return std::to_string(v); }

/// Writes "# schema: <name> v1" followed by the column header line.
inline void header(std::ostream& os, std::string_view schema, std::initializer_list<std::string_view> cols) {
  os << "# schema: " << schema << " v1\n";
  bool first = true;
  for (auto c : cols) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

/// Writes one comma separated row of preformatted fields.
inline void row(std::ostream& os, std::initializer_list<std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) os << ',';
    os << f;
    first = false;
  }
  os << '\n';
}

}  // namespace pin::csv
