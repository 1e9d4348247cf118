#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>

namespace lassogeom::harness {

/// Shortest round-trip decimal for a double, independent of the C locale.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt_int(std::int64_t v) { return std::to_string(v); }

inline std::string fmt_uint(std::uint64_t v) { return std::to_string(v); }

inline std::string fmt_bool(bool b) { return b ? "1" : "0"; }

/// Locale-independent parse; accepts nan/inf spellings written by fmt_double.
inline bool parse_double(const std::string& s, double& out) {
  if (s == "nan") {
    out = std::nan("");
    return true;
  }
  if (s == "inf") {
    out = INFINITY;
    return true;
  }
  if (s == "-inf") {
    out = -INFINITY;
    return true;
  }
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace lassogeom::harness
