#include "cnl/numio.hpp"

#include <charconv>
#include <cmath>

#include "cnl/errors.hpp"

namespace cnl {

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  // from_chars rejects nan/inf spellings that to_chars produces.
  if (s == "nan" || s == "-nan") return std::nan("");
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw IoError("cannot parse number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace cnl
