#pragma once

#include <string>
#include <string_view>

namespace cnl {

// Shortest round-trip decimal form; locale-independent, stable across runs.
std::string fmt_double(double v);

// Inverse of fmt_double.  Throws IoError on anything but a full parse.
double parse_double(std::string_view s);

}  // namespace cnl
