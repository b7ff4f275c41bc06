#pragma once

#include <string>

#include "cnl/types.hpp"

namespace cnl {

// Line-oriented text format, LF endings, one value per line in shortest
// round-trip decimal form.  Layout (documented in README.md):
//   cnl-checkpoint v1
//   entries <count>
//   <name> <offset> <rank> <dim...>     x count
//   values <count>
//   <value>                             x count
// Values load back bit-for-bit.
void save_checkpoint(const ParamVector& params, const std::string& path);

// Throws IoError on a missing file, wrong version tag, or malformed layout;
// ConfigError when the manifest does not tile the values.
ParamVector load_checkpoint(const std::string& path);

}  // namespace cnl
