#include "cnl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "cnl/errors.hpp"
#include "cnl/numio.hpp"

namespace cnl {

namespace {
constexpr char kVersionLine[] = "cnl-checkpoint v1";
}

void save_checkpoint(const ParamVector& params, const std::string& path) {
  validate_manifest(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out << kVersionLine << '\n';
  out << "entries " << params.manifest.size() << '\n';
  for (const ManifestEntry& e : params.manifest) {
    out << e.name << ' ' << e.offset << ' ' << e.shape.size();
    for (std::size_t d : e.shape) out << ' ' << d;
    out << '\n';
  }
  out << "values " << params.values.size() << '\n';
  for (double v : params.values) out << fmt_double(v) << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

ParamVector load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kVersionLine) {
    throw IoError("checkpoint version tag mismatch in " + path);
  }

  ParamVector pv;
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "entries") {
    throw IoError("checkpoint missing entries header: " + path);
  }
  pv.manifest.resize(count);
  for (ManifestEntry& e : pv.manifest) {
    std::size_t rank = 0;
    if (!(in >> e.name >> e.offset >> rank)) {
      throw IoError("checkpoint manifest truncated: " + path);
    }
    e.shape.resize(rank);
    for (std::size_t& d : e.shape) {
      if (!(in >> d)) throw IoError("checkpoint manifest truncated: " + path);
    }
  }
  if (!(in >> word >> count) || word != "values") {
    throw IoError("checkpoint missing values header: " + path);
  }
  pv.values.resize(count);
  for (double& v : pv.values) {
    if (!(in >> word)) throw IoError("checkpoint values truncated: " + path);
    v = parse_double(word);
  }
  validate_manifest(pv);
  return pv;
}

}  // namespace cnl
