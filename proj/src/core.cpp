#include "egl/core.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace egl {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string RunRecord::to_csv() const {
  std::string out = "t,y,y_best\n";
  for (const auto& p : trace) {
    out += std::to_string(p.t);
    out += ',';
    out += format_double(p.y);
    out += ',';
    out += format_double(p.y_best);
    out += '\n';
  }
  return out;
}

std::string RunRecord::to_json_sidecar() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  std::vector<double> xb(x_best.data(), x_best.data() + x_best.size());
  j["x_best"] = xb;
  j["y_best"] = y_best;
  j["evaluations_used"] = evaluations_used;
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace egl
