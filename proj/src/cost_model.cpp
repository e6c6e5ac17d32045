#include "sattn/cost_model.hpp"

#include <string>

#include "sattn/error.hpp"

namespace sattn {

std::string_view to_string(CostMode m) noexcept {
  switch (m) {
    case CostMode::Full:
      return "full";
    case CostMode::SWA:
      return "swa";
    case CostMode::SA:
      return "sa";
    case CostMode::Fused:
      return "fused";
  }
  return "?";
}

CostMode parse_cost_mode(std::string_view s) {
  if (s == "full") return CostMode::Full;
  if (s == "swa") return CostMode::SWA;
  if (s == "sa") return CostMode::SA;
  if (s == "fused" || s == "sa+swa") return CostMode::Fused;
  throw ConfigError("unknown cost mode '" + std::string(s) + "'");
}

CostReport cost_model(std::size_t n, std::size_t w, std::size_t d, CostMode mode, std::size_t heads) {
  if (n == 0 || w == 0 || d == 0 || heads == 0) throw ConfigError("cost_model: sizes must be positive");
  if (mode != CostMode::Full && w > n) throw ConfigError("cost_model: w must not exceed n");
  CostReport r;
  r.mode = mode;
  r.n = static_cast<double>(n);
  r.w = static_cast<double>(w);
  r.d = static_cast<double>(d);
  r.heads = static_cast<double>(heads);

  const double pairs = mode == CostMode::Full ? r.n * r.n : r.n * r.w;
  const double paths = mode == CostMode::Fused ? 2.0 : 1.0;
  r.score_flops = paths * 2.0 * pairs * r.d;
  r.value_flops = paths * 2.0 * pairs * r.d;
  r.softmax_flops = paths * 4.0 * pairs * r.heads;
  if (mode == CostMode::Fused) r.gate_flops = 4.0 * r.n * r.d * r.d + 5.0 * r.n * r.d;
  if (mode == CostMode::SA || mode == CostMode::Fused) r.permute_moves = 4.0 * r.n * r.d;
  return r;
}

}  // namespace sattn
