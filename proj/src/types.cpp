#include "glekit/types.hpp"

namespace glekit {

const char* to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::vacf: return "vacf";
    case SeriesKind::fvcf: return "fvcf";
    case SeriesKind::kernel: return "kernel";
    case SeriesKind::msd: return "msd";
    case SeriesKind::diffusion: return "diffusion";
  }
  return "unknown";
}

SeriesKind series_kind_from_string(const std::string& name) {
  if (name == "vacf") return SeriesKind::vacf;
  if (name == "fvcf") return SeriesKind::fvcf;
  if (name == "kernel") return SeriesKind::kernel;
  if (name == "msd") return SeriesKind::msd;
  if (name == "diffusion") return SeriesKind::diffusion;
  throw ValidationError("unknown series kind: " + name);
}

std::vector<double> trapezoid_weights(const TimeGrid& grid) {
  grid.validate();
  std::vector<double> w(grid.n_t, grid.dt);
  w.front() = 0.5 * grid.dt;
  w.back() = 0.5 * grid.dt;
  return w;
}

}  // namespace glekit
