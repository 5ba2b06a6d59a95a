#include "glekit/synthetic.hpp"

#include <cmath>

#include "glekit/simulate.hpp"

namespace glekit::benchmark {

TimeGrid default_grid() {
  const auto n = static_cast<std::size_t>(
                     std::llround(kDefaultTFinal / kDefaultDt)) +
                 1;
  return TimeGrid{kDefaultDt, n};
}

OscillatorExpansion expansion(const ParameterPoint& mu) {
  mu.validate();
  if (mu.dim() != 2)
    throw ValidationError("the benchmark family is two-dimensional");
  const double mu1 = mu.coords[0];
  const double mu2 = mu.coords[1];
  if (!(mu1 > 0.0) || !(mu2 > 0.0))
    throw ValidationError("benchmark family parameters must be positive");
  OscillatorExpansion exp;
  exp.terms = {{1.0 + mu2, mu1, 0.0, 2.0}, {3.0 * mu2, 0.5 * mu1, 0.0, 5.0}};
  return exp;
}

CorrelationSeries kernel(const ParameterPoint& mu, const TimeGrid& grid,
                         double t_offset) {
  return eval_expansion(expansion(mu), grid, t_offset);
}

CorrelationSeries vacf(const ParameterPoint& mu, const TimeGrid& grid,
                       std::size_t dim) {
  const ExtendedSystem sys = assemble_extended_system(expansion(mu), 1.0, 1.0);
  return analytic_vacf(sys, grid, dim);
}

CorrelationSeries fvcf(const ParameterPoint& mu, const TimeGrid& grid,
                       std::size_t dim) {
  const ExtendedSystem sys = assemble_extended_system(expansion(mu), 1.0, 1.0);
  return analytic_fvcf(sys, grid, dim);
}

KernelOracle oracle(const TimeGrid& grid) {
  grid.validate();
  return [grid](const ParameterPoint& mu) { return kernel(mu, grid); };
}

}  // namespace glekit::benchmark
