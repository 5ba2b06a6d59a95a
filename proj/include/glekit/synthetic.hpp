#pragma once

#include "glekit/active.hpp"
#include "glekit/oscfit.hpp"
#include "glekit/types.hpp"

namespace glekit {

// Closed-form two-term benchmark family over mu in [0.5, 2]^2:
//   K(t; mu) = mu_1 exp(-(1 + mu_2) t / 2) cos(2 t)
//            + 0.5 mu_1 exp(-3 mu_2 t / 2) cos(5 t).
// Every member is exactly representable by a two-term oscillator expansion,
// so extraction, fitting, surrogate and simulation layers can all be checked
// against the same analytic object.
namespace benchmark {

inline constexpr double kDefaultDt = 1e-2;
inline constexpr double kDefaultTFinal = 20.0;

TimeGrid default_grid();

OscillatorExpansion expansion(const ParameterPoint& mu);
CorrelationSeries kernel(const ParameterPoint& mu, const TimeGrid& grid,
                         double t_offset = 0.0);
// Equilibrium VACF / FVCF of the unit-mass, unit-temperature GLE driven by
// the family kernel.
CorrelationSeries vacf(const ParameterPoint& mu, const TimeGrid& grid,
                       std::size_t dim = 1);
CorrelationSeries fvcf(const ParameterPoint& mu, const TimeGrid& grid,
                       std::size_t dim = 1);

KernelOracle oracle(const TimeGrid& grid);

}  // namespace benchmark

}  // namespace glekit
