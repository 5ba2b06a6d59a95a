#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glekit {

// Status codes shared by the C++ exceptions, the C API and the CLI exit
// codes. Values 0 (ok) and 1 (generic failure) are reserved by convention.
enum class ErrorCode : int {
  validation = 2,    // bad shapes, ranges, grids, groupings, file contents
  data_request = 3,  // a kernel oracle needs data that does not exist yet
  numeric = 4,       // singular systems, failed regularization, non-PSD noise
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCode::validation, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCode::numeric, what) {}
};

// Thrown by file-backed kernel oracles when a requested parameter point has
// no stored data. Carries the point so callers can emit a data request.
class DataRequestError : public Error {
 public:
  DataRequestError(std::vector<double> point, const std::string& what)
      : Error(ErrorCode::data_request, what), point_(std::move(point)) {}
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

// Uniform time grid with origin fixed at t = 0, so node i sits at i * dt.
struct TimeGrid {
  double dt = 0.0;
  std::size_t n_t = 0;

  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
  double t_final() const { return n_t == 0 ? 0.0 : time(n_t - 1); }

  bool operator==(const TimeGrid& other) const {
    return dt == other.dt && n_t == other.n_t;
  }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt))
      throw ValidationError("time grid spacing must be positive and finite");
    if (n_t < 2) throw ValidationError("time grid needs at least two nodes");
  }
};

enum class SeriesKind { vacf, fvcf, kernel, msd, diffusion };

const char* to_string(SeriesKind kind);
SeriesKind series_kind_from_string(const std::string& name);

// A sampled function of time on a uniform grid. Kernels recovered from the
// Volterra solve live on the staggered half-grid, recorded via t_offset:
// sample i sits at t_offset + i * dt.
struct CorrelationSeries {
  TimeGrid grid;
  double t_offset = 0.0;
  std::vector<double> values;
  SeriesKind kind = SeriesKind::kernel;

  double time(std::size_t i) const { return t_offset + grid.time(i); }
  std::size_t size() const { return values.size(); }

  void validate() const {
    grid.validate();
    if (values.size() != grid.n_t)
      throw ValidationError("series length does not match its grid");
    if (!(t_offset >= 0.0) || !std::isfinite(t_offset))
      throw ValidationError("series time offset must be finite and >= 0");
    for (double v : values)
      if (!std::isfinite(v))
        throw ValidationError("series contains a non-finite value");
    if (kind == SeriesKind::vacf && !(values[0] > 0.0))
      throw ValidationError("a VACF must have C(0) > 0");
  }
};

inline CorrelationSeries make_series(const TimeGrid& grid, SeriesKind kind,
                                     std::vector<double> values,
                                     double t_offset = 0.0) {
  CorrelationSeries s;
  s.grid = grid;
  s.t_offset = t_offset;
  s.values = std::move(values);
  s.kind = kind;
  s.validate();
  return s;
}

// Coordinates of one point in the learning parameter domain.
struct ParameterPoint {
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  bool operator==(const ParameterPoint& other) const {
    return coords == other.coords;
  }

  void validate() const {
    if (coords.empty()) throw ValidationError("parameter point is empty");
    for (double c : coords)
      if (!std::isfinite(c))
        throw ValidationError("parameter point has a non-finite coordinate");
  }
};

// Trapezoid quadrature weights for a uniform grid: dt * (1/2, 1, ..., 1, 1/2).
std::vector<double> trapezoid_weights(const TimeGrid& grid);

}  // namespace glekit
