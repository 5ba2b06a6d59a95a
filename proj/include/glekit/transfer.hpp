#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "glekit/gpr.hpp"
#include "glekit/pod.hpp"
#include "glekit/types.hpp"

namespace glekit {

// Kernel surrogate that regresses K(t; mu) directly on (t, mu) tuples.
struct DirectSurrogate {
  GprModel model;           // inputs (t, mu_1..mu_d)
  TimeGrid grid;            // prediction grid (the training snapshot grid)
  double t_offset = 0.0;
  std::size_t param_dim = 0;
  std::size_t time_stride = 1;  // training subsampling along t
  SnapshotSet training;
};

// Kernel surrogate built from a POD basis with one GP per retained mode.
struct RomGprSurrogate {
  PodBasis basis;
  std::vector<GprModel> mode_models;  // rank entries, inputs mu
  std::size_t param_dim = 0;
  SnapshotSet training;
};

struct KernelPrediction {
  CorrelationSeries kernel;
  Eigen::VectorXd mode_means;     // ROM only: predicted alpha_k
  Eigen::VectorXd mode_stds;      // ROM only: per-mode posterior std
  Eigen::VectorXd pointwise_std;  // per-time-sample posterior std
};

// Training budget: a direct surrogate refuses more than this many (t, mu)
// rows and points at the ROM path instead.
inline constexpr std::size_t kDirectTrainingBudget = 20000;

DirectSurrogate train_direct(const SnapshotSet& snapshots,
                             const GprConfig& config = {},
                             std::size_t time_stride = 1);

RomGprSurrogate train_rom_gpr(const SnapshotSet& snapshots, double zeta_pod,
                              const GprConfig& config = {});

KernelPrediction predict_kernel(const DirectSurrogate& surrogate,
                                const ParameterPoint& mu);
KernelPrediction predict_kernel(const RomGprSurrogate& surrogate,
                                const ParameterPoint& mu);

// Plain root-sum-square relative error ||a - b||_2 / ||b||_2 on shared grids.
double relative_error(const CorrelationSeries& prediction,
                      const CorrelationSeries& truth);

}  // namespace glekit
