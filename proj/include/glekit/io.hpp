#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "glekit/active.hpp"
#include "glekit/correlation.hpp"
#include "glekit/oscfit.hpp"
#include "glekit/transfer.hpp"
#include "glekit/types.hpp"

namespace glekit {

// All writers go through a temporary file in the target directory followed
// by an atomic rename, so partially written artifacts never appear under
// their final name.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

// Two-column CSV "t,value" with %.17g formatting (lossless round trip).
void write_series_csv(const std::filesystem::path& path,
                      const CorrelationSeries& series);
CorrelationSeries read_series_csv(const std::filesystem::path& path,
                                  SeriesKind kind);

// Trajectory table "frame,particle,axis,position,momentum" plus a JSON
// metadata record (mass, dt_record, dim) at <path>.meta.json.
void write_trajectory_csv(const std::filesystem::path& path,
                          const CgTrajectory& traj);
CgTrajectory read_trajectory_csv(const std::filesystem::path& path,
                                 const std::filesystem::path& meta_path = {});

// Snapshot manifest: JSON listing parameter coordinates and per-snapshot
// kernel CSV paths (relative paths resolve against the manifest directory).
void write_snapshot_manifest(const std::filesystem::path& path,
                             const SnapshotSet& snapshots,
                             const std::vector<std::string>& kernel_files);
SnapshotSet read_snapshot_manifest(const std::filesystem::path& path);

// Surrogates serialize to a single JSON document embedding the basis, the
// mode models (or the direct model) and the training snapshots.
void save_surrogate(const std::filesystem::path& path,
                    const DirectSurrogate& surrogate);
void save_surrogate(const std::filesystem::path& path,
                    const RomGprSurrogate& surrogate);
using AnySurrogate = std::variant<DirectSurrogate, RomGprSurrogate>;
AnySurrogate load_surrogate(const std::filesystem::path& path);

void write_expansion_json(const std::filesystem::path& path,
                          const OscillatorExpansion& expansion,
                          double rel_residual);
std::pair<OscillatorExpansion, double> read_expansion_json(
    const std::filesystem::path& path);

// Candidate pool document: {"version", "points", "initial"}.
void write_pool_json(const std::filesystem::path& path,
                     const CandidatePool& pool,
                     const std::vector<ParameterPoint>& initial);
std::pair<CandidatePool, std::vector<ParameterPoint>> read_pool_json(
    const std::filesystem::path& path);

// Stable content tag for a parameter point: 64-bit FNV-1a over the %.17g
// coordinate string, printed as 16 hex digits.
std::string point_tag(const ParameterPoint& mu);
std::string kernel_filename(const ParameterPoint& mu);

// File-backed oracle over <dir>/kernel_<tag>.csv. A missing file raises
// DataRequestError carrying the point; found kernels are validated against
// `grid` when one is given.
KernelOracle file_kernel_oracle(const std::filesystem::path& dir,
                                const TimeGrid* grid = nullptr);

}  // namespace glekit
