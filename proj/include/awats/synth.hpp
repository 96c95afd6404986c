#pragma once

// Synthetic 4D datasets with class information planted either as zero-mean
// spatial ramps inside each ROI (invisible to voxel averaging), as uniform
// ROI offsets, or both.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "awats/volume_io.hpp"
#include "awats/windowing.hpp"

namespace awats {

enum class Placement { kGradientOnly, kMeanOnly, kMixed };

const char* to_string(Placement p);
Placement parse_placement(const std::string& s);

struct SynthConfig {
  std::array<int64_t, 3> grid{24, 24, 24};
  int n_rois = 8;
  int n_conditions = 4;
  int subjects = 4;
  int runs_per_subject = 2;
  int events_per_run = 24;
  double tr_seconds = 1.0;
  Placement placement = Placement::kGradientOnly;
  double gradient = 0.5;  // ramp slope per voxel step
  double mean = 0.0;      // uniform offset magnitude
  double sigma = 1.0;     // voxel noise std
  uint64_t seed = 0;
  int window = kDefaultWindow;
  int event_trs = kDefaultWindow + 1;
  int rest_trs = 4;
  int lead_trs = kDefaultWindow;
  // Fixed run length in TRs; 0 sizes runs to fit the events.
  int run_trs = 0;

  // Throws ConfigError on violated invariants or infeasible packing.
  void validate() const;
  int64_t trs_per_run() const;
  int n_runs() const { return subjects * runs_per_subject; }
};

// Axis-aligned ROI box, inclusive-exclusive voxel bounds.
struct RoiBox {
  std::array<int64_t, 3> lo;
  std::array<int64_t, 3> hi;

  int64_t extent(int axis) const { return hi[axis] - lo[axis]; }
};

// Signal planted in ROI `roi` (0-based) during an event of `condition`.
struct PlantedSignal {
  int ramp_axis = 0;       // 0, 1, 2 = x, y, z
  int ramp_sign = 1;       // +1 or -1
  int offset_sign = 0;     // -1, 0, +1
};

PlantedSignal planted_signal(int roi, int condition);

struct SynthEventTruth {
  int condition = 0;
  int64_t onset_tr = 0;
  int64_t duration_trs = 0;
};

struct SynthRun {
  std::string subject_id;
  std::string run_id;
  Fmri4D fmri;
  EventTable events;
  std::vector<SynthEventTruth> truth;
};

struct SynthDataset {
  SynthConfig config;
  AtlasVolume atlas;
  std::vector<RoiBox> boxes;
  std::vector<SynthRun> runs;
};

class SynthGenerator {
 public:
  explicit SynthGenerator(SynthConfig config);

  const SynthConfig& config() const { return config_; }
  const AtlasVolume& atlas() const { return atlas_; }
  const std::vector<RoiBox>& boxes() const { return boxes_; }
  int n_runs() const { return config_.n_runs(); }

  // Run `k` in subject-major order; deterministic in (seed, k).
  SynthRun run(int k) const;
  // Event schedule of run `k` without generating voxels.
  EventTable events(int k) const;

 private:
  std::vector<int> conditions_for_run(int k) const;

  SynthConfig config_;
  AtlasVolume atlas_;
  std::vector<RoiBox> boxes_;
};

SynthDataset generate(const SynthConfig& config);

// Digest of the planted ground truth (event schedule and signal table).
std::string ground_truth_digest(const SynthGenerator& gen);

}  // namespace awats
