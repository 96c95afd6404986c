#pragma once

// On-disk dataset layout and window extraction across runs.
//
// A dataset directory holds atlas.nii(.gz) and dataset.csv with header
// "subject_id,run_id,fmri,events"; paths are relative to the directory.

#include <filesystem>
#include <string>
#include <vector>

#include "awats/parcellation.hpp"
#include "awats/synth.hpp"
#include "awats/windowing.hpp"

namespace awats {

struct RunEntry {
  std::string subject_id;
  std::string run_id;
  std::filesystem::path fmri;
  std::filesystem::path events;
};

struct DatasetIndex {
  std::filesystem::path atlas;
  std::vector<RunEntry> runs;
};

DatasetIndex read_dataset_index(const std::filesystem::path& dir);

// Writes every run of `gen` plus atlas and index into `dir`; returns the
// written file paths.
std::vector<std::filesystem::path> write_synth_dataset(const SynthGenerator& gen,
                                                       const std::filesystem::path& dir,
                                                       bool gzip = false);

enum class FeatureKind { kAts, kRepr, kAwatsPca };

FeatureKind parse_feature_kind(const std::string& s);

struct WindowOptions {
  FeatureKind kind = FeatureKind::kRepr;
  int window = kDefaultWindow;
  int q = kDefaultResampleSize;
  double tr_override = 0.0;  // seconds; 0 uses the volume header
};

// Windows of one run.
WindowCut run_windows(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                      const EventTable& events, const WindowOptions& options,
                      const std::string& subject_id, const std::string& run_id);

struct WindowDataset {
  std::vector<WindowSample> samples;
  int n_conditions = 0;
  int n_rois = 0;
  int dropped = 0;
};

// Loads all runs of an index. `n_conditions` of 0 infers it from the largest
// condition id in the event files.
WindowDataset load_windows(const DatasetIndex& index, const WindowOptions& options,
                           int n_conditions = 0);

// Same, straight from a generator without touching disk.
WindowDataset synth_windows(const SynthGenerator& gen, const WindowOptions& options);

}  // namespace awats
