#pragma once

// Task-condition events and midpoint-centred window extraction.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "awats/parcellation.hpp"
#include "awats/resampling.hpp"

namespace awats {

constexpr int kDefaultWindow = 15;

struct Event {
  int condition = 0;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds
};

struct EventTable {
  std::vector<Event> events;  // sorted by onset
  int n_conditions = 0;
};

// Consolidated CSV with header "condition,onset,duration". Condition ids
// must lie in [0, n_conditions).
EventTable parse_events(const std::filesystem::path& path, int n_conditions);

// HCP-style EV files: whitespace separated "onset duration amplitude" rows.
// The i-th file holds the events of condition i; amplitude is ignored.
EventTable parse_ev_files(const std::vector<std::filesystem::path>& paths);

void write_events_csv(const EventTable& table, const std::filesystem::path& path);

enum class FeatureLayout { kSeries, kRepr };

// One labelled window: R x W (series) or R x W x 3q (repr), row-major with
// ROI outermost.
struct WindowSample {
  FeatureLayout layout = FeatureLayout::kSeries;
  int n_rois = 0;
  int window = 0;
  int repr_width = 1;  // 3q in repr layout, 1 otherwise
  std::vector<double> features;
  int label = 0;
  std::string subject_id;
  std::string run_id;

  std::size_t size() const { return features.size(); }
};

struct WindowCut {
  std::vector<WindowSample> samples;
  int dropped = 0;  // events whose window left [0, T-1]
};

struct WindowSpec {
  int window = kDefaultWindow;
  double tr_seconds = 1.0;
  std::string subject_id;
  std::string run_id;
};

// Midpoint TR of an event: round-half-up of (onset + duration / 2) / tr.
int64_t event_mid_tr(const Event& e, double tr_seconds);

// One sample per event whose centred window fits inside the run.
// Throws ConfigError for an even or non-positive window.
WindowCut cut_windows(const SeriesMatrix& data, const EventTable& events,
                      const WindowSpec& spec);
WindowCut cut_windows(const ReprTensor& data, const EventTable& events,
                      const WindowSpec& spec);

}  // namespace awats
