#include "awats/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "awats/errors.hpp"
#include "awats/seed.hpp"

namespace awats {

namespace {

std::vector<RoiBox> layout_boxes(const SynthConfig& c) {
  // Smallest n with n^3 >= R cells; one box per cell, one-voxel margin.
  int n = 1;
  while (n * n * n < c.n_rois) ++n;
  std::vector<RoiBox> boxes;
  for (int i = 0; i < c.n_rois; ++i) {
    const int cell[3] = {i % n, (i / n) % n, i / (n * n)};
    RoiBox box{};
    for (int a = 0; a < 3; ++a) {
      const int64_t size = c.grid[static_cast<std::size_t>(a)] / n;
      box.lo[static_cast<std::size_t>(a)] = cell[a] * size + 1;
      box.hi[static_cast<std::size_t>(a)] = (cell[a] + 1) * size - 1;
    }
    boxes.push_back(box);
  }
  return boxes;
}

}  // namespace

const char* to_string(Placement p) {
  switch (p) {
    case Placement::kGradientOnly: return "gradient_only";
    case Placement::kMeanOnly: return "mean_only";
    case Placement::kMixed: return "mixed";
  }
  return "?";
}

Placement parse_placement(const std::string& s) {
  if (s == "gradient_only") return Placement::kGradientOnly;
  if (s == "mean_only") return Placement::kMeanOnly;
  if (s == "mixed") return Placement::kMixed;
  throw ConfigError("unknown placement '" + s +
                    "' (expected gradient_only, mean_only or mixed)");
}

void SynthConfig::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (grid[static_cast<std::size_t>(a)] < 1) {
      throw ConfigError("grid dimensions must be positive");
    }
  }
  if (n_rois < 1) throw ConfigError("n_rois must be >= 1");
  if (n_conditions < 1) throw ConfigError("n_conditions must be >= 1");
  if (subjects < 1 || runs_per_subject < 1) {
    throw ConfigError("subjects and runs per subject must be >= 1");
  }
  if (events_per_run < 1) throw ConfigError("events per run must be >= 1");
  if (!(tr_seconds > 0.0)) throw ConfigError("TR must be positive");
  if (!(sigma > 0.0)) throw ConfigError("noise sigma must be positive");
  if (gradient < 0.0 || mean < 0.0) {
    throw ConfigError("signal amplitudes must be non-negative");
  }
  if (placement == Placement::kMeanOnly && gradient != 0.0) {
    throw ConfigError("mean_only placement requires gradient amplitude 0");
  }
  if (placement == Placement::kGradientOnly && mean != 0.0) {
    throw ConfigError("gradient_only placement requires mean amplitude 0");
  }
  if (window < 1 || window % 2 == 0) throw ConfigError("window must be odd");
  if (event_trs < 1 || rest_trs < 0 || lead_trs < 0) {
    throw ConfigError("event timing must be non-negative");
  }
  if (event_trs + rest_trs < window) {
    throw ConfigError("event spacing must be at least the window length");
  }
  int n = 1;
  while (n * n * n < n_rois) ++n;
  for (int a = 0; a < 3; ++a) {
    if (grid[static_cast<std::size_t>(a)] / n < 4) {
      throw ConfigError("grid too small for " + std::to_string(n_rois) +
                        " ROI boxes with margins");
    }
  }
  const int64_t needed = static_cast<int64_t>(lead_trs) * 2 +
                         static_cast<int64_t>(events_per_run) * (event_trs + rest_trs);
  if (run_trs != 0 && run_trs < needed) {
    throw ConfigError("run of " + std::to_string(run_trs) + " TRs cannot hold " +
                      std::to_string(events_per_run) + " events (needs " +
                      std::to_string(needed) + ")");
  }
  if (trs_per_run() > 32767) throw ConfigError("run longer than 32767 TRs");
}

int64_t SynthConfig::trs_per_run() const {
  if (run_trs != 0) return run_trs;
  return static_cast<int64_t>(lead_trs) * 2 +
         static_cast<int64_t>(events_per_run) * (event_trs + rest_trs);
}

PlantedSignal planted_signal(int roi, int condition) {
  PlantedSignal s;
  const int orientation = (roi + condition) % 6;
  s.ramp_axis = orientation / 2;
  s.ramp_sign = orientation % 2 == 0 ? 1 : -1;
  const uint64_t h = mix64((static_cast<uint64_t>(roi) << 32) ^
                           static_cast<uint64_t>(condition) ^ 0x5EEDULL);
  s.offset_sign = static_cast<int>(h % 3) - 1;
  return s;
}

SynthGenerator::SynthGenerator(SynthConfig config) : config_(std::move(config)) {
  config_.validate();
  boxes_ = layout_boxes(config_);
  const auto& g = config_.grid;
  std::vector<int32_t> labels(static_cast<std::size_t>(g[0] * g[1] * g[2]), 0);
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const RoiBox& b = boxes_[i];
    for (int64_t z = b.lo[2]; z < b.hi[2]; ++z) {
      for (int64_t y = b.lo[1]; y < b.hi[1]; ++y) {
        for (int64_t x = b.lo[0]; x < b.hi[0]; ++x) {
          labels[static_cast<std::size_t>(x + g[0] * (y + g[1] * z))] =
              static_cast<int32_t>(i + 1);
        }
      }
    }
  }
  atlas_ = make_atlas(VolumeHeader::make_3d(g[0], g[1], g[2], DataType::kInt16),
                      std::move(labels));
}

std::vector<int> SynthGenerator::conditions_for_run(int k) const {
  std::vector<int> conds;
  for (int e = 0; e < config_.events_per_run; ++e) {
    conds.push_back(e % config_.n_conditions);
  }
  std::mt19937_64 rng(derive_seed(config_.seed, static_cast<uint64_t>(k), 1));
  std::shuffle(conds.begin(), conds.end(), rng);
  return conds;
}

EventTable SynthGenerator::events(int k) const {
  EventTable t;
  t.n_conditions = config_.n_conditions;
  const auto conds = conditions_for_run(k);
  const int period = config_.event_trs + config_.rest_trs;
  for (int e = 0; e < config_.events_per_run; ++e) {
    Event ev;
    ev.condition = conds[static_cast<std::size_t>(e)];
    ev.onset = static_cast<double>(config_.lead_trs + e * period) * config_.tr_seconds;
    ev.duration = static_cast<double>(config_.event_trs) * config_.tr_seconds;
    t.events.push_back(ev);
  }
  return t;
}

SynthRun SynthGenerator::run(int k) const {
  if (k < 0 || k >= n_runs()) throw ConfigError("run index out of range");
  const auto& g = config_.grid;
  const int64_t nvox = g[0] * g[1] * g[2];
  const int64_t nt = config_.trs_per_run();

  SynthRun run;
  char buf[32];
  std::snprintf(buf, sizeof buf, "sub-%02d", k / config_.runs_per_subject + 1);
  run.subject_id = buf;
  std::snprintf(buf, sizeof buf, "run-%02d", k % config_.runs_per_subject + 1);
  run.run_id = buf;
  run.events = events(k);

  std::vector<double> data(static_cast<std::size_t>(nvox * nt));
  std::mt19937_64 rng(derive_seed(config_.seed, static_cast<uint64_t>(k), 0));
  std::normal_distribution<double> noise(0.0, config_.sigma);
  for (double& v : data) v = noise(rng);

  // Condition active at each TR, -1 during rest.
  std::vector<int> active(static_cast<std::size_t>(nt), -1);
  const int period = config_.event_trs + config_.rest_trs;
  for (int e = 0; e < config_.events_per_run; ++e) {
    const int64_t onset = config_.lead_trs + static_cast<int64_t>(e) * period;
    const int cond = run.events.events[static_cast<std::size_t>(e)].condition;
    run.truth.push_back({cond, onset, config_.event_trs});
    for (int64_t t = onset; t < onset + config_.event_trs; ++t) {
      active[static_cast<std::size_t>(t)] = cond;
    }
  }

  const bool ramps = config_.placement != Placement::kMeanOnly;
  const bool offsets = config_.placement != Placement::kGradientOnly;
  for (int64_t t = 0; t < nt; ++t) {
    const int cond = active[static_cast<std::size_t>(t)];
    if (cond < 0) continue;
    double* frame = data.data() + t * nvox;
    for (int r = 0; r < config_.n_rois; ++r) {
      const RoiBox& b = boxes_[static_cast<std::size_t>(r)];
      const PlantedSignal s = planted_signal(r, cond);
      const double centre = static_cast<double>(b.extent(s.ramp_axis) - 1) / 2.0;
      const double offset = offsets ? config_.mean * s.offset_sign : 0.0;
      for (int64_t z = b.lo[2]; z < b.hi[2]; ++z) {
        for (int64_t y = b.lo[1]; y < b.hi[1]; ++y) {
          for (int64_t x = b.lo[0]; x < b.hi[0]; ++x) {
            const int64_t pos[3] = {x - b.lo[0], y - b.lo[1], z - b.lo[2]};
            double v = offset;
            if (ramps) {
              v += s.ramp_sign * config_.gradient *
                   (static_cast<double>(pos[s.ramp_axis]) - centre);
            }
            frame[x + g[0] * (y + g[1] * z)] += v;
          }
        }
      }
    }
  }
  // Stored as float32 so that a written and re-read run is bit-identical.
  for (double& v : data) v = static_cast<float>(v);

  run.fmri = make_fmri(VolumeHeader::make_4d(g[0], g[1], g[2], nt,
                                             config_.tr_seconds, DataType::kFloat32),
                       std::move(data));
  return run;
}

SynthDataset generate(const SynthConfig& config) {
  SynthGenerator gen(config);
  SynthDataset ds;
  ds.config = gen.config();
  ds.atlas = gen.atlas();
  ds.boxes = gen.boxes();
  for (int k = 0; k < gen.n_runs(); ++k) ds.runs.push_back(gen.run(k));
  return ds;
}

std::string ground_truth_digest(const SynthGenerator& gen) {
  uint64_t h = mix64(gen.config().seed);
  for (int k = 0; k < gen.n_runs(); ++k) {
    for (const Event& e : gen.events(k).events) {
      h = mix64(h ^ static_cast<uint64_t>(e.condition));
      h = mix64(h ^ static_cast<uint64_t>(std::llround(e.onset * 1000.0)));
    }
  }
  for (int r = 0; r < gen.config().n_rois; ++r) {
    for (int c = 0; c < gen.config().n_conditions; ++c) {
      const PlantedSignal s = planted_signal(r, c);
      h = mix64(h ^ static_cast<uint64_t>(s.ramp_axis * 9 + (s.ramp_sign + 1) * 3 +
                                          (s.offset_sign + 1)));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace awats
