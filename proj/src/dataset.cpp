#include "awats/dataset.hpp"

#include <algorithm>
#include <climits>
#include <exception>
#include <fstream>
#include <sstream>

#include "awats/errors.hpp"
#include "awats/evaluation.hpp"
#include "awats/resampling.hpp"

namespace awats {

namespace fs = std::filesystem;

DatasetIndex read_dataset_index(const fs::path& dir) {
  DatasetIndex index;
  if (fs::exists(dir / "atlas.nii")) {
    index.atlas = dir / "atlas.nii";
  } else if (fs::exists(dir / "atlas.nii.gz")) {
    index.atlas = dir / "atlas.nii.gz";
  } else {
    throw IoError(dir.string() + ": no atlas.nii or atlas.nii.gz");
  }
  const fs::path csv = dir / "dataset.csv";
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("subject_id", 0) == 0)) continue;
    std::stringstream ss(line);
    RunEntry e;
    std::string fmri, events;
    if (!std::getline(ss, e.subject_id, ',') || !std::getline(ss, e.run_id, ',') ||
        !std::getline(ss, fmri, ',') || !std::getline(ss, events, ',')) {
      throw FormatError(csv.string() + ":" + std::to_string(line_no) +
                        ": expected subject_id,run_id,fmri,events");
    }
    e.fmri = dir / fmri;
    e.events = dir / events;
    index.runs.push_back(std::move(e));
  }
  if (index.runs.empty()) throw ValidationError(csv.string() + " lists no runs");
  return index;
}

std::vector<fs::path> write_synth_dataset(const SynthGenerator& gen, const fs::path& dir,
                                          bool gzip) {
  fs::create_directories(dir);
  const std::string ext = gzip ? ".nii.gz" : ".nii";
  std::vector<fs::path> written;
  write_volume(gen.atlas(), dir / ("atlas" + ext));
  written.push_back(dir / ("atlas" + ext));

  const int n = gen.n_runs();
  std::vector<std::string> rows(static_cast<std::size_t>(n));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      const SynthRun run = gen.run(k);
      const std::string stem = run.subject_id + "_" + run.run_id;
      write_volume(run.fmri, dir / (stem + "_bold" + ext));
      write_events_csv(run.events, dir / (stem + "_events.csv"));
      rows[static_cast<std::size_t>(k)] = run.subject_id + "," + run.run_id + "," + stem +
                                          "_bold" + ext + "," + stem + "_events.csv";
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::ofstream out(dir / "dataset.csv");
  if (!out) throw IoError("cannot write " + (dir / "dataset.csv").string());
  out << "subject_id,run_id,fmri,events\n";
  for (const std::string& r : rows) {
    out << r << '\n';
    const auto first = r.find(',', r.find(',') + 1) + 1;
    const auto second = r.find(',', first);
    written.push_back(dir / r.substr(first, second - first));
    written.push_back(dir / r.substr(second + 1));
  }
  written.push_back(dir / "dataset.csv");
  return written;
}

FeatureKind parse_feature_kind(const std::string& s) {
  if (s == "ats") return FeatureKind::kAts;
  if (s == "repr" || s == "awats") return FeatureKind::kRepr;
  if (s == "pca" || s == "awats-pca") return FeatureKind::kAwatsPca;
  throw ConfigError("unknown feature kind '" + s + "' (expected ats, repr or pca)");
}

WindowCut run_windows(const Fmri4D& fmri, const std::vector<RoiIndex>& rois,
                      const EventTable& events, const WindowOptions& options,
                      const std::string& subject_id, const std::string& run_id) {
  WindowSpec spec;
  spec.window = options.window;
  spec.tr_seconds = options.tr_override > 0.0 ? options.tr_override
                                              : fmri.header.tr_seconds();
  if (!(spec.tr_seconds > 0.0)) {
    throw ValidationError("volume header has no TR; pass one explicitly");
  }
  spec.subject_id = subject_id;
  spec.run_id = run_id;
  switch (options.kind) {
    case FeatureKind::kAts:
      return cut_windows(extract_ats(fmri, rois), events, spec);
    case FeatureKind::kRepr:
      return cut_windows(build_repr_tensor(fmri, rois, options.q), events, spec);
    case FeatureKind::kAwatsPca:
      return cut_windows(extract_awats_pca(build_repr_tensor(fmri, rois, options.q)),
                         events, spec);
  }
  throw ConfigError("bad feature kind");
}

namespace {

WindowDataset concatenate(std::vector<WindowCut>& cuts, int n_conditions, int n_rois) {
  WindowDataset ds;
  ds.n_conditions = n_conditions;
  ds.n_rois = n_rois;
  for (WindowCut& c : cuts) {
    ds.dropped += c.dropped;
    for (WindowSample& s : c.samples) ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

WindowDataset load_windows(const DatasetIndex& index, const WindowOptions& options,
                           int n_conditions) {
  const AtlasVolume atlas = read_atlas(index.atlas);
  const std::vector<RoiIndex> rois = build_roi_index(atlas);

  std::vector<EventTable> tables;
  int inferred = 0;
  for (const RunEntry& e : index.runs) {
    tables.push_back(parse_events(e.events, n_conditions > 0 ? n_conditions : INT_MAX));
    for (const Event& ev : tables.back().events) inferred = std::max(inferred, ev.condition + 1);
  }
  const int c = n_conditions > 0 ? n_conditions : inferred;
  if (c < 1) throw ValidationError("event files contain no events");

  std::vector<WindowCut> cuts;
  for (std::size_t i = 0; i < index.runs.size(); ++i) {
    const RunEntry& e = index.runs[i];
    const Fmri4D fmri = read_fmri(e.fmri);
    tables[i].n_conditions = c;
    cuts.push_back(run_windows(fmri, rois, tables[i], options, e.subject_id, e.run_id));
  }
  return concatenate(cuts, c, static_cast<int>(rois.size()));
}

WindowDataset synth_windows(const SynthGenerator& gen, const WindowOptions& options) {
  const std::vector<RoiIndex> rois = build_roi_index(gen.atlas());
  std::vector<WindowCut> cuts(static_cast<std::size_t>(gen.n_runs()));
  for (int k = 0; k < gen.n_runs(); ++k) {
    const SynthRun run = gen.run(k);
    cuts[static_cast<std::size_t>(k)] =
        run_windows(run.fmri, rois, run.events, options, run.subject_id, run.run_id);
  }
  return concatenate(cuts, gen.config().n_conditions, static_cast<int>(rois.size()));
}

}  // namespace awats
