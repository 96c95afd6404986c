#include "awats/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "awats/errors.hpp"

namespace awats {

namespace {

void check_event(const Event& e, const std::string& where) {
  if (!std::isfinite(e.onset) || e.onset < 0.0) {
    throw ValidationError(where + ": negative or non-finite onset");
  }
  if (!std::isfinite(e.duration) || e.duration <= 0.0) {
    throw ValidationError(where + ": duration must be positive");
  }
}

void sort_events(EventTable& t) {
  std::stable_sort(t.events.begin(), t.events.end(),
                   [](const Event& a, const Event& b) { return a.onset < b.onset; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void check_window(int window) {
  if (window < 1 || window % 2 == 0) {
    throw ConfigError("window length must be an odd positive integer, got " +
                      std::to_string(window));
  }
}

// Validates the table against a run of n_trs TRs and returns the first TR of
// every surviving window (-1 for dropped events).
std::vector<int64_t> window_starts(const EventTable& table, int64_t n_trs,
                                   const WindowSpec& spec, int& dropped) {
  check_window(spec.window);
  if (!(spec.tr_seconds > 0.0)) throw ConfigError("TR must be positive");
  const double run_seconds = static_cast<double>(n_trs) * spec.tr_seconds;
  const int64_t half = (spec.window - 1) / 2;
  std::vector<int64_t> starts;
  dropped = 0;
  for (const Event& e : table.events) {
    if (e.onset + e.duration > run_seconds + 1e-9) {
      throw ValidationError("event at " + std::to_string(e.onset) +
                            " s ends after the run (" +
                            std::to_string(run_seconds) + " s)");
    }
    const int64_t mid = event_mid_tr(e, spec.tr_seconds);
    const int64_t first = mid - half;
    const int64_t last = mid + half;
    if (first < 0 || last > n_trs - 1) {
      ++dropped;
      starts.push_back(-1);
    } else {
      starts.push_back(first);
    }
  }
  return starts;
}

}  // namespace

EventTable parse_events(const std::filesystem::path& path, int n_conditions) {
  if (n_conditions < 1) throw ConfigError("number of conditions must be >= 1");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  EventTable table;
  table.n_conditions = n_conditions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("condition", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Event e;
    std::string extra;
    if (!(row >> e.condition >> e.onset >> e.duration) || (row >> extra)) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected condition,onset,duration");
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    check_event(e, where);
    if (e.condition < 0 || e.condition >= n_conditions) {
      throw ValidationError(where + ": unknown condition id " +
                            std::to_string(e.condition));
    }
    table.events.push_back(e);
  }
  sort_events(table);
  return table;
}

EventTable parse_ev_files(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ConfigError("no EV files given");
  EventTable table;
  table.n_conditions = static_cast<int>(paths.size());
  for (std::size_t c = 0; c < paths.size(); ++c) {
    std::ifstream in(paths[c]);
    if (!in) throw IoError("cannot open " + paths[c].string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream row(line);
      Event e;
      e.condition = static_cast<int>(c);
      double amplitude = 0.0;
      if (!(row >> e.onset >> e.duration)) {
        throw ValidationError(paths[c].string() + ":" + std::to_string(line_no) +
                              ": expected onset duration amplitude");
      }
      row >> amplitude;
      check_event(e, paths[c].string() + ":" + std::to_string(line_no));
      table.events.push_back(e);
    }
  }
  sort_events(table);
  return table;
}

void write_events_csv(const EventTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  out << "condition,onset,duration\n";
  for (const Event& e : table.events) {
    out << e.condition << ',' << e.onset << ',' << e.duration << '\n';
  }
}

int64_t event_mid_tr(const Event& e, double tr_seconds) {
  return static_cast<int64_t>(
      std::floor((e.onset + e.duration / 2.0) / tr_seconds + 0.5));
}

WindowCut cut_windows(const SeriesMatrix& data, const EventTable& events,
                      const WindowSpec& spec) {
  WindowCut cut;
  const auto starts = window_starts(events, data.n_trs, spec, cut.dropped);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i] < 0) continue;
    WindowSample s;
    s.layout = FeatureLayout::kSeries;
    s.n_rois = data.n_rois;
    s.window = spec.window;
    s.label = events.events[i].condition;
    s.subject_id = spec.subject_id;
    s.run_id = spec.run_id;
    s.features.reserve(static_cast<std::size_t>(data.n_rois * spec.window));
    for (int r = 0; r < data.n_rois; ++r) {
      for (int w = 0; w < spec.window; ++w) {
        s.features.push_back(data.at(r, starts[i] + w));
      }
    }
    cut.samples.push_back(std::move(s));
  }
  return cut;
}

WindowCut cut_windows(const ReprTensor& data, const EventTable& events,
                      const WindowSpec& spec) {
  WindowCut cut;
  const auto starts = window_starts(events, data.n_trs, spec, cut.dropped);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i] < 0) continue;
    WindowSample s;
    s.layout = FeatureLayout::kRepr;
    s.n_rois = data.n_rois;
    s.window = spec.window;
    s.repr_width = data.width();
    s.label = events.events[i].condition;
    s.subject_id = spec.subject_id;
    s.run_id = spec.run_id;
    s.features.reserve(static_cast<std::size_t>(data.n_rois * spec.window *
                                                data.width()));
    for (int r = 0; r < data.n_rois; ++r) {
      for (int w = 0; w < spec.window; ++w) {
        const auto v = data.at(r, starts[i] + w);
        s.features.insert(s.features.end(), v.begin(), v.end());
      }
    }
    cut.samples.push_back(std::move(s));
  }
  return cut;
}

}  // namespace awats
