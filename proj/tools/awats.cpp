// awats: synthesize data, extract regional series, train and evaluate
// decoders, attribute predictions to ROIs, and embed window features.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "awats/dataset.hpp"
#include "awats/errors.hpp"
#include "awats/evaluation.hpp"
#include "awats/interpret.hpp"
#include "awats/kernels.hpp"
#include "awats/manifest.hpp"
#include "awats/neural/checkpoint.hpp"
#include "awats/neural/train.hpp"
#include "awats/seed.hpp"
#include "awats/synth.hpp"

namespace fs = std::filesystem;
using namespace awats;

namespace {

struct Common {
  uint64_t seed = 0;
  int threads = 0;
};

struct DataFlags {
  std::string dir;
  int window = kDefaultWindow;
  int q = kDefaultResampleSize;
  double tr = 0.0;
  int conditions = 0;
};

struct SplitFlags {
  std::string unit = "sample";
  int repetitions = 10;
};

struct NetFlags {
  int epochs = 100;
  int batch = 128;
  double lr = 1e-4;
  int width = 128;
  bool per_roi_extractor = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.dir, "Dataset directory (atlas + dataset.csv)")->required();
  cmd->add_option("--window", d.window, "Window length in TRs (odd)");
  cmd->add_option("--q", d.q, "Resampling size (2..64)");
  cmd->add_option("--tr", d.tr, "TR in seconds; overrides the volume header");
  cmd->add_option("--conditions", d.conditions, "Number of conditions (0 = infer)");
}

void add_net_flags(CLI::App* cmd, NetFlags& n) {
  cmd->add_option("--epochs", n.epochs, "Training epochs");
  cmd->add_option("--batch", n.batch, "Mini-batch size");
  cmd->add_option("--lr", n.lr, "Adam learning rate");
  cmd->add_option("--width", n.width, "Extractor, conv and LSTM width");
  cmd->add_flag("--per-roi-extractor", n.per_roi_extractor,
                "One extractor per ROI instead of a shared one");
}

void check_q(int q) {
  if (q < 2 || q > 64) throw ConfigError("--q must lie in 2..64");
}

nn::InputMode parse_mode(const std::string& s) {
  if (s == "awats") return nn::InputMode::kAwats;
  if (s == "ats") return nn::InputMode::kAts;
  throw ConfigError("unknown mode '" + s + "' (expected awats or ats)");
}

WindowDataset load(const DataFlags& d, FeatureKind kind) {
  check_q(d.q);
  WindowOptions opt;
  opt.kind = kind;
  opt.window = d.window;
  opt.q = d.q;
  opt.tr_override = d.tr;
  WindowDataset ds = load_windows(read_dataset_index(d.dir), opt, d.conditions);
  if (ds.samples.empty()) throw ValidationError("no windows fit inside the runs");
  std::cerr << "loaded " << ds.samples.size() << " windows, " << ds.n_rois << " ROIs, "
            << ds.n_conditions << " conditions";
  if (ds.dropped > 0) std::cerr << " (" << ds.dropped << " events dropped at run edges)";
  std::cerr << '\n';
  return ds;
}

void record_inputs(RunManifest& m, const DataFlags& d) {
  const DatasetIndex index = read_dataset_index(d.dir);
  m.add_input(index.atlas);
  m.add_input(fs::path(d.dir) / "dataset.csv");
  for (const RunEntry& e : index.runs) {
    m.add_input(e.fmri);
    m.add_input(e.events);
  }
}

void echo_data(RunManifest& m, const DataFlags& d) {
  m.config()["data"] = d.dir;
  m.config()["window"] = d.window;
  m.config()["q"] = d.q;
  m.config()["tr"] = d.tr;
  m.config()["conditions"] = d.conditions;
}

void echo_net(RunManifest& m, const NetFlags& n) {
  m.config()["epochs"] = n.epochs;
  m.config()["batch"] = n.batch;
  m.config()["lr"] = n.lr;
  m.config()["width"] = n.width;
  m.config()["per_roi_extractor"] = n.per_roi_extractor;
}

std::vector<int> labels_of(const WindowDataset& ds) {
  std::vector<int> l;
  for (const WindowSample& s : ds.samples) l.push_back(s.label);
  return l;
}

std::vector<std::string> subjects_of(const WindowDataset& ds) {
  std::vector<std::string> s;
  for (const WindowSample& w : ds.samples) s.push_back(w.subject_id);
  return s;
}

std::vector<Split> splits_for(const WindowDataset& ds, const SplitFlags& f, uint64_t seed) {
  SplitPlan plan;
  plan.unit = parse_split_unit(f.unit);
  plan.repetitions = f.repetitions;
  plan.seed = derive_seed(seed, "split");
  const auto labels = labels_of(ds);
  const auto subjects = subjects_of(ds);
  return make_splits(labels, subjects, plan);
}

nn::ModelConfig model_config(const WindowDataset& ds, nn::InputMode mode, const NetFlags& n) {
  nn::ModelConfig c = nn::model_config_for(ds.samples, ds.n_conditions);
  if (c.mode != mode) throw ConfigError("feature layout does not match the mode");
  c.extractor_hidden = c.conv_filters = c.lstm_hidden = n.width;
  c.per_roi_extractor = n.per_roi_extractor;
  return c;
}

nn::TrainConfig train_config(const NetFlags& n, uint64_t seed) {
  nn::TrainConfig t;
  t.epochs = n.epochs;
  t.batch_size = n.batch;
  t.learning_rate = n.lr;
  t.seed = seed;
  return t;
}

FeatureKind features_for(nn::InputMode mode) {
  return mode == nn::InputMode::kAwats ? FeatureKind::kRepr : FeatureKind::kAts;
}

// ---------------------------------------------------------------------------

struct SynthFlags {
  std::string out;
  std::vector<int64_t> grid{24, 24, 24};
  SynthConfig config;
  std::string placement = "gradient_only";
  bool gzip = false;
};

int cmd_synth(SynthFlags& f, const Common& common) {
  RunManifest m("synth");
  SynthConfig& c = f.config;
  if (f.grid.size() != 3) throw ConfigError("--grid needs three sizes, e.g. 24,24,24");
  for (int a = 0; a < 3; ++a) c.grid[static_cast<std::size_t>(a)] = f.grid[static_cast<std::size_t>(a)];
  c.placement = parse_placement(f.placement);
  c.seed = common.seed;
  SynthGenerator gen(c);
  m.set_seed(c.seed);
  auto& j = m.config();
  j["grid"] = f.grid;
  j["rois"] = c.n_rois;
  j["conditions"] = c.n_conditions;
  j["subjects"] = c.subjects;
  j["runs_per_subject"] = c.runs_per_subject;
  j["events_per_run"] = c.events_per_run;
  j["tr"] = c.tr_seconds;
  j["placement"] = to_string(c.placement);
  j["gradient"] = c.gradient;
  j["mean"] = c.mean;
  j["sigma"] = c.sigma;
  j["window"] = c.window;
  j["event_trs"] = c.event_trs;
  j["rest_trs"] = c.rest_trs;
  j["lead_trs"] = c.lead_trs;
  j["trs_per_run"] = c.trs_per_run();
  for (const fs::path& p : write_synth_dataset(gen, f.out, f.gzip)) m.add_output(p);
  m.extra()["ground_truth_digest"] = ground_truth_digest(gen);
  m.write(fs::path(f.out) / "manifest.json");
  std::cerr << "wrote " << gen.n_runs() << " runs to " << f.out << '\n';
  return 0;
}

struct ExtractFlags {
  std::string fmri, atlas, mode = "ats", out;
  int q = kDefaultResampleSize;
};

int cmd_extract(const ExtractFlags& f, const Common& common) {
  RunManifest m("extract");
  m.set_seed(common.seed);
  check_q(f.q);
  const FeatureKind kind = parse_feature_kind(f.mode);
  m.config()["mode"] = f.mode;
  m.config()["q"] = f.q;
  m.add_input(f.fmri);
  m.add_input(f.atlas);
  const Fmri4D fmri = read_fmri(f.fmri);
  const AtlasVolume atlas = read_atlas(f.atlas);
  const std::vector<RoiIndex> rois = build_roi_index(atlas);
  check_grid(fmri, rois);
  switch (kind) {
    case FeatureKind::kAts:
      write_series_csv(extract_ats(fmri, rois), f.out);
      break;
    case FeatureKind::kRepr:
      write_repr_cache(build_repr_tensor(fmri, rois, f.q), f.out);
      break;
    case FeatureKind::kAwatsPca:
      write_series_csv(extract_awats_pca(build_repr_tensor(fmri, rois, f.q)), f.out);
      break;
  }
  m.add_output(f.out);
  m.write(f.out + ".manifest.json");
  return 0;
}

struct TrainFlags {
  DataFlags data;
  NetFlags net;
  SplitFlags split;
  std::string mode = "awats", out;
  int repetition = 0;
};

int cmd_train(TrainFlags& f, const Common& common) {
  RunManifest m("train");
  m.set_seed(common.seed);
  const nn::InputMode mode = parse_mode(f.mode);
  echo_data(m, f.data);
  echo_net(m, f.net);
  m.config()["mode"] = f.mode;
  m.config()["split_unit"] = f.split.unit;
  m.config()["repetition"] = f.repetition;
  if (f.repetition < 0) throw ConfigError("--repetition must be >= 0");
  record_inputs(m, f.data);
  const WindowDataset ds = load(f.data, features_for(mode));
  SplitFlags sf = f.split;
  sf.repetitions = f.repetition + 1;
  const Split split = splits_for(ds, sf, common.seed)[static_cast<std::size_t>(f.repetition)];

  fs::create_directories(f.out);
  const nn::ModelConfig mc = model_config(ds, mode, f.net);
  const nn::TrainResult result = nn::train(
      mc, train_config(f.net, derive_seed(common.seed, static_cast<uint64_t>(f.repetition), 7)),
      ds.samples, split.train, split.val, [](const nn::EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " acc "
                  << e.train_acc << " val " << e.val_acc << '\n';
      });
  nn::Model<float> model = result.model;
  const fs::path out(f.out);
  nn::save_checkpoint(model, out / "model.awnn");
  nn::write_curve_csv(result.curve, out / "curve.csv");
  const auto pred = nn::predict(model, ds.samples, split.test);
  std::vector<int> truth;
  for (int i : split.test) truth.push_back(ds.samples[static_cast<std::size_t>(i)].label);
  write_metrics_csv({{f.repetition, compute_metrics(pred, truth, ds.n_conditions)}},
                    out / "metrics.csv");
  for (const char* name : {"model.awnn", "curve.csv", "metrics.csv"}) m.add_output(out / name);
  m.extra()["best_epoch"] = result.best_epoch;
  m.extra()["best_val_acc"] = result.best_val_acc;
  m.write(out / "manifest.json");
  return 0;
}

struct EvalFlags {
  DataFlags data;
  NetFlags net;
  SplitFlags split;
  std::string mode = "both", out;
};

int cmd_eval(EvalFlags& f, const Common& common) {
  RunManifest m("eval");
  m.set_seed(common.seed);
  echo_data(m, f.data);
  echo_net(m, f.net);
  m.config()["mode"] = f.mode;
  m.config()["split_unit"] = f.split.unit;
  m.config()["repetitions"] = f.split.repetitions;
  std::vector<nn::InputMode> modes;
  if (f.mode == "both") {
    modes = {nn::InputMode::kAwats, nn::InputMode::kAts};
  } else {
    modes = {parse_mode(f.mode)};
  }
  record_inputs(m, f.data);
  fs::create_directories(f.out);
  const fs::path out(f.out);

  std::vector<std::vector<double>> accuracies;
  for (nn::InputMode mode : modes) {
    const WindowDataset ds = load(f.data, features_for(mode));
    // Splits depend only on labels and subjects, so both modes share them.
    const std::vector<Split> splits = splits_for(ds, f.split, common.seed);
    const nn::ModelConfig mc = model_config(ds, mode, f.net);
    std::vector<RepetitionRow> rows;
    std::vector<double> acc;
    for (std::size_t r = 0; r < splits.size(); ++r) {
      const nn::TrainResult result = nn::train(
          mc, train_config(f.net, derive_seed(common.seed, r, 7)), ds.samples,
          splits[r].train, splits[r].val);
      nn::Model<float> model = result.model;
      const auto pred = nn::predict(model, ds.samples, splits[r].test);
      std::vector<int> truth;
      for (int i : splits[r].test) truth.push_back(ds.samples[static_cast<std::size_t>(i)].label);
      rows.push_back({static_cast<int>(r), compute_metrics(pred, truth, ds.n_conditions)});
      acc.push_back(rows.back().metrics.accuracy);
      std::cerr << to_string(mode) << " repetition " << r << " accuracy "
                << rows.back().metrics.accuracy << '\n';
    }
    const fs::path path = out / (std::string("metrics_") + to_string(mode) + ".csv");
    write_metrics_csv(rows, path);
    m.add_output(path);
    accuracies.push_back(std::move(acc));
  }
  if (accuracies.size() == 2 && accuracies[0].size() >= 2) {
    const TTestResult t = welch_ttest(accuracies[0], accuracies[1]);
    std::ofstream tt(out / "ttest.csv");
    tt.precision(10);
    tt << "metric,t,df,p\naccuracy," << t.t << ',' << t.df << ',' << t.p << '\n';
    m.add_output(out / "ttest.csv");
    std::cerr << "Welch t " << t.t << " df " << t.df << " p " << t.p << '\n';
  }
  m.write(out / "manifest.json");
  return 0;
}

struct ShapleyFlags {
  DataFlags data;
  SplitFlags split;
  std::string checkpoint, out, baseline = "dataset_mean", method = "auto",
                               subset = "test", networks;
  int sims = kDefaultSimulations;
  int repetition = 0;
  int max_samples = 0;
};

int cmd_shapley(ShapleyFlags& f, const Common& common) {
  RunManifest m("shapley");
  m.set_seed(common.seed);
  ShapleyConfig sc;
  sc.n_sims = f.sims;
  sc.baseline = parse_baseline(f.baseline);
  sc.method = parse_shapley_method(f.method);
  sc.seed = derive_seed(common.seed, "shapley");
  sc.validate();
  if (f.subset != "test" && f.subset != "all") {
    throw ConfigError("--subset must be test or all");
  }
  nn::Model<float> model = nn::load_checkpoint(f.checkpoint);
  f.data.window = model.config().window;
  f.data.q = model.config().q;
  echo_data(m, f.data);
  m.config()["sims"] = f.sims;
  m.config()["baseline"] = f.baseline;
  m.config()["method"] = f.method;
  m.config()["subset"] = f.subset;
  m.config()["max_samples"] = f.max_samples;
  m.add_input(f.checkpoint);
  record_inputs(m, f.data);
  if (!f.networks.empty()) m.add_input(f.networks);

  const WindowDataset ds = load(f.data, features_for(model.config().mode));
  if (ds.n_rois != model.config().n_rois) {
    throw DimensionError("checkpoint expects " + std::to_string(model.config().n_rois) +
                         " ROIs, data has " + std::to_string(ds.n_rois));
  }
  std::vector<int> idx;
  if (f.subset == "test") {
    SplitFlags sf = f.split;
    sf.repetitions = f.repetition + 1;
    idx = splits_for(ds, sf, common.seed)[static_cast<std::size_t>(f.repetition)].test;
  } else {
    idx.resize(ds.samples.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  if (f.max_samples > 0 && static_cast<int>(idx.size()) > f.max_samples) {
    idx.resize(static_cast<std::size_t>(f.max_samples));
  }
  const ContributionMap map = shapley_contributions(model, ds.samples, idx, sc);
  fs::create_directories(f.out);
  const fs::path out(f.out);
  write_contributions_csv(map, out / "contributions.csv");
  write_roi_values_csv(map, out / "roi_values.csv");
  m.add_output(out / "contributions.csv");
  m.add_output(out / "roi_values.csv");
  if (!f.networks.empty()) {
    const NetworkMap nets = read_network_map(f.networks, map.n_rois);
    write_network_csv(network_aggregate(map, nets), map.n_classes, nets, out / "networks.csv");
    m.add_output(out / "networks.csv");
  }
  m.extra()["exact"] = map.exact;
  m.extra()["samples"] = idx.size();
  m.write(out / "manifest.json");
  return 0;
}

struct LogisticFlags {
  DataFlags data;
  std::string out, networks;
  double l2 = 0.01;
};

int cmd_logistic(LogisticFlags& f, const Common& common) {
  RunManifest m("logistic");
  m.set_seed(common.seed);
  echo_data(m, f.data);
  m.config()["l2"] = f.l2;
  record_inputs(m, f.data);
  const WindowDataset ds = load(f.data, FeatureKind::kAts);
  std::vector<int> idx(ds.samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  LogisticConfig lc;
  lc.l2 = f.l2;
  LogisticFit fit;
  const ContributionMap map = logistic_contributions(ds.samples, idx, ds.n_conditions, lc, &fit);
  if (!fit.converged) {
    std::cerr << "warning: logistic regression stopped after " << fit.iterations
              << " iterations with gradient norm " << fit.grad_norm << '\n';
  }
  fs::create_directories(f.out);
  const fs::path out(f.out);
  write_contributions_csv(map, out / "contributions.csv");
  m.add_output(out / "contributions.csv");
  if (!f.networks.empty()) {
    m.add_input(f.networks);
    const NetworkMap nets = read_network_map(f.networks, map.n_rois);
    write_network_csv(network_aggregate(map, nets), map.n_classes, nets, out / "networks.csv");
    m.add_output(out / "networks.csv");
  }
  m.extra()["converged"] = fit.converged;
  m.extra()["grad_norm"] = fit.grad_norm;
  m.write(out / "manifest.json");
  return 0;
}

struct EmbedFlags {
  DataFlags data;
  std::string features = "ats", checkpoint, out;
};

int cmd_embed(EmbedFlags& f, const Common& common) {
  RunManifest m("embed");
  m.set_seed(common.seed);
  m.config()["features"] = f.features;
  std::vector<double> points;
  WindowDataset ds;
  int dim = 0;
  if (f.features == "awats-nn") {
    if (f.checkpoint.empty()) throw ConfigError("awats-nn features need --checkpoint");
    nn::Model<float> model = nn::load_checkpoint(f.checkpoint);
    if (model.config().mode != nn::InputMode::kAwats) {
      throw ConfigError("awats-nn features need an AWATS checkpoint");
    }
    f.data.window = model.config().window;
    f.data.q = model.config().q;
    m.add_input(f.checkpoint);
    ds = load(f.data, FeatureKind::kRepr);
    std::vector<int> idx(ds.samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    points = nn::series_features(model, ds.samples, idx);
    dim = model.config().n_rois * model.config().window;
  } else {
    const FeatureKind kind = parse_feature_kind(f.features);
    if (kind == FeatureKind::kRepr) {
      throw ConfigError("embed takes ats, pca or awats-nn features");
    }
    ds = load(f.data, kind);
    for (const WindowSample& s : ds.samples) {
      points.insert(points.end(), s.features.begin(), s.features.end());
    }
    dim = ds.n_rois * f.data.window;
  }
  echo_data(m, f.data);
  record_inputs(m, f.data);
  const auto labels = labels_of(ds);
  const auto subjects = subjects_of(ds);
  const auto n = static_cast<int64_t>(labels.size());
  const Embedding2d e = pca_embed_2d(points, n, dim);
  std::vector<int> shuffled = labels;
  std::mt19937_64 rng(derive_seed(common.seed, "shuffle-labels"));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const double ratio = separability_ratio(points, dim, labels);
  const double null_ratio = separability_ratio(points, dim, shuffled);
  const double embed_ratio = separability_ratio(e.coords, 2, labels);
  const double embed_null = separability_ratio(e.coords, 2, shuffled);

  fs::create_directories(f.out);
  const fs::path out(f.out);
  write_embedding_csv(e, subjects, labels, out / "embedding.csv");
  std::ofstream sep(out / "separability.csv");
  sep.precision(10);
  sep << "features,space,ratio,shuffled_ratio\n"
      << f.features << ",raw," << ratio << ',' << null_ratio << '\n'
      << f.features << ",embedding," << embed_ratio << ',' << embed_null << '\n';
  sep.close();
  m.add_output(out / "embedding.csv");
  m.add_output(out / "separability.csv");
  m.extra()["degenerate"] = e.degenerate;
  m.write(out / "manifest.json");
  std::cerr << "separability " << ratio << " (shuffled " << null_ratio << "), embedding "
            << embed_ratio << '\n';
  return 0;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (flag < 0) throw ConfigError("--threads must be >= 0");
  if (const char* env = std::getenv("AWATS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("AWATS_THREADS is not a thread count: ") + env);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional fMRI time-series extraction and cognitive-state decoding"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Master random seed");
  app.add_option("--threads", common.threads,
                 "Worker threads (0 = AWATS_THREADS or all cores)");

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--grid", synth.grid, "Grid size X,Y,Z")->delimiter(',');
  s->add_option("--rois", synth.config.n_rois, "Number of ROI boxes");
  s->add_option("--conditions", synth.config.n_conditions, "Number of conditions");
  s->add_option("--subjects", synth.config.subjects, "Subjects");
  s->add_option("--runs", synth.config.runs_per_subject, "Runs per subject");
  s->add_option("--events", synth.config.events_per_run, "Events per run");
  s->add_option("--tr", synth.config.tr_seconds, "TR in seconds");
  s->add_option("--placement", synth.placement, "gradient_only, mean_only or mixed");
  s->add_option("--g", synth.config.gradient, "Ramp slope per voxel");
  s->add_option("--m", synth.config.mean, "Uniform offset magnitude");
  s->add_option("--sigma", synth.config.sigma, "Voxel noise std");
  s->add_option("--window", synth.config.window, "Window length the schedule must fit");
  s->add_option("--event-trs", synth.config.event_trs, "Event duration in TRs");
  s->add_option("--rest-trs", synth.config.rest_trs, "Rest between events in TRs");
  s->add_option("--run-trs", synth.config.run_trs, "Fixed run length (0 = fit events)");
  s->add_flag("--gzip", synth.gzip, "Write .nii.gz volumes");

  ExtractFlags extract;
  auto* x = app.add_subcommand("extract", "Extract regional series or representations");
  x->add_option("--fmri", extract.fmri, "4D volume")->required();
  x->add_option("--atlas", extract.atlas, "Integer label volume")->required();
  x->add_option("--mode", extract.mode, "ats (CSV), repr (AWRT cache) or pca (CSV)");
  x->add_option("--q", extract.q, "Resampling size (2..64)");
  x->add_option("--out", extract.out, "Output file")->required();

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Train one decoder on one split");
  add_data_flags(t, train.data);
  add_net_flags(t, train.net);
  t->add_option("--mode", train.mode, "awats or ats");
  t->add_option("--split-unit", train.split.unit, "sample or subject");
  t->add_option("--repetition", train.repetition, "Which split repetition to use");
  t->add_option("--out", train.out, "Output directory")->required();

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Repeated-split evaluation");
  add_data_flags(e, eval.data);
  add_net_flags(e, eval.net);
  e->add_option("--mode", eval.mode, "awats, ats or both");
  e->add_option("--split-unit", eval.split.unit, "sample or subject");
  e->add_option("--repetitions", eval.split.repetitions, "Number of random splits");
  e->add_option("--out", eval.out, "Output directory")->required();

  ShapleyFlags shap;
  auto* h = app.add_subcommand("shapley", "Shapley attribution over ROIs");
  h->add_option("--data", shap.data.dir, "Dataset directory")->required();
  h->add_option("--tr", shap.data.tr, "TR in seconds; overrides the volume header");
  h->add_option("--conditions", shap.data.conditions, "Number of conditions (0 = infer)");
  h->add_option("--checkpoint", shap.checkpoint, "Trained model")->required();
  h->add_option("--sims", shap.sims, "Permutations per sample");
  h->add_option("--baseline", shap.baseline, "dataset_mean or zeros");
  h->add_option("--method", shap.method, "auto, mc or exact");
  h->add_option("--subset", shap.subset, "test (split of --repetition) or all");
  h->add_option("--split-unit", shap.split.unit, "sample or subject");
  h->add_option("--repetition", shap.repetition, "Split repetition for the test subset");
  h->add_option("--max-samples", shap.max_samples, "Attribute at most this many samples");
  h->add_option("--networks", shap.networks, "CSV roi_id,network_id,name");
  h->add_option("--out", shap.out, "Output directory")->required();

  LogisticFlags logistic;
  auto* l = app.add_subcommand("logistic", "Logistic-regression ROI contributions");
  add_data_flags(l, logistic.data);
  l->add_option("--l2", logistic.l2, "L2 penalty strength");
  l->add_option("--networks", logistic.networks, "CSV roi_id,network_id,name");
  l->add_option("--out", logistic.out, "Output directory")->required();

  EmbedFlags embed;
  auto* b = app.add_subcommand("embed", "2-D PCA embedding and separability");
  add_data_flags(b, embed.data);
  b->add_option("--features", embed.features, "ats, pca or awats-nn");
  b->add_option("--checkpoint", embed.checkpoint, "AWATS model for awats-nn features");
  b->add_option("--out", embed.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return static_cast<int>(ExitCode::kConfig);
  }

  try {
    kernels::set_num_threads(resolve_threads(common.threads));
    if (*s) return cmd_synth(synth, common);
    if (*x) return cmd_extract(extract, common);
    if (*t) return cmd_train(train, common);
    if (*e) return cmd_eval(eval, common);
    if (*h) return cmd_shapley(shap, common);
    if (*l) return cmd_logistic(logistic, common);
    if (*b) return cmd_embed(embed, common);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return static_cast<int>(err.exit_code());
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return static_cast<int>(ExitCode::kValidation);
  }
  return 0;
}
