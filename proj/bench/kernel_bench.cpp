// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "awats/kernels.hpp"
#include "awats/parcellation.hpp"
#include "awats/synth.hpp"

namespace {

using namespace awats;

struct Fixture {
  Fixture() {
    SynthConfig c;
    c.subjects = 1;
    c.runs_per_subject = 1;
    c.events_per_run = 8;
    SynthGenerator gen(c);
    run = gen.run(0);
    rois = build_roi_index(gen.atlas());

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    points.resize(2000 * 120);
    for (double& p : points) p = g(rng);
    labels.resize(2000);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  }
  SynthRun run;
  std::vector<RoiIndex> rois;
  std::vector<double> points;
  std::vector<int> labels;
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <auto Kernel>
void ats(benchmark::State& state) {
  const Fixture& f = fixture();
  kernels::set_num_threads(static_cast<int>(state.range(0)));
  SeriesMatrix out;
  for (auto _ : state) {
    Kernel(f.run.fmri, f.rois, out);
    benchmark::DoNotOptimize(out.values.data());
  }
}

template <auto Kernel>
void repr(benchmark::State& state) {
  const Fixture& f = fixture();
  kernels::set_num_threads(static_cast<int>(state.range(0)));
  ReprTensor out;
  out.q = kDefaultResampleSize;
  for (auto _ : state) {
    Kernel(f.run.fmri, f.rois, out);
    benchmark::DoNotOptimize(out.values.data());
  }
}

template <auto Kernel>
void pairs(benchmark::State& state) {
  const Fixture& f = fixture();
  kernels::set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Kernel(f.points, 120, f.labels));
  }
}

}  // namespace

BENCHMARK(ats<awats::kernels::serial::extract_ats>)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(ats<awats::kernels::omp::extract_ats>)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(repr<awats::kernels::serial::build_repr>)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(repr<awats::kernels::omp::build_repr>)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(pairs<awats::kernels::serial::pair_distances>)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(pairs<awats::kernels::omp::pair_distances>)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
