// Microbenchmarks for the hot paths: leaf evidence, the shared bottom-up
// dynamic program versus one pass per object model, the full detection
// pipeline in each mode, scene sampling, and regime dictionary construction.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/generative.hpp"
#include "partshare/inference.hpp"
#include "partshare/lattice.hpp"
#include "partshare/rng.hpp"

namespace {

using namespace partshare;

constexpr int kLevels = 3;
constexpr int kFanOut = 2;
constexpr int kConfigs = 2;

struct Fixture {
  HierarchicalDictionary dict;
  LatticeHierarchy lat;
  FeatureImage image;
};

// Growth-regime dictionary (|M_h| doubles per level, parts heavily shared)
// over a 1-D lattice of `cols` base cells, plus a random test image.
Fixture make_fixture(std::int64_t cols) {
  Fixture f{build_regime_dictionary(RegimeSpec::growth(1), GridKind::OneD, 2,
                                    kLevels, kFanOut, kConfigs, 7),
            LatticeHierarchy::build(Extent::line(cols), Rational{1, 2}, kLevels),
            {}};
  f.image.rows = 1;
  f.image.cols = cols;
  f.image.alphabet_size = f.dict.alphabet_size();
  f.image.symbols.resize(static_cast<std::size_t>(cols));
  Rng rng(11);
  for (int& s : f.image.symbols)
    s = static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(f.dict.alphabet_size())));
  return f;
}

void BM_LeafEvidence(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  for (auto _ : state) {
    UnaryTable u = leaf_evidence(f.image, f.dict, f.lat);
    benchmark::DoNotOptimize(u);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LeafEvidence)->Arg(64)->Arg(256)->Arg(1024);

// One pass over the full dictionary: every part type scored once per cell
// no matter how many parents reference it.
void BM_BottomUpShared(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  const UnaryTable unaries = leaf_evidence(f.image, f.dict, f.lat);
  std::int64_t evals = 0;
  for (auto _ : state) {
    OpCounter counter(f.dict.levels());
    EvidenceTable table =
        bottom_up(unaries, f.dict, f.lat, Scope::full_dictionary(), counter);
    benchmark::DoNotOptimize(table);
    evals = counter.total_config_evaluations();
  }
  state.counters["config_evals"] = static_cast<double>(evals);
}
BENCHMARK(BM_BottomUpShared)->Arg(64)->Arg(256)->Arg(1024);

// The same tables rebuilt separately for every object model: what inference
// costs when no intermediate results are reused.
void BM_BottomUpPerObject(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  const UnaryTable unaries = leaf_evidence(f.image, f.dict, f.lat);
  const int num_objects = f.dict.level_size(f.dict.levels());
  std::int64_t evals = 0;
  for (auto _ : state) {
    OpCounter counter(f.dict.levels());
    for (int obj = 0; obj < num_objects; ++obj) {
      EvidenceTable table =
          bottom_up(unaries, f.dict, f.lat, Scope::single_model(obj), counter);
      benchmark::DoNotOptimize(table);
    }
    evals = counter.total_config_evaluations();
  }
  state.counters["config_evals"] = static_cast<double>(evals);
}
BENCHMARK(BM_BottomUpPerObject)->Arg(64)->Arg(256)->Arg(1024);

void detect_pipeline(benchmark::State& state, DetectMode mode) {
  const Fixture f = make_fixture(state.range(0));
  for (auto _ : state) {
    DetectResult result = detect_all(f.image, f.dict, f.lat, 0.0, mode);
    benchmark::DoNotOptimize(result);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DetectSerialShared(benchmark::State& state) {
  detect_pipeline(state, DetectMode::SerialShared);
}
void BM_DetectSerialUnshared(benchmark::State& state) {
  detect_pipeline(state, DetectMode::SerialUnshared);
}
void BM_DetectParallelSim(benchmark::State& state) {
  detect_pipeline(state, DetectMode::ParallelSim);
}
BENCHMARK(BM_DetectSerialShared)->Arg(256)->Arg(1024);
BENCHMARK(BM_DetectSerialUnshared)->Arg(256)->Arg(1024);
BENCHMARK(BM_DetectParallelSim)->Arg(256)->Arg(1024);

// Top-down sampling of a one-object scene, including rendering.
void BM_SampleScene(benchmark::State& state) {
  const HierarchicalDictionary dict = build_regime_dictionary(
      RegimeSpec::decrease(), GridKind::OneD, 2, kLevels, kFanOut, 1, 2);
  const LatticeHierarchy lat =
      LatticeHierarchy::build(Extent::line(16), Rational{1, 2}, kLevels);
  for (auto _ : state) {
    Scene scene = sample_scene(dict, lat, {0}, 1);
    benchmark::DoNotOptimize(scene);
  }
}
BENCHMARK(BM_SampleScene);

void BM_BuildRegimeDictionary(benchmark::State& state) {
  const int levels = static_cast<int>(state.range(0));
  for (auto _ : state) {
    HierarchicalDictionary dict = build_regime_dictionary(
        RegimeSpec::growth(1), GridKind::OneD, 2, levels, kFanOut, kConfigs, 7);
    benchmark::DoNotOptimize(dict);
  }
}
BENCHMARK(BM_BuildRegimeDictionary)->Arg(3)->Arg(5)->Arg(7);

}  // namespace

BENCHMARK_MAIN();
