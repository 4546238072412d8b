#include "partshare/verify.hpp"

#include <cmath>
#include <limits>

#include "partshare/complexity.hpp"
#include "partshare/errors.hpp"
#include "partshare/inference.hpp"
#include "partshare/io.hpp"
#include "partshare/oracle.hpp"

namespace partshare {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kScoreTol = 1e-9;

std::string describe(double a, double b) {
  return io::fmt_g17(a) + " vs " + io::fmt_g17(b);
}

bool close_or_both_inf(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= kScoreTol;
}

// One check's pass/fail bookkeeping for one instance.
struct Checker {
  const RandomInstance& inst;
  std::vector<VerifyFailure>& failures;
  std::map<std::string, std::int64_t>* tally;

  void record(const std::string& check, bool passed, const std::string& detail) {
    if (passed) {
      if (tally) ++(*tally)[check];
    } else {
      failures.push_back({inst.seed, check, detail});
    }
  }
};

}  // namespace

RandomInstance make_random_instance(std::uint64_t seed) {
  Rng rng(seed);
  const GridKind kind = rng.next_below(2) == 0 ? GridKind::OneD : GridKind::TwoD;
  const int H = 1 + static_cast<int>(rng.next_below(3));
  const int fan_out = 2;
  const int configs_per_part = 1 + static_cast<int>(rng.next_below(3));
  const std::int64_t k = 2;
  const std::int64_t span = 1 << H;  // k^H divides every axis

  Extent base;
  if (kind == GridKind::OneD) {
    const std::int64_t max_mult = 32 / span;
    base = Extent::line(span * (1 + static_cast<std::int64_t>(rng.next_below(
                                       static_cast<std::uint64_t>(max_mult)))));
  } else {
    const std::int64_t max_mult = 16 / span;
    const std::int64_t rows = span * (1 + static_cast<std::int64_t>(rng.next_below(
                                             static_cast<std::uint64_t>(max_mult))));
    const std::int64_t cols = span * (1 + static_cast<std::int64_t>(rng.next_below(
                                             static_cast<std::uint64_t>(max_mult))));
    base = Extent::grid(rows, cols);
  }
  const Rational q = kind == GridKind::OneD ? Rational(1, k) : Rational(1, k * k);
  LatticeHierarchy lat = LatticeHierarchy::build(base, q, H);

  std::vector<std::int64_t> sizes;
  for (int h = 1; h < H; ++h) sizes.push_back(1 + static_cast<std::int64_t>(rng.next_below(4)));
  sizes.push_back(1 + static_cast<std::int64_t>(rng.next_below(4)));  // |M_H|

  RegimeDictionaryOptions opts;
  opts.num_leaf_types = 2 + static_cast<std::int64_t>(rng.next_below(3));
  opts.alphabet_size = 3 + static_cast<int>(rng.next_below(4));
  HierarchicalDictionary dict = build_regime_dictionary(
      RegimeSpec::user(sizes), kind, k, H, fan_out, configs_per_part, rng.next_u64(), opts);

  const int num_objects_wanted =
      static_cast<int>(rng.next_below(3));  // 0..2 planted objects
  std::vector<int> objects;
  for (int i = 0; i < num_objects_wanted && i < lat.cells(H); ++i)
    objects.push_back(static_cast<int>(rng.next_below(
        static_cast<std::uint64_t>(dict.level_size(H)))));
  const double noise = rng.next_below(2) == 0 ? 0.0 : 0.25;
  const std::uint64_t scene_seed = rng.next_u64();

  // Planted scenes can fail to fit; shrink until they do. An empty scene is
  // a pure background render and always succeeds.
  Scene scene{0, {}, {}};
  for (;;) {
    try {
      scene = sample_scene(dict, lat, objects, scene_seed, noise);
      break;
    } catch (const GenerativeError&) {
      objects.pop_back();
    }
  }

  return RandomInstance{seed, std::move(lat), std::move(dict), std::move(scene.image), -1e17};
}

namespace {

// Same structure, probabilities shuffled: swaps the first two configuration
// log-probs of every composed part and the first two symbol masses of every
// leaf model. Scores computed from it disagree with the original almost
// everywhere — the fault the harness must catch when self-testing.
HierarchicalDictionary swapped_probabilities(const HierarchicalDictionary& dict) {
  HierarchicalDictionary out(dict.kind(), dict.axis_stride(), dict.levels(), dict.fan_out(),
                             dict.configs_per_part(), dict.locality_radius(),
                             dict.alphabet_size(), dict.background_dist());
  for (const PartType& leaf : dict.level(0)) {
    std::vector<double> dist = leaf.leaf_feature_dist;
    if (dist.size() >= 2) std::swap(dist[0], dist[1]);
    out.add_leaf_type(std::move(dist));
  }
  for (int h = 1; h <= dict.levels(); ++h)
    for (const PartType& part : dict.level(h)) {
      std::vector<Configuration> configs = part.configs;
      if (configs.size() >= 2) std::swap(configs[0].log_prob, configs[1].log_prob);
      out.compose(h, part.child_ordinals, std::move(configs));
    }
  return out;
}

}  // namespace

std::vector<VerifyFailure> verify_instance(const RandomInstance& inst, std::int64_t oracle_cap,
                                           std::map<std::string, std::int64_t>* tally,
                                           bool inject_fault) {
  std::vector<VerifyFailure> failures;
  Checker ck{inst, failures, tally};
  const HierarchicalDictionary& dict = inst.dict;
  const HierarchicalDictionary oracle_dict =
      inject_fault ? swapped_probabilities(inst.dict) : inst.dict;
  const LatticeHierarchy& lat = inst.lat;
  const int H = dict.levels();
  const std::int64_t top_cells = lat.cells(H);
  const int num_models = static_cast<int>(dict.level_size(H));

  const UnaryTable unaries = leaf_evidence(inst.image, dict, lat);
  OpCounter shared_counter(H);
  const EvidenceTable full = bottom_up(unaries, dict, lat, Scope::full_dictionary(), shared_counter);

  // --- oracle-map / oracle-evidence ------------------------------------
  for (int o = 0; o < num_models; ++o) {
    const OracleResult oracle = brute_force_map(inst.image, oracle_dict, lat, o, oracle_cap);

    std::int64_t best_cell = -1;
    double best = kNegInf;
    for (std::int64_t cell = 0; cell < top_cells; ++cell) {
      const double s = full.score(H, o, cell);
      if (s > best) {
        best = s;
        best_cell = cell;
      }
    }
    bool map_ok = true;
    std::string map_detail;
    if (!close_or_both_inf(oracle.score, best)) {
      map_ok = false;
      map_detail = "model " + std::to_string(o) + " best score " + describe(best, oracle.score);
    } else if (oracle.parse.has_value()) {
      OpCounter scratch(H);
      const ParseTree dp_parse =
          top_down(full, dict, lat, SelectedRoot{best_cell, o, best}, scratch);
      if (!(dp_parse == *oracle.parse)) {
        map_ok = false;
        map_detail = "model " + std::to_string(o) + " argmax parse differs at root " +
                     std::to_string(best_cell);
      }
    }
    ck.record("oracle-map", map_ok, map_detail);

    bool evidence_ok = true;
    std::string evidence_detail;
    for (std::int64_t cell = 0; cell < top_cells; ++cell) {
      const OracleResult pinned =
          brute_force_global_evidence(inst.image, oracle_dict, lat, o, cell, oracle_cap);
      const double table_score = full.score(H, o, cell);
      if (!close_or_both_inf(pinned.score, table_score)) {
        evidence_ok = false;
        evidence_detail = "model " + std::to_string(o) + " root " + std::to_string(cell) +
                          ": " + describe(table_score, pinned.score);
        break;
      }
    }
    ck.record("oracle-evidence", evidence_ok, evidence_detail);
  }

  // --- sharing-bitwise ---------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    for (int o = 0; o < num_models && ok; ++o) {
      OpCounter scratch(H);
      const EvidenceTable single =
          bottom_up(unaries, dict, lat, Scope::single_model(o), scratch);
      const auto closure = type_closure(dict, o);
      for (int h = 0; h <= H && ok; ++h)
        for (int t : closure[static_cast<std::size_t>(h)]) {
          for (std::int64_t cell = 0; cell < lat.cells(h); ++cell) {
            const double a = full.score(h, t, cell);
            const double b = single.score(h, t, cell);
            const bool same_score = a == b;  // bitwise contract, -inf included
            const bool same_ptr =
                h == 0 || full.backpointer(h, t, cell) == single.backpointer(h, t, cell);
            if (!same_score || !same_ptr) {
              ok = false;
              detail = "model " + std::to_string(o) + " level " + std::to_string(h) +
                       " type " + std::to_string(t) + " cell " + std::to_string(cell) +
                       (same_score ? " backpointer differs" : ": " + describe(a, b));
              break;
            }
          }
          if (!ok) break;
        }
    }
    ck.record("sharing-bitwise", ok, detail);
  }

  // --- mode-identity -------------------------------------------------------
  const DetectResult res_shared =
      detect_all(inst.image, dict, lat, inst.threshold, DetectMode::SerialShared);
  const DetectResult res_unshared =
      detect_all(inst.image, dict, lat, inst.threshold, DetectMode::SerialUnshared);
  const DetectResult res_parallel =
      detect_all(inst.image, dict, lat, inst.threshold, DetectMode::ParallelSim);
  {
    bool ok = res_shared.detections == res_unshared.detections &&
              res_shared.detections == res_parallel.detections &&
              res_parallel.schedule.has_value();
    ck.record("mode-identity", ok,
              ok ? "" : "detection lists disagree across modes (" +
                            std::to_string(res_shared.detections.size()) + "/" +
                            std::to_string(res_unshared.detections.size()) + "/" +
                            std::to_string(res_parallel.detections.size()) + ")");
  }

  const ComplexityParams params = ComplexityParams::of(dict, lat);

  // --- counter-shared ------------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    const ReconcileReport rec =
        reconcile(params, CounterEnvelope{params, DetectMode::SerialShared, res_shared.counter});
    if (!rec.all_exact) {
      ok = false;
      for (const ReconcileRow& row : rec.rows)
        if (!row.exact)
          detail = "level " + std::to_string(row.level) + ": measured " +
                   std::to_string(row.measured) + ", predicted " +
                   std::to_string(row.predicted);
    }
    for (int h = 1; h <= H && ok; ++h) {
      const std::int64_t expect = dict.level_size(h) * lat.cells(h);
      if (res_shared.counter.max_selections[static_cast<std::size_t>(h)] != expect) {
        ok = false;
        detail = "max selections level " + std::to_string(h) + ": " +
                 std::to_string(res_shared.counter.max_selections[static_cast<std::size_t>(h)]) +
                 " != " + std::to_string(expect);
      }
    }
    if (ok) {
      const std::int64_t expect = static_cast<std::int64_t>(num_models) * top_cells;
      if (res_shared.counter.model_selection_comparisons[static_cast<std::size_t>(H)] != expect) {
        ok = false;
        detail = "model selection comparisons: " +
                 std::to_string(
                     res_shared.counter.model_selection_comparisons[static_cast<std::size_t>(H)]) +
                 " != " + std::to_string(expect);
      }
    }
    ck.record("counter-shared", ok, detail);
  }

  // --- counter-unshared ----------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    std::vector<std::int64_t> expected(static_cast<std::size_t>(H) + 1, 0);
    for (int o = 0; o < num_models; ++o) {
      const auto closure = type_closure(dict, o);
      for (int h = 1; h <= H; ++h)
        expected[static_cast<std::size_t>(h)] +=
            static_cast<std::int64_t>(closure[static_cast<std::size_t>(h)].size()) *
            dict.configs_per_part() * lat.cells(h);
    }
    for (int h = 1; h <= H; ++h)
      if (res_unshared.counter.config_evaluations[static_cast<std::size_t>(h)] !=
          expected[static_cast<std::size_t>(h)]) {
        ok = false;
        detail = "level " + std::to_string(h) + ": " +
                 std::to_string(
                     res_unshared.counter.config_evaluations[static_cast<std::size_t>(h)]) +
                 " != " + std::to_string(expected[static_cast<std::size_t>(h)]);
        break;
      }
    ck.record("counter-unshared", ok, detail);
  }

  // --- rescore ---------------------------------------------------------------
  {
    bool ok = true;
    std::string detail;
    for (const Detection& d : res_shared.detections) {
      const double replayed = parse_log_likelihood_ratio(d.parse, inst.image, dict, lat);
      if (d.parse.root().cell != d.root_cell || d.parse.object_type() != d.type_ordinal ||
          !close_or_both_inf(replayed, d.score)) {
        ok = false;
        detail = "root " + std::to_string(d.root_cell) + ": " + describe(d.score, replayed);
        break;
      }
    }
    ck.record("rescore", ok, detail);
  }

  return failures;
}

SweepResult run_verification_sweep(const VerifyOptions& opts) {
  SweepResult result;
  for (int i = 0; i < opts.num_instances; ++i) {
    const RandomInstance inst = make_random_instance(opts.base_seed + static_cast<std::uint64_t>(i));
    auto failures =
        verify_instance(inst, opts.oracle_cap, &result.checks_passed, opts.inject_fault);
    result.failures.insert(result.failures.end(), failures.begin(), failures.end());
    ++result.instances;
  }
  return result;
}

}  // namespace partshare
