#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/generative.hpp"
#include "partshare/lattice.hpp"

namespace partshare {

/// A small randomized problem: lattice + dictionary + image, sized so the
/// exhaustive oracle stays cheap (1-D base <= 32 cells, 2-D <= 16x16,
/// H <= 3, r = 2, C_r <= 3, at most 4 top-level parts).
struct RandomInstance {
  std::uint64_t seed = 0;
  LatticeHierarchy lat;
  HierarchicalDictionary dict;
  FeatureImage image;
  double threshold = 0.0;
};

/// Deterministic instance generator: same seed, same instance, bytes and
/// all. Roughly half the images carry one or two planted objects (possibly
/// noisy); the rest are pure background.
RandomInstance make_random_instance(std::uint64_t seed);

struct VerifyFailure {
  std::uint64_t seed = 0;
  std::string check;
  std::string detail;
};

/// All independent cross-checks on one instance:
///   oracle-map        exhaustive best score/parse == table best + argmax parse
///   oracle-evidence   pinned-root exhaustive score == table entry, every root
///   sharing-bitwise   full-dictionary table == per-object tables, bitwise
///   mode-identity     the three detect modes return identical detections
///   counter-shared    shared-run counters == closed-form per-level counts
///   counter-unshared  per-object-run counters == per-closure per-level counts
///   rescore           generative re-score of each detection parse == its score
/// Passing checks add to `tally` (when given); failures are returned.
///
/// `inject_fault` is the harness's self-test button: the oracle runs
/// against a copy of the dictionary with probabilities swapped (config 0/1
/// log-probs, leaf symbol 0/1 masses), so a healthy pipeline must report
/// mismatches. Never set outside tests of the harness itself.
std::vector<VerifyFailure> verify_instance(const RandomInstance& inst,
                                           std::int64_t oracle_cap = 10'000'000,
                                           std::map<std::string, std::int64_t>* tally = nullptr,
                                           bool inject_fault = false);

struct VerifyOptions {
  int num_instances = 200;
  std::uint64_t base_seed = 1;
  std::int64_t oracle_cap = 10'000'000;
  bool inject_fault = false;  // see verify_instance
};

struct SweepResult {
  int instances = 0;
  std::map<std::string, std::int64_t> checks_passed;
  std::vector<VerifyFailure> failures;
  bool ok() const { return failures.empty(); }
};

/// Runs verify_instance over seeds base_seed .. base_seed+num_instances-1.
SweepResult run_verification_sweep(const VerifyOptions& opts = {});

}  // namespace partshare
