#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "partshare/errors.hpp"
#include "partshare/inference.hpp"
#include "partshare/oracle.hpp"
#include "partshare/verify.hpp"

using namespace partshare;

TEST_CASE("a single-configuration model enumerates one candidate per root") {
  auto dict = testutil::chain_dictionary(2);
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 2);
  const FeatureImage img = testutil::random_image(lat, 3, 5);
  CHECK(brute_force_candidate_count(dict, lat) == 2.0);  // |D_2| = 2, C_r = 1
  const OracleResult best = brute_force_map(img, dict, lat, 0);
  CHECK(best.candidates_enumerated == 2);
  REQUIRE(best.parse.has_value());
  CHECK(best.parse->leaves_distinct());
}

TEST_CASE("candidate count multiplies over internal nodes") {
  // H = 2, r = 2, C_r = 2: three internal nodes per derivation, two roots.
  HierarchicalDictionary d(GridKind::OneD, 2, 2, 2, 2, 0.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({0.5, 0.3, 0.2});
  d.add_leaf_type({0.2, 0.3, 0.5});
  const std::vector<Configuration> two{{{{0, 0}, {0, 1}}, std::log(0.5)},
                                       {{{0, 1}, {0, 0}}, std::log(0.5)}};
  d.compose(1, {0, 1}, two);
  d.compose(2, {0, 0}, two);
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 2);
  const FeatureImage img = testutil::random_image(lat, 3, 7);
  CHECK(brute_force_candidate_count(d, lat) == 16.0);  // 2 roots * 2^3
  const OracleResult best = brute_force_map(img, d, lat, 0);
  CHECK(best.candidates_enumerated == 16);

  // The search refuses to start when the cap is below the candidate count.
  CHECK_THROWS_AS(brute_force_map(img, d, lat, 0, 15), InstanceTooLarge);
  CHECK_NOTHROW(brute_force_map(img, d, lat, 0, 16));
}

TEST_CASE("pinned roots whose layout leaves the lattice score minus infinity") {
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 1, 0.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({0.5, 0.3, 0.2});
  d.compose(1, {0, 0}, {Configuration{{{0, -1}, {0, 0}}, 0.0}});
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  const FeatureImage img = testutil::random_image(lat, 3, 9);
  const OracleResult off = brute_force_global_evidence(img, d, lat, 0, 0);
  CHECK(off.score == -std::numeric_limits<double>::infinity());
  CHECK_FALSE(off.parse.has_value());
  CHECK(off.candidates_enumerated == 1);  // the doomed candidate still counts
  CHECK(brute_force_global_evidence(img, d, lat, 0, 1).parse.has_value());
}

TEST_CASE("the global maximum is the best pinned-root result") {
  auto dict = testutil::two_object_dictionary();
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 2);
  const FeatureImage img = testutil::random_image(lat, 3, 11);
  for (int o = 0; o < 2; ++o) {
    const OracleResult global = brute_force_map(img, dict, lat, o);
    double best = -std::numeric_limits<double>::infinity();
    std::int64_t best_root = -1;
    for (std::int64_t c = 0; c < lat.cells(2); ++c) {
      const double s = brute_force_global_evidence(img, dict, lat, o, c).score;
      if (s > best) {
        best = s;
        best_root = c;
      }
    }
    CHECK(global.score == doctest::Approx(best).epsilon(1e-12));
    REQUIRE(global.parse.has_value());
    CHECK(global.parse->root().cell == best_root);
  }
}

TEST_CASE("oracle ordinals are validated") {
  auto dict = testutil::chain_dictionary(1);
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  const FeatureImage img = testutil::random_image(lat, 3, 13);
  CHECK_THROWS_AS(brute_force_map(img, dict, lat, 3), IndexOutOfRange);
  CHECK_THROWS_AS(brute_force_global_evidence(img, dict, lat, 0, 9), IndexOutOfRange);
  FeatureImage bad = img;
  bad.alphabet_size = 4;
  CHECK_THROWS_AS(brute_force_map(bad, dict, lat, 0), AlphabetMismatch);
}

TEST_CASE("randomized instances: exhaustive search agrees with the pipeline") {
  // A fast slice of the full verification sweep; the acceptance harness
  // runs hundreds of these.
  std::map<std::string, std::int64_t> tally;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RandomInstance inst = make_random_instance(seed);
    const auto failures = verify_instance(inst, 10'000'000, &tally);
    for (const auto& f : failures) {
      const std::string message =
          "seed " + std::to_string(f.seed) + " " + f.check + ": " + f.detail;
      FAIL_CHECK(message);
    }
  }
  CHECK(tally["oracle-map"] > 0);
  CHECK(tally["oracle-evidence"] > 0);
  CHECK(tally["sharing-bitwise"] == 10);
  CHECK(tally["mode-identity"] == 10);
  CHECK(tally["counter-shared"] == 10);
  CHECK(tally["counter-unshared"] == 10);
  CHECK(tally["rescore"] == 10);
}

TEST_CASE("instances are reproducible from their seed") {
  const RandomInstance a = make_random_instance(77);
  const RandomInstance b = make_random_instance(77);
  CHECK(a.image == b.image);
  CHECK(a.lat.cells(0) == b.lat.cells(0));
  CHECK(a.dict.levels() == b.dict.levels());
  CHECK(a.threshold == b.threshold);
}

TEST_CASE("the harness notices a corrupted model (self-test)") {
  // With probabilities swapped behind the oracle's back, a healthy
  // pipeline must report disagreements; silence would mean the checks
  // cannot fail.
  const SweepResult sweep = run_verification_sweep({10, 1, 10'000'000, true});
  CHECK_FALSE(sweep.ok());
}
