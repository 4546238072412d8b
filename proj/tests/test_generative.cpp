#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "partshare/errors.hpp"
#include "partshare/generative.hpp"
#include "partshare/oracle.hpp"

using namespace partshare;

TEST_CASE("a single-configuration model derives deterministically") {
  auto dict = testutil::chain_dictionary(2);
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 2);
  Rng rng(1);
  const ParseTree parse = sample_parse(dict, lat, 0, 1, rng);
  CHECK(parse.levels_H == 2);
  CHECK(parse.fan_out_r == 2);
  CHECK(parse.root() == ParseNode{0, 1, 0});
  REQUIRE(parse.nodes[1].size() == 2);
  CHECK(parse.nodes[1][0] == ParseNode{0, 2, 0});
  CHECK(parse.nodes[1][1] == ParseNode{0, 3, 0});
  const auto leaves = parse.leaf_set(lat);
  REQUIRE(leaves.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(leaves[static_cast<std::size_t>(i)].coord == Coord{0, 4 + i});
    CHECK(leaves[static_cast<std::size_t>(i)].type == 0);
  }
  CHECK(parse.leaves_distinct());
  CHECK(std::is_sorted(leaves.begin(), leaves.end()));
}

TEST_CASE("configuration choices follow their probabilities (binomial, 3 sigma)") {
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 2, 0.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({0.5, 0.3, 0.2});
  d.add_leaf_type({0.2, 0.3, 0.5});
  d.compose(1, {0, 1},
            {Configuration{{{0, 0}, {0, 1}}, std::log(0.5)},
             Configuration{{{0, 1}, {0, 0}}, std::log(0.5)}});
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  Rng rng(11);
  const int n = 10000;
  int first = 0;
  for (int i = 0; i < n; ++i)
    if (sample_parse(d, lat, 0, 0, rng).root().config_index == 0) ++first;
  // sigma = sqrt(n/4) = 50; allow 3 sigma around 5000.
  CHECK(std::abs(first - 5000) <= 150);
}

TEST_CASE("configuration choices pass a chi-square fit at alpha = 0.01") {
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 3, 0.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({0.5, 0.3, 0.2});
  d.add_leaf_type({0.2, 0.3, 0.5});
  d.compose(1, {0, 1},
            {Configuration{{{0, 0}, {0, 1}}, std::log(0.5)},
             Configuration{{{0, 1}, {0, 0}}, std::log(0.3)},
             Configuration{{{0, -1}, {0, 0}}, std::log(0.2)}});
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  Rng rng(13);
  const int n = 10000;
  // Root cell 1 keeps all three layouts on-lattice: no rejection bias.
  std::vector<int> counts(3, 0);
  for (int i = 0; i < n; ++i)
    ++counts[static_cast<std::size_t>(sample_parse(d, lat, 0, 1, rng).root().config_index)];
  const double expected[3] = {0.5 * n, 0.3 * n, 0.2 * n};
  double chi2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double diff = counts[static_cast<std::size_t>(c)] - expected[c];
    chi2 += diff * diff / expected[c];
  }
  CHECK(chi2 < 9.21034);  // chi-square critical value, 2 dof, alpha = 0.01
}

TEST_CASE("derivations that always leave the lattice exhaust the retry budget") {
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 1, 0.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({1.0, 0.0, 0.0});
  d.compose(1, {0, 0}, {Configuration{{{0, -1}, {0, 0}}, 0.0}});
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  Rng rng(2);
  // Root cell 0 pushes the first child to column -1 every time.
  CHECK_THROWS_AS(sample_parse(d, lat, 0, 0, rng), OverlapUnresolvable);
  // Other roots are fine.
  CHECK_NOTHROW(sample_parse(d, lat, 0, 1, rng));
}

TEST_CASE("root and object ordinals are validated") {
  auto dict = testutil::chain_dictionary(1);
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  Rng rng(3);
  CHECK_THROWS_AS(sample_parse(dict, lat, 0, 4, rng), IndexOutOfRange);
  CHECK_THROWS_AS(sample_parse(dict, lat, 5, 0, rng), IndexOutOfRange);
}

TEST_CASE("rendering draws leaves from their models and the rest from background") {
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 1, 0.0, 3, {1.0, 0.0, 0.0});
  d.add_leaf_type({0.0, 1.0, 0.0});
  d.add_leaf_type({0.0, 0.0, 1.0});
  d.compose(1, {0, 1}, {Configuration{{{0, 0}, {0, 1}}, 0.0}});
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  Rng rng(4);
  const FeatureImage img = render({{{0, 2}, 0}, {{0, 3}, 1}}, d, lat, rng);
  CHECK(img.symbols == std::vector<int>{0, 0, 1, 2, 0, 0, 0, 0});

  Rng rng2(5);
  const FeatureImage empty = render({}, d, lat, rng2);
  CHECK(empty.symbols == std::vector<int>(8, 0));  // pure background
}

TEST_CASE("background noise resamples pixels at the given rate") {
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 1, 0.0, 3, {1.0, 0.0, 0.0});
  d.add_leaf_type({0.0, 1.0, 0.0});
  d.compose(1, {0, 0}, {Configuration{{{0, 0}, {0, 1}}, 0.0}});
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 1);
  FeatureImage img = testutil::random_image(lat, 3, 6);
  const FeatureImage before = img;
  Rng rng(7);
  apply_background_noise(img, d, 0.0, rng);
  CHECK(img == before);  // rate zero never touches a pixel
  apply_background_noise(img, d, 1.0, rng);
  CHECK(img.symbols == std::vector<int>(8, 0));  // degenerate background
}

TEST_CASE("scenes plant objects at distinct roots") {
  auto dict = testutil::chain_dictionary(1);
  auto lat = LatticeHierarchy::build(Extent::line(4), {1, 2}, 1);
  const Scene scene = sample_scene(dict, lat, {0, 0}, 21);
  REQUIRE(scene.objects.size() == 2);
  CHECK(scene.objects[0].root().cell != scene.objects[1].root().cell);
  CHECK(scene.image.cols == 4);
  // More objects than top-level cells cannot be placed.
  CHECK_THROWS_AS(sample_scene(dict, lat, {0, 0, 0}, 21), GenerativeError);
}

TEST_CASE("unresolvable overlap between objects raises after retries") {
  // Every pair of roots either collides at a leaf or leaves the lattice:
  // root i covers {2i, 2i+2} and root 2's far leaf needs column 6 of 6.
  HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 1, 2.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({1.0, 0.0, 0.0});
  d.compose(1, {0, 0}, {Configuration{{{0, 0}, {0, 2}}, 0.0}});
  auto lat = LatticeHierarchy::build(Extent::line(6), {1, 2}, 1);
  CHECK_THROWS_AS(sample_scene(d, lat, {0, 0}, 22), OverlapUnresolvable);
}

TEST_CASE("scene sampling is reproducible byte for byte") {
  auto dict = testutil::chain_dictionary(2);
  auto lat = LatticeHierarchy::build(Extent::line(8), {1, 2}, 2);
  const Scene a = sample_scene(dict, lat, {0}, 9, 0.25);
  const Scene b = sample_scene(dict, lat, {0}, 9, 0.25);
  const Scene c = sample_scene(dict, lat, {0}, 10, 0.25);
  CHECK(a.image == b.image);
  CHECK(a.objects == b.objects);
  CHECK(a.image != c.image);
}

TEST_CASE("an empty scene scores exactly zero") {
  auto dict = testutil::chain_dictionary(1);
  auto lat = LatticeHierarchy::build(Extent::line(4), {1, 2}, 1);
  const Scene scene = sample_scene(dict, lat, {}, 12);
  CHECK(scene_log_likelihood_ratio(scene, dict, lat) == 0.0);
}

TEST_CASE("noise-free planted scenes score exactly like the exhaustive search") {
  // Degenerate leaves + epsilon background make the planted parse the
  // unique maximum, so the sampled derivation's score is the MAP score.
  auto planted = testutil::make_planted(1, 3);
  const Scene scene = sample_scene(planted.dict, planted.lat, planted.plant_types, 5);
  double sum = 0.0;
  for (const ParseTree& parse : scene.objects) {
    const double own =
        parse_log_likelihood_ratio(parse, scene.image, planted.dict, planted.lat);
    const OracleResult best =
        brute_force_map(scene.image, planted.dict, planted.lat, parse.object_type());
    REQUIRE(best.parse.has_value());
    CHECK(own == doctest::Approx(best.score).epsilon(1e-9));
    CHECK(*best.parse == parse);
    sum += own;
  }
  CHECK(scene_log_likelihood_ratio(scene, planted.dict, planted.lat) ==
        doctest::Approx(sum).epsilon(1e-12));

  // Object order does not change the scene score.
  Scene swapped = scene;
  std::swap(swapped.objects[0], swapped.objects[1]);
  CHECK(scene_log_likelihood_ratio(swapped, planted.dict, planted.lat) ==
        doctest::Approx(scene_log_likelihood_ratio(scene, planted.dict, planted.lat))
            .epsilon(1e-12));
}
