#pragma once

// Shared fixtures for the test binaries: tiny hand-built dictionaries whose
// scores can be computed by hand, temp directories, and file helpers.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/generative.hpp"
#include "partshare/lattice.hpp"
#include "partshare/rng.hpp"

namespace testutil {

/// RAII temp directory under the system temp root.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "partshare-test-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

/// 1-D chain model: one leaf type, one part per level composed of the same
/// child twice at offsets 0 and +1 (child-lattice steps). Every root cell
/// yields an on-lattice derivation. C_r = 1, k = 2.
inline partshare::HierarchicalDictionary chain_dictionary(int levels) {
  using namespace partshare;
  HierarchicalDictionary d(GridKind::OneD, 2, levels, 2, 1, 0.0, 3, {0.5, 0.3, 0.2});
  d.add_leaf_type({0.6, 0.3, 0.1});
  for (int h = 1; h <= levels; ++h)
    d.compose(h, {0, 0}, {Configuration{{{0, 0}, {0, 1}}, 0.0}});
  return d;
}

/// Two object types over a shared level-1 vocabulary (1-D, H = 2, k = 2):
/// p0 = (a, b), p1 = (b, a); o0 = (p0, p1), o1 = (p1, p1). Part p1 is
/// referenced three times, so sharing is real. All offsets are
/// non-negative, so every root stays on-lattice. C_r = 1.
inline partshare::HierarchicalDictionary two_object_dictionary() {
  using namespace partshare;
  HierarchicalDictionary d(GridKind::OneD, 2, 2, 2, 1, 0.0, 3, {0.4, 0.3, 0.3});
  d.add_leaf_type({0.5, 0.3, 0.2});  // a
  d.add_leaf_type({0.1, 0.6, 0.3});  // b
  const std::vector<Configuration> cfg{{{{0, 0}, {0, 1}}, 0.0}};
  d.compose(1, {0, 1}, cfg);  // p0
  d.compose(1, {1, 0}, cfg);  // p1
  d.compose(2, {0, 1}, cfg);  // o0
  d.compose(2, {1, 1}, cfg);  // o1
  return d;
}

inline partshare::FeatureImage random_image(const partshare::LatticeHierarchy& lat,
                                            int alphabet, std::uint64_t seed) {
  partshare::FeatureImage img;
  img.rows = lat.extent(0).rows;
  img.cols = lat.extent(0).cols;
  img.alphabet_size = alphabet;
  img.symbols.resize(static_cast<std::size_t>(img.rows * img.cols));
  partshare::Rng rng(seed);
  for (auto& s : img.symbols)
    s = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(alphabet)));
  return img;
}

/// A scene setup whose maximum-likelihood parse provably equals the planted
/// one: every leaf type is deterministic on its own symbol, the background
/// puts only epsilon mass there, and distinct object types use distinct
/// private leaf types. Any candidate other than a planted object touches a
/// pixel its leaf model gives probability zero.
struct Planted {
  partshare::LatticeHierarchy lat;
  partshare::HierarchicalDictionary dict;
  std::vector<int> plant_types;
  std::string lattice_ini;  // matching [lattice] block for config files
};

inline Planted make_planted(int which, std::uint64_t seed) {
  using namespace partshare;
  const double e = 1e-12;
  const std::vector<Configuration> step{{{{0, 0}, {0, 1}}, 0.0}};
  auto degenerate = [](int size, int symbol) {
    std::vector<double> dist(static_cast<std::size_t>(size), 0.0);
    dist[static_cast<std::size_t>(symbol)] = 1.0;
    return dist;
  };
  switch (which % 4) {
    case 0: {  // 1-D, H = 1, one object type
      HierarchicalDictionary d(GridKind::OneD, 2, 1, 2, 1, 0.0, 3, {1.0 - 2 * e, e, e});
      d.add_leaf_type(degenerate(3, 1));
      d.add_leaf_type(degenerate(3, 2));
      d.compose(1, {0, 1}, step);
      return {LatticeHierarchy::build(Extent::line(8), {1, 2}, 1), std::move(d), {0},
              "[lattice]\nkind = 1d\ncols = 8\nscale = 1/2\nlevels = 1\n"};
    }
    case 1: {  // 1-D, H = 2, two object types with disjoint leaf alphabets
      HierarchicalDictionary d(GridKind::OneD, 2, 2, 2, 1, 0.0, 5,
                               {1.0 - 4 * e, e, e, e, e});
      for (int i = 0; i < 4; ++i) d.add_leaf_type(degenerate(5, i + 1));
      d.compose(1, {0, 1}, step);
      d.compose(1, {2, 3}, step);
      d.compose(2, {0, 0}, step);
      d.compose(2, {1, 1}, step);
      return {LatticeHierarchy::build(Extent::line(16), {1, 2}, 2), std::move(d), {0, 1},
              "[lattice]\nkind = 1d\ncols = 16\nscale = 1/2\nlevels = 2\n"};
    }
    case 2: {  // 2-D, H = 1, two configurations with distinct leaf layouts
      HierarchicalDictionary d(GridKind::TwoD, 2, 1, 2, 2, 0.0, 3, {1.0 - 2 * e, e, e});
      d.add_leaf_type(degenerate(3, 1));
      d.add_leaf_type(degenerate(3, 2));
      d.compose(1, {0, 1},
                {Configuration{{{0, 0}, {0, 1}}, std::log(0.5)},
                 Configuration{{{0, 0}, {1, 0}}, std::log(0.5)}});
      return {LatticeHierarchy::build(Extent::grid(8, 8), {1, 4}, 1), std::move(d), {0},
              "[lattice]\nkind = 2d\nrows = 8\ncols = 8\nscale = 1/4\nlevels = 1\n"};
    }
    default: {  // 1-D, H = 2, three object types over one shared subpart
      HierarchicalDictionary d(GridKind::OneD, 2, 2, 2, 1, 0.0, 5,
                               {1.0 - 4 * e, e, e, e, e});
      for (int i = 0; i < 4; ++i) d.add_leaf_type(degenerate(5, i + 1));
      for (int i = 0; i < 4; ++i) d.compose(1, {i, i}, step);
      for (int i = 1; i <= 3; ++i) d.compose(2, {0, i}, step);
      const int first = static_cast<int>(seed % 3);
      return {LatticeHierarchy::build(Extent::line(16), {1, 2}, 2), std::move(d),
              {first, (first + 1) % 3},
              "[lattice]\nkind = 1d\ncols = 16\nscale = 1/2\nlevels = 2\n"};
    }
  }
}

/// CSV rows of "root_cell,type,score" after the header.
inline std::vector<std::tuple<std::int64_t, int, double>> read_detections_csv(
    const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::tuple<std::int64_t, int, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    long long cell = 0;
    int type = 0;
    double score = 0.0;
    if (std::sscanf(line.c_str(), "%lld,%d,%lf", &cell, &type, &score) == 3)
      rows.emplace_back(cell, type, score);
  }
  return rows;
}

/// a <= b for nonnegative-denominator rationals, exactly.
inline bool rational_leq(const partshare::Rational& a, const partshare::Rational& b) {
  return static_cast<__int128>(a.num) * b.den <= static_cast<__int128>(b.num) * a.den;
}

}  // namespace testutil
