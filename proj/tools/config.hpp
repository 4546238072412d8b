#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/inference.hpp"
#include "partshare/lattice.hpp"
#include "partshare/rational.hpp"
#include "partshare/verify.hpp"

namespace partshare::tools {

/// INI-style key/value file: [section] headers, "key = value" entries,
/// '#' comments. Unknown sections or keys, duplicates, and type errors all
/// raise ConfigError with the offending line number.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  /// Throws ConfigError naming the section/key when absent.
  std::string get(const std::string& section, const std::string& key) const;
  std::optional<std::string> find(const std::string& section, const std::string& key) const;

  std::int64_t get_int(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  Rational get_rational(const std::string& section, const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& section,
                                         const std::string& key) const;

  int line_of(const std::string& section, const std::string& key) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Everything a run can specify, with defaults filled in. Sections:
/// [lattice] kind rows cols scale levels; [dictionary] file | regime
/// (growth|user|decrease) growth_constant sizes fan_out configs_per_part
/// leaf_types alphabet locality_radius uniform_config_probs seed;
/// [scene] objects seed noise image; [inference] threshold mode;
/// [verify] instances base_seed oracle_cap; [complexity] counters regime;
/// [output] dir.
struct ExperimentConfig {
  struct LatticeSpec {
    GridKind kind = GridKind::OneD;
    std::int64_t rows = 1;
    std::int64_t cols = 0;
    Rational scale{1, 2};
    int levels = 1;
  };
  std::optional<LatticeSpec> lattice;

  std::optional<std::string> dictionary_file;
  std::optional<RegimeKind> regime;
  std::int64_t growth_constant = 1;
  std::vector<std::int64_t> sizes;  // user regime: |M_1|..|M_H|
  int fan_out = 2;
  int configs_per_part = 2;
  RegimeDictionaryOptions dict_opts;
  std::uint64_t dict_seed = 1;

  std::vector<int> objects;
  std::uint64_t scene_seed = 1;
  double noise = 0.0;
  std::optional<std::string> image_file;

  double threshold = 0.0;
  DetectMode mode = DetectMode::SerialShared;

  VerifyOptions verify;

  std::optional<std::string> counters_file;

  std::string out_dir = "out";

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from(const ConfigFile& file);
};

}  // namespace partshare::tools
