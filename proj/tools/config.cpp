#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "partshare/errors.hpp"

namespace partshare::tools {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// section -> allowed keys; the schema the parser validates against.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"lattice", {"kind", "rows", "cols", "scale", "levels"}},
      {"dictionary",
       {"file", "regime", "growth_constant", "sizes", "fan_out", "configs_per_part",
        "leaf_types", "alphabet", "locality_radius", "uniform_config_probs", "seed"}},
      {"scene", {"objects", "seed", "noise", "image"}},
      {"inference", {"threshold", "mode"}},
      {"verify", {"instances", "base_seed", "oracle_cap", "inject_fault"}},
      {"complexity", {"counters", "regime"}},
      {"output", {"dir"}},
  };
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section))
        throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' or '[section]'", line_no);
    if (section.empty()) throw ConfigError("entry before any [section]", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (!schema().at(section).count(key))
      throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
    auto [it, inserted] = cfg.sections_[section].insert({key, Entry{value, line_no}});
    if (!inserted)
      throw ConfigError("duplicate key '" + key + "' in [" + section + "] (first at line " +
                            std::to_string(it->second.line) + ")",
                        line_no);
  }
  (void)origin;
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::optional<std::string> ConfigFile::find(const std::string& section,
                                            const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second.value;
}

std::string ConfigFile::get(const std::string& section, const std::string& key) const {
  auto v = find(section, key);
  if (!v) throw ConfigError("missing required key '" + key + "' in [" + section + "]");
  return *v;
}

int ConfigFile::line_of(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return 0;
  auto k = s->second.find(key);
  return k == s->second.end() ? 0 : k->second.line;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get(section, key);
  char* end = nullptr;
  const long long parsed = std::strtoll(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError("'" + key + "' must be an integer, got '" + v + "'",
                      line_of(section, key));
  return parsed;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get(section, key);
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError("'" + key + "' must be a number, got '" + v + "'",
                      line_of(section, key));
  return parsed;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key) const {
  const std::string v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' must be true/false, got '" + v + "'",
                    line_of(section, key));
}

Rational ConfigFile::get_rational(const std::string& section, const std::string& key) const {
  const std::string v = get(section, key);
  try {
    return parse_rational(v);
  } catch (const Error& e) {
    throw ConfigError("'" + key + "': " + e.what(), line_of(section, key));
  }
}

std::vector<std::int64_t> ConfigFile::get_int_list(const std::string& section,
                                                   const std::string& key) const {
  std::string v = get(section, key);
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  std::vector<std::int64_t> out;
  std::int64_t x = 0;
  while (in >> x) out.push_back(x);
  if (!in.eof())
    throw ConfigError("'" + key + "' must be a list of integers, got '" + v + "'",
                      line_of(section, key));
  return out;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from(ConfigFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from(const ConfigFile& f) {
  ExperimentConfig cfg;

  if (f.has("lattice", "kind") || f.has("lattice", "cols")) {
    LatticeSpec lat;
    const std::string kind = f.get("lattice", "kind");
    if (kind == "1d")
      lat.kind = GridKind::OneD;
    else if (kind == "2d")
      lat.kind = GridKind::TwoD;
    else
      throw ConfigError("kind must be 1d or 2d, got '" + kind + "'",
                        f.line_of("lattice", "kind"));
    lat.cols = f.get_int("lattice", "cols");
    lat.rows = lat.kind == GridKind::OneD ? 1 : f.get_int("lattice", "rows");
    if (lat.kind == GridKind::OneD && f.has("lattice", "rows") &&
        f.get_int("lattice", "rows") != 1)
      throw ConfigError("1d lattices have a single row", f.line_of("lattice", "rows"));
    lat.scale = f.get_rational("lattice", "scale");
    lat.levels = static_cast<int>(f.get_int("lattice", "levels"));
    cfg.lattice = lat;
  }

  if (auto file = f.find("dictionary", "file")) cfg.dictionary_file = *file;
  if (auto regime = f.find("dictionary", "regime")) {
    try {
      cfg.regime = RegimeSpec::kind_from_name(*regime);
    } catch (const Error& e) {
      throw ConfigError(e.what(), f.line_of("dictionary", "regime"));
    }
  }
  if (f.has("dictionary", "growth_constant"))
    cfg.growth_constant = f.get_int("dictionary", "growth_constant");
  if (f.has("dictionary", "sizes")) cfg.sizes = f.get_int_list("dictionary", "sizes");
  if (f.has("dictionary", "fan_out"))
    cfg.fan_out = static_cast<int>(f.get_int("dictionary", "fan_out"));
  if (f.has("dictionary", "configs_per_part"))
    cfg.configs_per_part = static_cast<int>(f.get_int("dictionary", "configs_per_part"));
  if (f.has("dictionary", "leaf_types"))
    cfg.dict_opts.num_leaf_types = f.get_int("dictionary", "leaf_types");
  if (f.has("dictionary", "alphabet"))
    cfg.dict_opts.alphabet_size = static_cast<int>(f.get_int("dictionary", "alphabet"));
  if (f.has("dictionary", "locality_radius"))
    cfg.dict_opts.locality_radius = f.get_double("dictionary", "locality_radius");
  if (f.has("dictionary", "uniform_config_probs"))
    cfg.dict_opts.uniform_config_probs = f.get_bool("dictionary", "uniform_config_probs");
  if (f.has("dictionary", "seed"))
    cfg.dict_seed = static_cast<std::uint64_t>(f.get_int("dictionary", "seed"));

  if (f.has("scene", "objects"))
    for (std::int64_t o : f.get_int_list("scene", "objects"))
      cfg.objects.push_back(static_cast<int>(o));
  if (f.has("scene", "seed"))
    cfg.scene_seed = static_cast<std::uint64_t>(f.get_int("scene", "seed"));
  if (f.has("scene", "noise")) {
    cfg.noise = f.get_double("scene", "noise");
    if (cfg.noise < 0.0 || cfg.noise > 1.0)
      throw ConfigError("noise must lie in [0, 1]", f.line_of("scene", "noise"));
  }
  if (auto img = f.find("scene", "image")) cfg.image_file = *img;

  if (f.has("inference", "threshold")) cfg.threshold = f.get_double("inference", "threshold");
  if (auto mode = f.find("inference", "mode")) {
    try {
      cfg.mode = detect_mode_from_name(*mode);
    } catch (const Error& e) {
      throw ConfigError(e.what(), f.line_of("inference", "mode"));
    }
  }

  if (f.has("verify", "instances"))
    cfg.verify.num_instances = static_cast<int>(f.get_int("verify", "instances"));
  if (f.has("verify", "base_seed"))
    cfg.verify.base_seed = static_cast<std::uint64_t>(f.get_int("verify", "base_seed"));
  if (f.has("verify", "oracle_cap")) cfg.verify.oracle_cap = f.get_int("verify", "oracle_cap");
  if (f.has("verify", "inject_fault"))
    cfg.verify.inject_fault = f.get_bool("verify", "inject_fault");
  if (cfg.verify.num_instances < 0)
    throw ConfigError("instances must be >= 0", f.line_of("verify", "instances"));

  if (auto counters = f.find("complexity", "counters")) cfg.counters_file = *counters;
  if (auto regime = f.find("complexity", "regime")) {
    try {
      cfg.regime = RegimeSpec::kind_from_name(*regime);
    } catch (const Error& e) {
      throw ConfigError(e.what(), f.line_of("complexity", "regime"));
    }
  }

  if (f.has("output", "dir")) cfg.out_dir = f.get("output", "dir");
  return cfg;
}

}  // namespace partshare::tools
