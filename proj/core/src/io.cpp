#include "partshare/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "partshare/errors.hpp"

namespace partshare::io {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

void flush_or_throw(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw FormatError("short write to " + path);
}

// Line-oriented reader that keeps a line number for diagnostics.
struct LineReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  LineReader(const std::string& p) : in(std::ifstream(p)), path(p) {
    if (!in) throw FormatError("cannot open " + p);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path + ":" + std::to_string(line_no) + ": " + what);
  }

  std::istringstream next(const std::string& expect_head) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string head;
      ls >> head;
      if (head != expect_head) fail("expected '" + expect_head + "', got '" + head + "'");
      return ls;
    }
    ++line_no;
    fail("unexpected end of file, expected '" + expect_head + "'");
  }
};

double parse_double(LineReader& r, std::istringstream& ls) {
  std::string tok;
  if (!(ls >> tok)) r.fail("missing number");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) r.fail("bad number '" + tok + "'");
  return v;
}

std::int64_t parse_int(LineReader& r, std::istringstream& ls) {
  std::int64_t v = 0;
  if (!(ls >> v)) r.fail("missing integer");
  return v;
}

Rational dictionary_scale(const HierarchicalDictionary& dict) {
  const std::int64_t k = dict.axis_stride();
  return dict.kind() == GridKind::OneD ? Rational(1, k) : Rational(1, k * k);
}

json counter_json(const OpCounter& c) {
  return json{{"config_evaluations", c.config_evaluations},
              {"max_selections", c.max_selections},
              {"top_down_evaluations", c.top_down_evaluations},
              {"model_selection_comparisons", c.model_selection_comparisons}};
}

std::vector<std::int64_t> int_vec(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw FormatError(std::string("counter file missing array '") + key + "'");
  return j[key].get<std::vector<std::int64_t>>();
}

void write_parse(std::ofstream& out, const ParseTree& parse) {
  out << "object type " << parse.object_type() << " root " << parse.root().cell << "\n";
  for (int h = parse.levels_H; h >= 0; --h) {
    const auto& level_nodes = parse.nodes[static_cast<std::size_t>(h)];
    out << "level " << h << " nodes " << level_nodes.size() << "\n";
    for (const ParseNode& n : level_nodes)
      out << "node " << n.type_ordinal << " " << n.cell << " " << n.config_index << "\n";
  }
}

ParseTree read_parse(LineReader& r, int levels_H, int fan_out_r) {
  ParseTree parse;
  parse.levels_H = levels_H;
  parse.fan_out_r = fan_out_r;
  parse.nodes.resize(static_cast<std::size_t>(levels_H) + 1);
  {
    auto ls = r.next("object");
    std::string kw;
    ls >> kw;  // "type"
    parse_int(r, ls);
    ls >> kw;  // "root"
    parse_int(r, ls);
  }
  for (int h = levels_H; h >= 0; --h) {
    auto ls = r.next("level");
    if (parse_int(r, ls) != h) r.fail("levels out of order");
    std::string kw;
    ls >> kw;
    const std::int64_t count = parse_int(r, ls);
    if (count < 0) r.fail("negative node count");
    auto& level_nodes = parse.nodes[static_cast<std::size_t>(h)];
    level_nodes.resize(static_cast<std::size_t>(count));
    for (auto& n : level_nodes) {
      auto nls = r.next("node");
      n.type_ordinal = static_cast<int>(parse_int(r, nls));
      n.cell = parse_int(r, nls);
      n.config_index = static_cast<int>(parse_int(r, nls));
    }
  }
  return parse;
}

}  // namespace

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_dictionary(const HierarchicalDictionary& dict, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "partshare-dictionary 1\n";
  out << "kind " << (dict.kind() == GridKind::OneD ? "1d" : "2d") << "\n";
  out << "levels " << dict.levels() << "\n";
  out << "fan_out " << dict.fan_out() << "\n";
  out << "configs_per_part " << dict.configs_per_part() << "\n";
  out << "scale " << dictionary_scale(dict).str() << "\n";
  out << "locality_radius " << fmt_g17(dict.locality_radius()) << "\n";
  out << "alphabet " << dict.alphabet_size() << "\n";
  out << "background";
  for (double p : dict.background_dist()) out << " " << fmt_g17(p);
  out << "\n";
  for (int h = 0; h <= dict.levels(); ++h) {
    out << "level " << h << " size " << dict.level_size(h) << "\n";
    for (const PartType& part : dict.level(h)) {
      if (h == 0) {
        out << "leaf";
        for (double p : part.leaf_feature_dist) out << " " << fmt_g17(p);
        out << "\n";
        continue;
      }
      out << "part children";
      for (int c : part.child_ordinals) out << " " << c;
      out << "\n";
      for (const Configuration& cfg : part.configs) {
        out << "config " << fmt_g17(cfg.log_prob);
        for (const Displacement& d : cfg.child_offsets)
          out << " " << d.drow << " " << d.dcol;
        out << "\n";
      }
    }
  }
  flush_or_throw(out, path);
}

HierarchicalDictionary load_dictionary(const std::string& path) {
  LineReader r(path);
  {
    auto ls = r.next("partshare-dictionary");
    if (parse_int(r, ls) != 1) r.fail("unsupported dictionary version");
  }
  std::string kind_name;
  r.next("kind") >> kind_name;
  GridKind kind;
  if (kind_name == "1d")
    kind = GridKind::OneD;
  else if (kind_name == "2d")
    kind = GridKind::TwoD;
  else
    r.fail("kind must be 1d or 2d");

  auto ls = r.next("levels");
  const int H = static_cast<int>(parse_int(r, ls));
  ls = r.next("fan_out");
  const int fan_out = static_cast<int>(parse_int(r, ls));
  ls = r.next("configs_per_part");
  const int configs_per_part = static_cast<int>(parse_int(r, ls));
  std::string scale_text;
  r.next("scale") >> scale_text;
  Rational q;
  try {
    q = parse_rational(scale_text);
  } catch (const Error& e) {
    r.fail(e.what());
  }
  ls = r.next("locality_radius");
  const double locality_radius = parse_double(r, ls);
  ls = r.next("alphabet");
  const int alphabet = static_cast<int>(parse_int(r, ls));
  if (alphabet <= 0) r.fail("alphabet must be positive");

  ls = r.next("background");
  std::vector<double> background;
  background.reserve(static_cast<std::size_t>(alphabet));
  for (int i = 0; i < alphabet; ++i) background.push_back(parse_double(r, ls));

  std::int64_t axis_stride = 0;
  if (kind == GridKind::OneD) {
    if (q.num != 1) r.fail("1d scale must be 1/k");
    axis_stride = q.den;
  } else {
    std::int64_t k = 1;
    while (k * k < q.den) ++k;
    if (q.num != 1 || k * k != q.den) r.fail("2d scale must be 1/k^2");
    axis_stride = k;
  }

  HierarchicalDictionary dict(kind, axis_stride, H, fan_out, configs_per_part,
                              locality_radius, alphabet, std::move(background));
  for (int h = 0; h <= H; ++h) {
    ls = r.next("level");
    if (parse_int(r, ls) != h) r.fail("levels out of order");
    std::string kw;
    ls >> kw;
    const std::int64_t size = parse_int(r, ls);
    if (size <= 0) r.fail("level size must be positive");
    for (std::int64_t i = 0; i < size; ++i) {
      if (h == 0) {
        auto pls = r.next("leaf");
        std::vector<double> dist;
        dist.reserve(static_cast<std::size_t>(alphabet));
        for (int s = 0; s < alphabet; ++s) dist.push_back(parse_double(r, pls));
        try {
          dict.add_leaf_type(std::move(dist));
        } catch (const Error& e) {
          r.fail(e.what());
        }
        continue;
      }
      auto pls = r.next("part");
      std::string children_kw;
      pls >> children_kw;
      if (children_kw != "children") r.fail("expected 'children'");
      std::vector<int> child_ordinals;
      child_ordinals.reserve(static_cast<std::size_t>(fan_out));
      for (int c = 0; c < fan_out; ++c)
        child_ordinals.push_back(static_cast<int>(parse_int(r, pls)));
      std::vector<Configuration> configs;
      configs.reserve(static_cast<std::size_t>(configs_per_part));
      for (int c = 0; c < configs_per_part; ++c) {
        auto cls = r.next("config");
        Configuration cfg;
        cfg.log_prob = parse_double(r, cls);
        cfg.child_offsets.resize(static_cast<std::size_t>(fan_out));
        for (auto& d : cfg.child_offsets) {
          d.drow = parse_int(r, cls);
          d.dcol = parse_int(r, cls);
        }
        configs.push_back(std::move(cfg));
      }
      try {
        dict.compose(h, std::move(child_ordinals), std::move(configs));
      } catch (const Error& e) {
        r.fail(e.what());
      }
    }
  }
  dict.validate();
  return dict;
}

void save_image(const FeatureImage& image, const std::string& path) {
  std::ofstream out = open_out(path);
  out << image.rows << " " << image.cols << " " << image.alphabet_size << "\n";
  for (std::int64_t row = 0; row < image.rows; ++row) {
    for (std::int64_t col = 0; col < image.cols; ++col) {
      if (col) out << " ";
      out << image.symbols[static_cast<std::size_t>(row * image.cols + col)];
    }
    out << "\n";
  }
  flush_or_throw(out, path);
}

FeatureImage load_image(const std::string& path) {
  std::ifstream in = open_in(path);
  FeatureImage image;
  if (!(in >> image.rows >> image.cols >> image.alphabet_size))
    throw FormatError(path + ": bad image header, expected 'rows cols K'");
  if (image.rows <= 0 || image.cols <= 0 || image.alphabet_size <= 0)
    throw FormatError(path + ": image dimensions must be positive");
  image.symbols.resize(static_cast<std::size_t>(image.rows * image.cols));
  for (auto& sym : image.symbols) {
    if (!(in >> sym)) throw FormatError(path + ": truncated pixel data");
    if (sym < 0 || sym >= image.alphabet_size)
      throw FormatError(path + ": symbol " + std::to_string(sym) + " outside alphabet");
  }
  return image;
}

void save_scene_sidecar(const Scene& scene, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "partshare-scene 1\n";
  out << "seed " << scene.seed << "\n";
  const int H = scene.objects.empty() ? 0 : scene.objects.front().levels_H;
  const int r = scene.objects.empty() ? 0 : scene.objects.front().fan_out_r;
  out << "shape " << H << " " << r << "\n";
  out << "objects " << scene.objects.size() << "\n";
  for (const ParseTree& parse : scene.objects) write_parse(out, parse);
  flush_or_throw(out, path);
}

Scene load_scene_sidecar(const std::string& path) {
  LineReader r(path);
  {
    auto ls = r.next("partshare-scene");
    if (parse_int(r, ls) != 1) r.fail("unsupported scene version");
  }
  Scene scene;
  auto ls = r.next("seed");
  std::uint64_t seed = 0;
  if (!(ls >> seed)) r.fail("missing seed");
  scene.seed = seed;
  ls = r.next("shape");
  const int H = static_cast<int>(parse_int(r, ls));
  const int fan_out = static_cast<int>(parse_int(r, ls));
  ls = r.next("objects");
  const std::int64_t count = parse_int(r, ls);
  if (count < 0) r.fail("negative object count");
  scene.objects.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i)
    scene.objects.push_back(read_parse(r, H, fan_out));
  return scene;
}

void save_detections_csv(const std::vector<Detection>& detections, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "root_cell,type,score\n";
  for (const Detection& d : detections)
    out << d.root_cell << "," << d.type_ordinal << "," << fmt_g17(d.score) << "\n";
  flush_or_throw(out, path);
}

void save_detection_parses(const std::vector<Detection>& detections, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "partshare-parses 1\n";
  const int H = detections.empty() ? 0 : detections.front().parse.levels_H;
  const int r = detections.empty() ? 0 : detections.front().parse.fan_out_r;
  out << "shape " << H << " " << r << "\n";
  out << "parses " << detections.size() << "\n";
  for (const Detection& d : detections) write_parse(out, d.parse);
  flush_or_throw(out, path);
}

std::vector<ParseTree> load_parse_list(const std::string& path) {
  LineReader r(path);
  {
    auto ls = r.next("partshare-parses");
    if (parse_int(r, ls) != 1) r.fail("unsupported parse-list version");
  }
  auto ls = r.next("shape");
  const int H = static_cast<int>(parse_int(r, ls));
  const int fan_out = static_cast<int>(parse_int(r, ls));
  ls = r.next("parses");
  const std::int64_t count = parse_int(r, ls);
  if (count < 0) r.fail("negative parse count");
  std::vector<ParseTree> parses;
  parses.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) parses.push_back(read_parse(r, H, fan_out));
  return parses;
}

void save_counter_envelope(const CounterEnvelope& env, const std::string& path) {
  json j{{"params",
          {{"base_cells", env.params.base_cells},
           {"scale", env.params.q.str()},
           {"levels", env.params.levels_H},
           {"fan_out", env.params.fan_out_r},
           {"configs_per_part", env.params.configs_per_part},
           {"level_sizes", env.params.level_sizes}}},
         {"mode", detect_mode_name(env.mode)},
         {"counters", counter_json(env.counter)}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  flush_or_throw(out, path);
}

CounterEnvelope load_counter_envelope(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  try {
    CounterEnvelope env;
    const json& p = j.at("params");
    env.params.base_cells = p.at("base_cells").get<std::int64_t>();
    env.params.q = parse_rational(p.at("scale").get<std::string>());
    env.params.levels_H = p.at("levels").get<int>();
    env.params.fan_out_r = p.at("fan_out").get<int>();
    env.params.configs_per_part = p.at("configs_per_part").get<int>();
    env.params.level_sizes = p.at("level_sizes").get<std::vector<std::int64_t>>();
    env.mode = detect_mode_from_name(j.at("mode").get<std::string>());
    const json& c = j.at("counters");
    env.counter.config_evaluations = int_vec(c, "config_evaluations");
    env.counter.max_selections = int_vec(c, "max_selections");
    env.counter.top_down_evaluations = int_vec(c, "top_down_evaluations");
    env.counter.model_selection_comparisons = int_vec(c, "model_selection_comparisons");
    const std::size_t n = env.counter.config_evaluations.size();
    if (n == 0 || env.counter.max_selections.size() != n ||
        env.counter.top_down_evaluations.size() != n ||
        env.counter.model_selection_comparisons.size() != n)
      throw FormatError(path + ": counter arrays disagree on length");
    return env;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_schedule(const ScheduleReport& report, const std::string& path) {
  json stages = json::array();
  for (const ScheduleStage& s : report.stages) {
    const char* kind = s.kind == ScheduleStage::Kind::BottomUp    ? "bottom-up"
                       : s.kind == ScheduleStage::Kind::Selection ? "selection"
                                                                  : "top-down";
    stages.push_back({{"kind", kind}, {"level", s.level}, {"width", s.width}});
  }
  json j{{"depth", report.depth()},
         {"neuron_count", report.neuron_count},
         {"stages", std::move(stages)}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  flush_or_throw(out, path);
}

void save_regime_curve(const RegimeReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "level,dictionary_size,shared_cost,unshared_cost,neurons\n";
  for (const RegimeReport::Row& row : report.rows)
    out << row.level << "," << row.dictionary_size << "," << row.shared_cost.str()
        << "," << row.unshared_cost.str() << "," << row.neurons.str() << "\n";
  flush_or_throw(out, path);
}

void save_reconcile(const ReconcileReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "level,predicted,measured,delta,exact\n";
  for (const ReconcileRow& row : report.rows)
    out << row.level << "," << row.predicted << "," << row.measured << ","
        << row.delta << "," << (row.exact ? "yes" : "no") << "\n";
  flush_or_throw(out, path);
}

}  // namespace partshare::io
