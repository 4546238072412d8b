// Release gate: every blocking behavior, one [PASS]/[FAIL] line each.
// Returns 1 when anything fails, so CI can hang the build on it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "helpers.hpp"
#include "partshare/complexity.hpp"
#include "partshare/generative.hpp"
#include "partshare/inference.hpp"
#include "partshare/io.hpp"
#include "partshare/verify.hpp"

using namespace partshare;

namespace {

int failures_total = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures_total;
}

std::string describe(const std::vector<const VerifyFailure*>& failures) {
  if (failures.empty()) return "";
  const VerifyFailure& f = *failures.front();
  return " (first: seed " + std::to_string(f.seed) + " " + f.check + ": " + f.detail +
         ")";
}

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t v = 1;
  for (int i = 0; i < exp; ++i) v *= base;
  return v;
}

RegimeSpec user_regime(int H) {
  const std::vector<std::int64_t> pattern{3, 6, 4, 2};
  return RegimeSpec::user(std::vector<std::int64_t>(pattern.begin(),
                                                    pattern.begin() + H));
}

// --- criteria 1 and 2 share one verification sweep -------------------------

struct SweepOutcome {
  int instances = 0;
  double seconds = 0.0;
  std::vector<const VerifyFailure*> oracle;    // oracle-*, mode-identity, rescore
  std::vector<const VerifyFailure*> sharing;   // sharing-bitwise
  std::vector<const VerifyFailure*> counters;  // counter-* (criterion 3 input)
};

SweepOutcome run_sweep(const SweepResult& sweep, double seconds) {
  SweepOutcome out;
  out.instances = sweep.instances;
  out.seconds = seconds;
  for (const VerifyFailure& f : sweep.failures) {
    if (f.check == "sharing-bitwise")
      out.sharing.push_back(&f);
    else if (f.check == "counter-shared" || f.check == "counter-unshared")
      out.counters.push_back(&f);
    else
      out.oracle.push_back(&f);
  }
  return out;
}

void criterion_1(const SweepOutcome& sweep) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "exact DP equals the exhaustive oracle on %d random instances (%.1fs)",
                sweep.instances, sweep.seconds);
  const bool ok =
      sweep.instances >= 200 && sweep.oracle.empty() && sweep.seconds < 120.0;
  report(1, ok, buf + describe(sweep.oracle));
}

void criterion_2(const SweepOutcome& sweep) {
  report(2, sweep.sharing.empty(),
         "shared bottom-up tables equal per-object tables bitwise on the sweep "
         "instances" +
             describe(sweep.sharing));
}

// --- criterion 3: shared counters equal the per-level formula exactly ------

void criterion_3(const SweepOutcome& sweep) {
  int combos = 0;
  for (const Rational q : {Rational(1, 2), Rational(1, 4)}) {
    const std::int64_t k = q.den;
    for (const int r : {2, 3}) {
      for (int H = 1; H <= 4; ++H) {
        const auto lat = LatticeHierarchy::build(Extent::line(ipow(k, H)), q, H);
        for (const RegimeSpec& spec :
             {RegimeSpec::growth(1), user_regime(H), RegimeSpec::decrease()}) {
          const auto dict =
              build_regime_dictionary(spec, GridKind::OneD, k, H, r, 2, 17);
          const auto image = testutil::random_image(lat, dict.alphabet_size(), 23);
          const DetectResult run =
              detect_all(image, dict, lat, 0.0, DetectMode::SerialShared);
          const ComplexityParams p = ComplexityParams::of(dict, lat);
          const ReconcileReport rec =
              reconcile(p, CounterEnvelope{p, DetectMode::SerialShared, run.counter});
          Rational qh = Rational::integer(1);
          for (int h = 1; h <= H; ++h) {
            qh = qh * q;
            const Rational expect =
                qh * Rational::integer(p.level_sizes[static_cast<std::size_t>(h - 1)] *
                                       p.configs_per_part * p.base_cells);
            if (!rec.all_exact || !expect.is_integer() ||
                expect.as_int() !=
                    run.counter.config_evaluations[static_cast<std::size_t>(h)]) {
              report(3, false,
                     "counter/formula mismatch at q=" + q.str() + " r=" +
                         std::to_string(r) + " H=" + std::to_string(H) + " regime " +
                         spec.name() + " level " + std::to_string(h));
              return;
            }
          }
          ++combos;
        }
      }
    }
  }
  report(3, sweep.counters.empty() && combos == 48,
         "measured shared evaluations match the per-level formula on all " +
             std::to_string(combos) + " parameter combinations" +
             describe(sweep.counters));
}

// --- criterion 4: unshared counters and the closed-form series -------------

void criterion_4() {
  for (const Rational q : {Rational(1, 2), Rational(1, 4)}) {
    const std::int64_t k = q.den;
    for (const int r : {2, 3}) {
      for (int H = 1; H <= 4; ++H) {
        const auto lat = LatticeHierarchy::build(Extent::line(ipow(k, H)), q, H);
        const auto dict = build_regime_dictionary(RegimeSpec::decrease(),
                                                  GridKind::OneD, k, H, r, 2, 19);
        const auto image = testutil::random_image(lat, dict.alphabet_size(), 29);
        const DetectResult run =
            detect_all(image, dict, lat, 0.0, DetectMode::SerialUnshared);
        const ComplexityParams p = ComplexityParams::of(dict, lat);
        const ReconcileReport rec = reconcile(
            p, CounterEnvelope{p, DetectMode::SerialUnshared, run.counter});
        const BottomUpPrediction bu = predict_bottom_up(p);
        std::int64_t measured_total = 0;
        bool terms_ok = rec.all_exact;
        for (int h = 1; h <= H; ++h) {
          measured_total += run.counter.config_evaluations[static_cast<std::size_t>(h)];
          Rational qh = Rational::integer(1);
          for (int i = 0; i < h; ++i) qh = qh * q;
          const Rational expect = qh * Rational::integer(p.configs_per_part *
                                                         ipow(r, H - h) * p.base_cells);
          terms_ok = terms_ok &&
                     bu.per_level[static_cast<std::size_t>(h - 1)] == expect;
        }
        const bool sum_ok =
            bu.exact_total.is_integer() && bu.exact_total.as_int() == measured_total;
        const double rho = q.to_double() / r;
        const double rel =
            (bu.closed_form - bu.exact_total.to_double()) / bu.closed_form;
        const bool closed_ok =
            rel >= -1e-12 && rel <= std::pow(rho, H) * (1.0 + 1e-9);
        if (!(terms_ok && sum_ok && closed_ok)) {
          report(4, false,
                 "single-object counter/series mismatch at q=" + q.str() + " r=" +
                     std::to_string(r) + " H=" + std::to_string(H));
          return;
        }
      }
    }
  }
  report(4, true,
         "per-object counts equal the finite sum exactly and the closed form "
         "within the dropped-tail bound on all 16 parameter combinations");
}

// --- criterion 5: flat-curve regime ----------------------------------------

void criterion_5() {
  const Rational q(1, 4);
  std::vector<double> ratio(7, 0.0);
  for (int H = 1; H <= 6; ++H) {
    ComplexityParams p;
    p.base_cells = 4096;
    p.q = q;
    p.levels_H = H;
    p.fan_out_r = 2;
    p.configs_per_part = 4;
    p.level_sizes = RegimeSpec::growth(1).level_sizes(H, p.fan_out_r, q);
    const RegimeReport rep = regime_report(RegimeKind::ExponentialGrowth, p);
    bool flat = !rep.verdicts.empty() && rep.verdicts.front().holds;
    for (const auto& row : rep.rows) flat = flat && row.shared_cost == rep.rows[0].shared_cost;
    if (!flat) {
      report(5, false, "shared per-level cost is not flat at H=" + std::to_string(H));
      return;
    }
    ratio[static_cast<std::size_t>(H)] =
        predict_multi_no_sharing(p) / predict_shared(p).exact_total.to_double();
  }
  for (int H = 2; H <= 6; ++H) {
    const double factor = ratio[static_cast<std::size_t>(H)] /
                          ratio[static_cast<std::size_t>(H - 1)];
    if (!(factor >= 4.0 * (1.0 - 1e-12))) {
      report(5, false,
             "no-sharing/sharing ratio grew by only " + std::to_string(factor) +
                 "x at H=" + std::to_string(H));
      return;
    }
  }
  report(5, true,
         "per-level shared cost is exactly flat for H=1..6 and the no-sharing "
         "ratio grows by at least 4x per level");
}

// --- criterion 6: no-gain regime -------------------------------------------

void criterion_6() {
  ComplexityParams p;
  p.base_cells = 8;
  p.q = Rational(1, 2);
  p.levels_H = 3;
  p.fan_out_r = 2;
  p.configs_per_part = 2;
  p.level_sizes = {4, 2, 1};
  const RegimeReport rep = regime_report(RegimeKind::ExponentialDecrease, p);
  bool ok = !rep.verdicts.empty() && rep.verdicts.front().holds;
  for (const auto& row : rep.rows) ok = ok && row.shared_cost == row.unshared_cost;

  const auto lat = LatticeHierarchy::build(Extent::line(8), Rational(1, 2), 3);
  const auto dict =
      build_regime_dictionary(RegimeSpec::decrease(), GridKind::OneD, 2, 3, 2, 2, 5);
  const SharingStats stats = dict.shared_subpart_count();
  for (int h = 0; h < 3; ++h)
    for (const std::int64_t uses :
         stats.levels[static_cast<std::size_t>(h)].per_part)
      ok = ok && uses == 1;  // every part has exactly one parent

  const auto image = testutil::random_image(lat, dict.alphabet_size(), 37);
  const auto shared_run = detect_all(image, dict, lat, 0.0, DetectMode::SerialShared);
  const auto unshared_run =
      detect_all(image, dict, lat, 0.0, DetectMode::SerialUnshared);
  const SharedPrediction ps = predict_shared(ComplexityParams::of(dict, lat));
  for (int h = 1; h <= 3; ++h) {
    const auto idx = static_cast<std::size_t>(h);
    const Rational& predicted = ps.per_level[idx - 1];
    ok = ok && shared_run.counter.config_evaluations[idx] ==
                   unshared_run.counter.config_evaluations[idx] &&
         predicted.is_integer() &&
         predicted.as_int() == shared_run.counter.config_evaluations[idx];
  }
  report(6, ok,
         "single-parent dictionary: shared and unshared costs coincide per "
         "level, predicted and measured");
}

// --- criterion 7: parallel schedule depth and neuron count ------------------

void criterion_7() {
  for (int H = 1; H <= 6; ++H) {
    const auto lat =
        LatticeHierarchy::build(Extent::line(ipow(2, H)), Rational(1, 2), H);
    const auto dict = testutil::chain_dictionary(H);
    const auto image = testutil::random_image(lat, dict.alphabet_size(), 41);
    const DetectResult run =
        detect_all(image, dict, lat, -1e300, DetectMode::ParallelSim);
    if (!run.schedule || run.detections.empty()) {
      report(7, false, "parallel run produced no schedule at H=" + std::to_string(H));
      return;
    }
    const ScheduleReport& sched = *run.schedule;
    int bu = 0, sel = 0, td = 0;
    bool order_ok = true;
    for (std::size_t i = 0; i < sched.stages.size(); ++i) {
      switch (sched.stages[i].kind) {
        case ScheduleStage::Kind::BottomUp:
          order_ok = order_ok && i == static_cast<std::size_t>(bu);
          ++bu;
          break;
        case ScheduleStage::Kind::Selection: ++sel; break;
        case ScheduleStage::Kind::TopDown: ++td; break;
      }
    }
    const NeuronPrediction neurons =
        predict_neurons(ComplexityParams::of(dict, lat));
    const bool ok = order_ok && bu == H && sel == 1 && td <= H &&
                    sched.depth() == 2 * H + 1 &&
                    neurons.exact_total.is_integer() &&
                    sched.neuron_count == neurons.exact_total.as_int() &&
                    sched.neuron_count == ipow(2, H) - 1;
    if (!ok) {
      report(7, false, "schedule shape wrong at H=" + std::to_string(H));
      return;
    }
  }
  report(7, true,
         "parallel schedules run H bottom-up + 1 selection + <=H top-down "
         "stages with the predicted neuron count, H=1..6");
}

// --- criterion 8: generative/detection round trip through the CLI ----------

void criterion_8() {
  testutil::TempDir tmp;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto tag = std::to_string(seed);
    auto planted = testutil::make_planted(static_cast<int>(seed % 4), seed);
    const Scene scene =
        sample_scene(planted.dict, planted.lat, planted.plant_types, seed);
    io::save_dictionary(planted.dict, tmp.file("dict-" + tag + ".txt"));
    io::save_image(scene.image, tmp.file("image-" + tag + ".txt"));
    const std::string out_dir = tmp.file("run-" + tag);
    testutil::write_file(tmp.file("cfg-" + tag + ".ini"),
                         planted.lattice_ini + "[dictionary]\nfile = " +
                             tmp.file("dict-" + tag + ".txt") + "\n[scene]\nimage = " +
                             tmp.file("image-" + tag + ".txt") +
                             "\n[inference]\nthreshold = 0\n[output]\ndir = " +
                             out_dir + "\n");
    const tools::ExperimentConfig cfg =
        tools::ExperimentConfig::load(tmp.file("cfg-" + tag + ".ini"));
    std::ostringstream out, err;
    if (tools::run_command("detect", cfg, out, err) != 0) {
      report(8, false, "detect failed at seed " + tag + ": " + err.str());
      return;
    }
    const auto rows = testutil::read_detections_csv(out_dir + "/detections.csv");
    std::vector<std::pair<std::int64_t, int>> found, expected;
    for (const auto& row : rows) found.emplace_back(std::get<0>(row), std::get<1>(row));
    for (const ParseTree& obj : scene.objects)
      expected.emplace_back(obj.root().cell, obj.object_type());
    std::sort(expected.begin(), expected.end());
    if (found != expected) {
      report(8, false, "detections differ from the planted scene at seed " + tag);
      return;
    }
    const auto parses = io::load_parse_list(out_dir + "/parses.txt");
    if (parses.size() != scene.objects.size()) {
      report(8, false, "parse count differs at seed " + tag);
      return;
    }
    for (const ParseTree& parse : parses) {
      bool matched = false;
      for (const ParseTree& obj : scene.objects)
        if (obj.root().cell == parse.root().cell)
          matched = parse.leaf_set(planted.lat) == obj.leaf_set(planted.lat);
      if (!matched) {
        report(8, false, "parse leaf set differs at seed " + tag);
        return;
      }
    }
  }
  report(8, true,
         "detect recovers the planted roots, types and leaf sets on 100 seeded "
         "noise-free scenes");
}

// --- criterion 9: regime curves through the CLI ----------------------------

void criterion_9() {
  testutil::TempDir tmp;
  int runs = 0;
  for (const int r : {2, 3, 4}) {
    const std::string fan = std::to_string(r);
    const std::vector<std::pair<std::string, std::string>> experiments{
        {"growth",
         "[lattice]\nkind = 1d\ncols = 4096\nscale = 1/4\nlevels = 6\n"
         "[dictionary]\nregime = growth\ngrowth_constant = 1\nfan_out = " +
             fan + "\nconfigs_per_part = 2\n"},
        {"decrease",
         "[lattice]\nkind = 1d\ncols = 64\nscale = 1/2\nlevels = 6\n"
         "[dictionary]\nregime = decrease\nfan_out = " +
             fan + "\nconfigs_per_part = 2\n"},
        {"user",
         "[lattice]\nkind = 1d\ncols = 64\nscale = 1/2\nlevels = 6\n"
         "[dictionary]\nregime = user\nsizes = 6, 10, 12, 6, 3, 2\nfan_out = " +
             fan + "\nconfigs_per_part = 2\n"},
    };
    for (const auto& [label, body] : experiments) {
      const std::string out_dir = tmp.file(label + "-r" + fan);
      testutil::write_file(tmp.file("cfg.ini"),
                           body + "[output]\ndir = " + out_dir + "\n");
      const tools::ExperimentConfig cfg =
          tools::ExperimentConfig::load(tmp.file("cfg.ini"));
      std::ostringstream out, err;
      const int rc = tools::run_command("complexity", cfg, out, err);
      const std::string text = out.str();
      const bool ok = rc == 0 && text.find("verdict ") != std::string::npos &&
                      text.find("FAILS") == std::string::npos &&
                      std::filesystem::exists(out_dir + "/regime_curve.csv");
      if (!ok) {
        report(9, false, "regime " + label + " with fan-out " + fan + " failed: " +
                             err.str());
        return;
      }
      ++runs;
    }
  }
  report(9, true,
         "all " + std::to_string(runs) +
             " regime curves pass their mechanical verdicts through the CLI");
}

}  // namespace

int main() {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult sweep = run_verification_sweep(VerifyOptions{200, 1, 10'000'000, false});
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const SweepOutcome outcome = run_sweep(sweep, seconds);
    criterion_1(outcome);
    criterion_2(outcome);
    criterion_3(outcome);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance run aborted: %s\n", e.what());
    return 1;
  }
  return failures_total == 0 ? 0 : 1;
}
