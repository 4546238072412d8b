#include "partshare/complexity.hpp"

#include <cmath>

namespace partshare {
namespace {

void check_params(const ComplexityParams& p) {
  if (p.base_cells < 1) throw ParamMismatch("|D_0| must be positive");
  if (p.q.num <= 0 || p.q.num >= p.q.den) throw ParamMismatch("q must lie in (0,1)");
  if (p.levels_H < 0) throw ParamMismatch("H must be nonnegative");
  if (p.fan_out_r < 1) throw ParamMismatch("fan-out must be positive");
  if (p.configs_per_part < 1) throw ParamMismatch("C_r must be positive");
  if (static_cast<int>(p.level_sizes.size()) != p.levels_H)
    throw ParamMismatch("level_sizes must list |M_1|..|M_H|");
}

Rational pow_int(std::int64_t base, int exp) { return Rational::integer(base).pow(exp); }

}  // namespace

ComplexityParams ComplexityParams::of(const HierarchicalDictionary& dict,
                                      const LatticeHierarchy& lat) {
  if (dict.levels() != lat.levels())
    throw ParamMismatch("dictionary H does not match the lattice");
  ComplexityParams p;
  p.base_cells = lat.cells(0);
  p.q = lat.scale_factor();
  p.levels_H = dict.levels();
  p.fan_out_r = dict.fan_out();
  p.configs_per_part = dict.configs_per_part();
  p.level_sizes = dict.level_sizes_above_base();
  return p;
}

BottomUpPrediction predict_bottom_up(const ComplexityParams& p) {
  check_params(p);
  BottomUpPrediction out;
  out.exact_total = Rational::integer(0);
  for (int h = 1; h <= p.levels_H; ++h) {
    Rational term = p.q.pow(h) * pow_int(p.fan_out_r, p.levels_H - h) *
                    Rational::integer(p.base_cells * p.configs_per_part);
    out.per_level.push_back(term);
    out.exact_total = out.exact_total + term;
  }
  const double q = p.q.to_double();
  const double r = static_cast<double>(p.fan_out_r);
  const double d0cr = static_cast<double>(p.base_cells) *
                      static_cast<double>(p.configs_per_part);
  if (p.fan_out_r == 1 || p.levels_H == 0) {
    out.closed_form = out.exact_total.to_double();  // no geometric shortcut
  } else {
    out.closed_form = d0cr * (q * std::pow(r, p.levels_H - 1) / (1.0 - q / r)) *
                      (1.0 - std::pow(q / r, p.levels_H));
  }
  return out;
}

ModelSelectionPrediction predict_model_selection(const ComplexityParams& p) {
  check_params(p);
  ModelSelectionPrediction out;
  out.single = p.q.pow(p.levels_H) * Rational::integer(p.base_cells);
  out.shared = out.single * Rational::integer(p.levels_H + 1);
  return out;
}

TopDownPrediction predict_top_down_bound(const ComplexityParams& p) {
  check_params(p);
  TopDownPrediction out;
  Rational roots = p.q.pow(p.levels_H) * Rational::integer(p.base_cells);
  Rational direct = Rational::integer(0);
  for (int h = 1; h <= p.levels_H; ++h)
    direct = direct + roots * Rational::integer(p.configs_per_part) *
                          pow_int(p.fan_out_r, p.levels_H - h);
  out.direct_sum = direct;
  if (p.fan_out_r == 1) {
    // The geometric form divides by (1 - 1/r); fall back to the direct sum.
    out.closed_form = direct.to_double();
  } else {
    const double r = static_cast<double>(p.fan_out_r);
    out.closed_form = roots.to_double() * static_cast<double>(p.configs_per_part) *
                      (std::pow(r, p.levels_H - 1) / (1.0 - 1.0 / r)) *
                      (1.0 - std::pow(1.0 / r, p.levels_H - 1));
  }
  return out;
}

double predict_single_object(const ComplexityParams& p) {
  check_params(p);
  if (p.levels_H == 0) return 0.0;
  const double q = p.q.to_double();
  const double r = static_cast<double>(p.fan_out_r);
  // q < 1 <= r, so the denominator below is always positive. A single final
  // division keeps integral cases exact (e.g. 1024/7 times 7).
  const double numerator = static_cast<double>(p.base_cells) *
                           static_cast<double>(p.configs_per_part) * q *
                           std::pow(r, p.levels_H - 1);
  return numerator / (1.0 - q / r);
}

double predict_multi_no_sharing(const ComplexityParams& p) {
  check_params(p);
  if (p.levels_H == 0) return 0.0;
  const double q = p.q.to_double();
  const double r = static_cast<double>(p.fan_out_r);
  const double numerator = static_cast<double>(p.level_sizes.back()) *
                           static_cast<double>(p.base_cells) *
                           static_cast<double>(p.configs_per_part) * q *
                           std::pow(r, p.levels_H - 1);
  return numerator / (1.0 - q / r);
}

SharedPrediction predict_shared(const ComplexityParams& p) {
  check_params(p);
  SharedPrediction out;
  out.exact_total = Rational::integer(0);
  for (int h = 1; h <= p.levels_H; ++h) {
    Rational term = p.q.pow(h) *
                    Rational::integer(p.level_sizes[static_cast<std::size_t>(h) - 1]) *
                    Rational::integer(p.base_cells * p.configs_per_part);
    out.per_level.push_back(term);
    out.exact_total = out.exact_total + term;
  }
  return out;
}

NeuronPrediction predict_neurons(const ComplexityParams& p) {
  check_params(p);
  NeuronPrediction out;
  out.exact_total = Rational::integer(0);
  for (int h = 1; h <= p.levels_H; ++h) {
    Rational term = p.q.pow(h) *
                    Rational::integer(p.level_sizes[static_cast<std::size_t>(h) - 1]) *
                    Rational::integer(p.base_cells);
    out.per_level.push_back(term);
    out.exact_total = out.exact_total + term;
  }
  return out;
}

RegimeReport regime_report(RegimeKind regime, const ComplexityParams& p) {
  check_params(p);
  if (p.levels_H < 1) throw ParamMismatch("regime report needs H >= 1");
  RegimeReport report;
  report.regime = regime;
  const SharedPrediction shared = predict_shared(p);
  const NeuronPrediction neurons = predict_neurons(p);
  const BottomUpPrediction per_object = predict_bottom_up(p);
  const std::int64_t num_objects = p.level_sizes.back();

  report.shared_total = shared.exact_total;
  report.neuron_total = neurons.exact_total;
  report.unshared_total = Rational::integer(0);
  for (int h = 1; h <= p.levels_H; ++h) {
    RegimeReport::Row row;
    row.level = h;
    row.dictionary_size = p.level_sizes[static_cast<std::size_t>(h) - 1];
    row.shared_cost = shared.per_level[static_cast<std::size_t>(h) - 1];
    row.unshared_cost =
        per_object.per_level[static_cast<std::size_t>(h) - 1] * Rational::integer(num_objects);
    row.neurons = neurons.per_level[static_cast<std::size_t>(h) - 1];
    report.unshared_total = report.unshared_total + row.unshared_cost;
    report.rows.push_back(row);
  }
  report.multi_no_sharing = predict_multi_no_sharing(p);
  report.parallel_depth = 2 * p.levels_H + 1;

  switch (regime) {
    case RegimeKind::ExponentialGrowth: {
      double lo = report.rows.front().shared_cost.to_double();
      double hi = lo;
      for (const auto& row : report.rows) {
        lo = std::min(lo, row.shared_cost.to_double());
        hi = std::max(hi, row.shared_cost.to_double());
      }
      const bool flat = hi <= lo * (1.0 + 1e-9);
      report.verdicts.push_back(
          {"flat-shared-curve", flat,
           "per-level shared cost max/min = " + std::to_string(hi / lo)});
      break;
    }
    case RegimeKind::ExponentialDecrease: {
      bool equal = true;
      for (const auto& row : report.rows) {
        const double a = row.shared_cost.to_double();
        const double b = row.unshared_cost.to_double();
        if (std::abs(a - b) > 1e-9 * std::max(std::abs(a), std::abs(b))) equal = false;
      }
      report.verdicts.push_back(
          {"shared-equals-unshared", equal,
           "per-level shared vs unshared cost, relative tolerance 1e-9"});
      break;
    }
    case RegimeKind::UserSupplied: {
      const bool below =
          report.shared_total.to_double() < report.unshared_total.to_double();
      report.verdicts.push_back(
          {"shared-below-unshared", below,
           "shared total " + report.shared_total.str() + " vs unshared total " +
               report.unshared_total.str()});
      break;
    }
  }
  return report;
}

ReconcileReport reconcile(const ComplexityParams& params, const CounterEnvelope& env) {
  check_params(params);
  if (!(params == env.params))
    throw ParamMismatch("counter envelope was produced under different parameters");
  if (env.counter.levels() != params.levels_H)
    throw ParamMismatch("counter depth does not match the parameters");

  ReconcileReport report;
  report.all_exact = true;
  for (int h = 1; h <= params.levels_H; ++h) {
    Rational predicted;
    if (env.mode == DetectMode::SerialUnshared) {
      // No-sharing accounting: every object re-evaluates its r^(H-h) parts.
      predicted = params.q.pow(h) *
                  pow_int(params.fan_out_r, params.levels_H - h) *
                  Rational::integer(params.base_cells * params.configs_per_part) *
                  Rational::integer(params.level_sizes.back());
    } else {
      predicted = params.q.pow(h) *
                  Rational::integer(params.level_sizes[static_cast<std::size_t>(h) - 1]) *
                  Rational::integer(params.base_cells * params.configs_per_part);
    }
    if (!predicted.is_integer())
      throw ParamMismatch("prediction at level " + std::to_string(h) +
                          " is not integral; |D_0| and q are inconsistent");
    ReconcileRow row;
    row.level = h;
    row.predicted = predicted.as_int();
    row.measured = env.counter.config_evaluations[static_cast<std::size_t>(h)];
    row.delta = row.measured - row.predicted;
    row.exact = row.delta == 0;
    if (!row.exact) report.all_exact = false;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace partshare
