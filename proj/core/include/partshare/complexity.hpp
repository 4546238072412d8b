#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partshare/dictionary.hpp"
#include "partshare/inference.hpp"
#include "partshare/lattice.hpp"
#include "partshare/rational.hpp"

namespace partshare {

/// Everything the cost predictors need about a run.
struct ComplexityParams {
  std::int64_t base_cells = 0;  // |D_0|
  Rational q;                   // lattice scale factor
  int levels_H = 0;
  int fan_out_r = 0;
  int configs_per_part = 0;     // C_r
  std::vector<std::int64_t> level_sizes;  // |M_1|..|M_H|

  static ComplexityParams of(const HierarchicalDictionary&, const LatticeHierarchy&);
  friend bool operator==(const ComplexityParams&, const ComplexityParams&) = default;
};

/// Bottom-up cost of one object searched over all positions, assuming its
/// r^(H-h) subparts per level are distinct: exact per-level terms
/// |D_0|*C_r*q^h*r^(H-h) plus the geometric-series closed form (a double).
struct BottomUpPrediction {
  std::vector<Rational> per_level;  // h = 1..H
  Rational exact_total;
  double closed_form = 0.0;
};
BottomUpPrediction predict_bottom_up(const ComplexityParams&);

/// Cost of the model-selection stage at the top level.
struct ModelSelectionPrediction {
  Rational single;  // q^H * |D_0|, one model
  Rational shared;  // |D_0| * q^H * (H+1), the shared multi-object pipeline
};
ModelSelectionPrediction predict_model_selection(const ComplexityParams&);

/// Top-down parse-recovery cost for at most q^H*|D_0| roots. `closed_form`
/// is the geometric-series bound (which drops the h=H term); `direct_sum`
/// is the exact per-root sum times the root count. fan_out = 1 has no
/// geometric form; both fields then carry the direct sum.
struct TopDownPrediction {
  double closed_form = 0.0;
  Rational direct_sum;
};
TopDownPrediction predict_top_down_bound(const ComplexityParams&);

/// Infinite-series approximation |D_0|*C_r*q*r^(H-1)/(1-q/r) of the
/// single-object bottom-up cost (relative error (q/r)^H).
double predict_single_object(const ComplexityParams&);

/// No-sharing cost of |M_H| objects: |M_H| times the single-object series.
double predict_multi_no_sharing(const ComplexityParams&);

/// Shared bottom-up cost: exact per-level terms |D_0|*C_r*|M_h|*q^h.
struct SharedPrediction {
  std::vector<Rational> per_level;  // h = 1..H
  Rational exact_total;
};
SharedPrediction predict_shared(const ComplexityParams&);

/// "Neurons" needed by the parallel implementation per level:
/// |M_h|*q^h*|D_0|; totals predict_shared / C_r exactly.
struct NeuronPrediction {
  std::vector<Rational> per_level;  // h = 1..H
  Rational exact_total;
};
NeuronPrediction predict_neurons(const ComplexityParams&);

/// Per-level cost table plus mechanical verdicts for a size regime.
struct RegimeReport {
  struct Row {
    int level = 0;
    std::int64_t dictionary_size = 0;  // |M_h|
    Rational shared_cost;              // |D_0|*C_r*|M_h|*q^h
    Rational unshared_cost;            // |M_H|*|D_0|*C_r*q^h*r^(H-h)
    Rational neurons;                  // |M_h|*q^h*|D_0|
  };
  struct Verdict {
    std::string name;
    bool holds = false;
    std::string detail;
  };
  RegimeKind regime = RegimeKind::UserSupplied;
  std::vector<Row> rows;               // h = 1..H
  Rational shared_total;
  Rational unshared_total;
  Rational neuron_total;
  double multi_no_sharing = 0.0;       // series approximation
  int parallel_depth = 0;              // 2H + 1
  std::vector<Verdict> verdicts;
};

/// Builds the table and evaluates the regime's characteristic claim:
/// growth  -> per-level shared cost flat (max/min <= 1 + 1e-9);
/// decrease-> shared equals unshared per level (within 1e-9 relative);
/// user    -> shared total strictly below the no-sharing total.
RegimeReport regime_report(RegimeKind regime, const ComplexityParams&);

/// Measured-vs-predicted bottom-up work, per level.
struct ReconcileRow {
  int level = 0;
  std::int64_t predicted = 0;
  std::int64_t measured = 0;
  std::int64_t delta = 0;  // measured - predicted
  bool exact = false;
};
struct ReconcileReport {
  std::vector<ReconcileRow> rows;
  bool all_exact = false;
};

/// Counter with the parameters and mode of the run that produced it, so a
/// reconciliation can detect stale inputs.
struct CounterEnvelope {
  ComplexityParams params;
  DetectMode mode = DetectMode::SerialShared;
  OpCounter counter;
};

/// Compares measured per-level config evaluations against the exact
/// prediction for the run's mode: shared/parallel -> |M_h|*C_r*q^h*|D_0|;
/// unshared -> |M_H| * (per-object no-sharing terms). Throws ParamMismatch
/// when `params` and the envelope's stamped params differ.
ReconcileReport reconcile(const ComplexityParams& params, const CounterEnvelope&);

}  // namespace partshare
