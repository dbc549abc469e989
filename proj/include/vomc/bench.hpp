#pragma once

// Experiment harness: samples test sources, segments each generated sequence
// into context windows, resets every predictor per window, and aggregates
// per-position log-loss into rate curves.
//
// The per-tree kernel is embarrassingly parallel and runs under OpenMP; the
// reduction is a fixed-order pairwise sum over per-tree partials, so serial
// and parallel execution produce byte-identical output.  The serial path is
// kept as the reference implementation and the speedup benchmark compares
// the two.

#include <cstdint>
#include <string>
#include <vector>

#include "vomc/model.hpp"
#include "vomc/predictor.hpp"

namespace vomc {

enum class PriorKind { ctw, nonctw };
enum class RateUnit { nats, bits };

struct ExperimentConfig {
  PriorKind prior_kind = PriorKind::ctw;
  int alphabet = 3;
  int depth = 3;        // source max order; non-CTW suites draw it uniformly from [1, depth]
  double lambda = 0.15;
  double alpha = 0.5;   // symmetric Dirichlet parameter
  int num_trees = 256;  // K_test
  std::size_t seq_len = 5120;  // N_k per tree
  std::size_t window = 512;    // context window N
  std::vector<std::string> predictors{"ctw"};  // tokens: ctw | blend | ppm[:k] |
                                               // syntf[:variant] | genie | uniform
  std::uint64_t seed = 1;
  RateUnit unit = RateUnit::nats;
  bool parallel = true;
  int threads = 0;  // 0 = runtime default

  void validate() const;
};

struct RateCurve {
  std::string predictor;
  std::vector<double> mean;     // per-position mean loss in the configured unit
  std::vector<double> stderr_;  // standard error of those means
  double window_average = 0.0;
  double early_average = 0.0;  // first 10% of positions
  double late_average = 0.0;   // last 10%
  std::uint64_t windows = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RateCurve> curves;
  // trees whose evaluation threw; curves then aggregate the survivors only
  // and the summary manifest marks the run as partial
  std::vector<std::string> failures;
  // mean conditional entropy at the visited leaves (genie oracle companion);
  // only populated when the genie predictor runs
  double genie_entropy_average = 0.0;
  bool has_genie = false;
  // mean node evaluations per prediction for the two CTW routes
  double ctw_touches_per_prediction = 0.0;
  double blend_touches_per_prediction = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

const RateCurve* find_curve(const ExperimentResult& result, const std::string& name);

// position,mean,stderr,movavg16 rows (raw means plus a trailing-window
// moving average; presentation smoothing is left to the consumer)
std::string curve_csv(const RateCurve& curve);

// window-average / early / late table plus the qualitative ordering flags
std::string comparison_table(const ExperimentResult& result);

std::string summary_json(const ExperimentResult& result);

// Parses a predictor token into a config; genie is handled by the harness
// itself and is rejected here.
PredictorConfig parse_predictor_token(const std::string& token, const ExperimentConfig& config);

}  // namespace vomc
