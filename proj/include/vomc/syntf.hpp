#pragma once

// Exact executor of the idealized (D+2)-layer attention construction in the
// hard-attention limit.  Every softmax attention is evaluated at infinite
// temperature sharpness as an exact selection/average, and each layer is
// implemented as its limiting semantic operation on an explicit embedding
// layout; weight matrices are never materialized.
//
// Layer map (per position, after observing x_1..x_i):
//   layer 1   context extension: stack one-hot x_i..x_{i-M}
//   layer 2   statistics collection: forward/backward suffix statistics
//   layer-2 FF: rebuild counting vectors from the statistics via the
//             telescoping identity, then Dirichlet means, per-depth log
//             evidence (Gamma closed form), and the depth-D log p^w
//   layers 3..D+2: induction; fetch the A sibling log p^w values of the
//             current path node, emit the path-blending weight increment delta,
//             and push log p^w one level shallower
//   output    normalize the deltas into blend weights and mix the means
//
// Sibling retrieval: the literal attention fetches the value stored by the
// *latest earlier position* whose suffix matches, which lags the current
// count state by exactly one observation (the successor of that occurrence
// was not yet counted when the value was written).  The simulator defaults
// to current-state values, which makes the stack agree with CTW; the stale
// variant reproduces the literal retrieval so the gap can be measured.

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "vomc/ctw.hpp"
#include "vomc/model.hpp"
#include "vomc/predictor.hpp"
#include "vomc/stats.hpp"

namespace vomc {

enum class FeatureVariant : int {
  full = 0,              // "TF 2-0" feature set
  no_counts = 1,         // forward statistics only
  total_counts_only = 2, // forward statistics plus the position count
  all_counts = 3,        // exact counting vectors handed over directly
};

const char* feature_variant_name(FeatureVariant v);
std::optional<FeatureVariant> feature_variant_from_name(std::string_view name);

enum class SiblingRetrieval : int { current = 0, stale = 1 };

struct SynTfConfig {
  CtwPrior prior;
  FeatureVariant variant = FeatureVariant::full;
  SiblingRetrieval retrieval = SiblingRetrieval::current;
  std::size_t max_window = 512;  // N in the positional triple
};

// Context-extension layer in isolation: one-hot blocks (x_i; ...; x_{i-M}) read off
// the table's current context window.  M = 0 leaves the encoding untouched.
std::vector<std::vector<double>> context_extension_blocks(const CountTable& table, int m_heads);

// Statistics-collection layer in isolation: forward and backward statistics blocks for
// the current path suffixes of length 0..m_stat-1 (M' = m_stat heads).
struct StatisticsBlocks {
  std::vector<std::vector<double>> forward;
  std::vector<std::vector<double>> backward;
};
StatisticsBlocks statistics_blocks(const CountTable& table, int m_stat);

// Segment-structured embedding; block positions follow the construction.
struct EmbeddingVector {
  std::vector<std::vector<double>> onehot;      // x_i .. x_{i-M}, one block each
  std::vector<std::vector<double>> forward;     // g_{i,s_{i,l}},  l = 0..M'-1
  std::vector<std::vector<double>> backward;    // g<-_{i-1,s_{i,l}}
  std::vector<std::vector<double>> predictive;  // p_{i,s_{i,l}}, l = 0..D
  std::vector<double> log_pe;                   // l = 0..D
  std::vector<double> delta;                    // delta[l-1] = ln w_l - ln w_{l-1}
  double log_pw_path = 0.0;                     // carried l^w of the active path node
  std::vector<double> sibling_log_pw;           // scratch filled by induction attention
  std::array<double, 3> pos{1.0, 1.0, 0.0};     // (1, cos(i pi/N), sin(i pi/N))

  void check_invariants(int alphabet) const;  // throws on violation
};

struct LayerTrace {
  EmbeddingVector h1, h2, a2, h3;
  std::vector<EmbeddingVector> induction;  // after layers 3..D+2
  std::vector<double> prediction;
  std::vector<bool> reconstruction_fallback;  // per depth: identity path unseen
};

std::string trace_to_json(const LayerTrace& trace);

class SynTfSimulator {
 public:
  SynTfSimulator(SynTfConfig config, std::span<const Symbol> padding);

  const SynTfConfig& config() const { return config_; }
  std::uint64_t position() const { return table_.position(); }

  std::vector<double> predict() const;
  LayerTrace trace() const;
  void update(Symbol x);

  // current-state log p^w of an arbitrary suffix, evaluated by recursion
  // over the observed subtree (counts + Gamma closed form)
  double subtree_log_pw(ContextView suffix) const;

 private:
  LayerTrace run_pipeline() const;
  std::vector<double> stored_chain() const;  // per-depth l^w for the stale store

  SynTfConfig config_;
  CountTable table_;                 // max order D+1 for the backward blocks
  std::vector<Symbol> recent_;       // most-recent-first, D+1 symbols
  // stale store: per depth, latest written l^w per suffix
  std::vector<std::unordered_map<std::uint64_t, double>> stale_lw_;
};

// Lockstep comparison of current-state vs literal (stale) retrieval.
struct StaleRetrievalReport {
  std::uint64_t positions = 0;
  std::uint64_t differing_positions = 0;
  double max_abs_prediction_gap = 0.0;
  double mean_abs_prediction_gap = 0.0;
  double max_abs_logloss_gap = 0.0;
};

StaleRetrievalReport measure_stale_retrieval(const SynTfConfig& config,
                                             const SourceSequence& seq);

class SynTfPredictor final : public SequentialPredictor {
 public:
  explicit SynTfPredictor(SynTfConfig config);

  int alphabet() const override { return config_.prior.alphabet; }
  void reset(std::span<const Symbol> padding) override;
  void predict(std::span<double> out) const override;
  void update(Symbol x) override;
  std::string name() const override;

 private:
  SynTfConfig config_;
  std::optional<SynTfSimulator> sim_;
};

}  // namespace vomc
