#pragma once

// PPM with escape method A: every seen context charges one escape count, so
// a symbol with count c out of `total` successor counts costs c/(total+1)
// and falling through costs 1/(total+1).  Prediction starts at the longest
// order whose context has been observed at all (fresh contexts are skipped
// without an escape charge) and bottoms out at a uniform order -1.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vomc/model.hpp"

namespace vomc {

class PpmModel {
 public:
  // Without padding the usable order ramps up as history accumulates.
  PpmModel(int alphabet, int max_order);
  PpmModel(int alphabet, int max_order, std::span<const Symbol> padding);

  int alphabet() const { return alphabet_; }
  int max_order() const { return max_order_; }
  std::uint64_t position() const { return position_; }

  void update(Symbol x);

  // Effective probability of x under the escape chain.
  double predict_symbol(Symbol x) const;
  // Per-symbol effective probabilities; do not sum to 1 across the alphabet.
  std::vector<double> effective_vector() const;
  // Effective probabilities renormalized into the simplex (coder/log-loss form).
  std::vector<double> predict_vector() const;

  // Successor counts of a context suffix (most-recent-first); order = |suffix|.
  std::vector<std::uint32_t> context_counts(ContextView suffix) const;
  std::uint64_t context_total(ContextView suffix) const;

 private:
  const std::uint32_t* find(ContextView suffix) const;

  int alphabet_;
  int max_order_;
  std::uint64_t position_ = 0;
  int available_ = 0;           // usable context length
  std::vector<Symbol> recent_;  // most-recent-first, length max_order
  std::unordered_map<std::uint64_t, std::uint32_t> slots_;
  std::vector<std::uint32_t> storage_;
};

}  // namespace vomc
