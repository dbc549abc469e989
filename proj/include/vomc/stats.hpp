#pragma once

// Suffix occurrence counting over a sliding context, plus the forward and
// backward k-gram statistics derived from it.
//
// Conventions shared by every module:
//   * `suffix`/`context` parameters are most-recent-first (index 0 = newest);
//   * `padding` parameters are chronological fragments (x_{1-P}..x_0);
//   * the counting vector n_{i,s}(a) counts emitted symbols only (positions
//     1..i); padding supplies context but is never counted as emitted.
//
// With s stored most-recent-first, extending a suffix by one older symbol q
// (the tree child "q before s") appends q at the back.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vomc/model.hpp"

namespace vomc {

// Base-A packing with a leading sentinel bit so different lengths cannot
// collide.  Throws if the suffix cannot fit in 63 bits.
std::uint64_t pack_suffix(ContextView suffix, int alphabet);

class CountTable {
 public:
  CountTable(int alphabet, int max_order, std::span<const Symbol> padding);

  int alphabet() const { return alphabet_; }
  int max_order() const { return max_order_; }
  std::uint64_t position() const { return position_; }

  // Counts symbol x as following every suffix (length 0..max_order) of the
  // current context, then shifts the context window.
  void update(Symbol x);

  // Counting vector n_{i,s}; all-zero when s never occurred.
  std::vector<std::uint32_t> counts(ContextView suffix) const;
  // Number of occurrences of s followed by an emitted symbol.
  std::uint64_t total(ContextView suffix) const;

  // g_{i,s}(a) = n_{i,s}(a) / total(s); uniform when total(s) = 0.
  std::vector<double> forward_stats(ContextView suffix) const;
  // Backward statistic of the construction: g(a) = total(s extended by older
  // symbol a) / total(s); uniform when total(s) = 0.  Requires |s| < max_order.
  std::vector<double> backward_stats(ContextView suffix) const;

  // Last min(position-aware) max_order symbols, most-recent-first.
  void current_context(std::span<Symbol> out) const;

  // Sorted "suffix(oldest-first),count_0,...,count_{A-1}" rows for goldens.
  std::string dump_csv() const;

 private:
  const std::uint32_t* find(ContextView suffix) const;
  std::uint32_t* find_or_insert(ContextView suffix);

  int alphabet_;
  int max_order_;
  std::uint64_t position_ = 0;
  std::vector<Symbol> recent_;  // most-recent-first window of max_order symbols
  std::unordered_map<std::uint64_t, std::uint32_t> slots_;
  std::vector<std::uint32_t> storage_;  // blocks of A counts
};

// Per-depth counting vectors rebuilt from forward/backward statistics via
// the telescoping identity n(a) = g_l(a) * prod_j gback_j(x_{i-j}) * i.
struct CountReconstruction {
  std::vector<std::vector<double>> counts;  // depth l = 0..L
  std::vector<bool> path_seen;              // totals positive along the path up to l
};

// Reconstructs counts for the suffixes of the table's current context.
// Depths whose path crosses a never-seen suffix are flagged, not fixed up.
CountReconstruction reconstruct_counts(const CountTable& table, int max_depth);

// Pure form used by callers that carry the statistics themselves.
std::vector<double> reconstruct_at_depth(std::span<const double> forward,
                                         std::span<const double> backward_factors,
                                         std::uint64_t position);

}  // namespace vomc
