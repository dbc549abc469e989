#pragma once

// Variable-order Markov sources: a full A-ary suffix tree of bounded depth
// with one next-symbol distribution per leaf.  Suffix strings and contexts
// are handled most-recent-first throughout (index 0 = newest symbol), so a
// tree walk from the root consumes the context left to right.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vomc/rng.hpp"

namespace vomc {

using Symbol = std::uint8_t;
using ContextView = std::span<const Symbol>;

struct CtwPrior {
  int alphabet = 3;
  int depth = 3;
  double lambda = 0.15;            // branch-stopping probability
  std::vector<double> alpha;       // Dirichlet parameters, one per symbol

  static CtwPrior jeffreys(int alphabet, int depth, double lambda);
  double alpha_sum() const;
  void validate() const;
};

class ContextTree {
 public:
  ContextTree(int alphabet, int depth_bound);

  int alphabet() const { return alphabet_; }
  int depth_bound() const { return depth_bound_; }

  struct Node {
    std::int32_t first_child = -1;  // children occupy [first_child, first_child + A)
    std::int32_t parent = -1;
    Symbol branch_symbol = 0;       // edge label from parent
    std::int8_t depth = 0;
    std::vector<double> dist;       // leaf-only next-symbol distribution
  };

  int node_count() const { return int(nodes_.size()); }
  const Node& node(int id) const { return nodes_[std::size_t(id)]; }
  bool is_leaf(int id) const { return nodes_[std::size_t(id)].first_child < 0; }
  int child(int id, Symbol s) const { return nodes_[std::size_t(id)].first_child + s; }

  // Turn leaf `id` into an internal node with A fresh leaves; returns the
  // first child id.
  int branch(int id);

  int leaf_count() const;
  int leaf_count_at_depth_bound() const;
  std::vector<int> leaves() const;

  // Unique leaf matching `context` (most-recent-first, length >= leaf depth).
  int classify(ContextView context) const;

  std::vector<double>& leaf_dist(int id);
  const std::vector<double>& leaf_dist(int id) const;

  // Suffix string of a node, most-recent-first; root gives the empty string.
  std::vector<Symbol> suffix_of(int id) const;

  // Throws if a leaf distribution is missing, out of the simplex, or the
  // structure violates the full-tree/depth invariants.
  void validate(bool require_dists = true) const;

  bool structure_equals(const ContextTree& other) const;

 private:
  int alphabet_;
  int depth_bound_;
  std::vector<Node> nodes_;
};

struct SourceSequence {
  int alphabet = 0;
  std::vector<Symbol> initial_context;  // x_{1-P}..x_0, oldest first
  std::vector<Symbol> symbols;          // x_1..x_N
  std::int64_t tree_id = -1;
  std::uint64_t seed = 0;

  std::size_t length() const { return symbols.size(); }
};

// x_{i-1}, x_{i-2}, ... (most-recent-first) for 1-based position i, dipping
// into the initial context as needed.  Throws if the padding runs out.
void context_before(const SourceSequence& seq, std::size_t i, std::span<Symbol> out);

// ---- sampling ----

// Tree shape only: each node below the depth bound stops with probability
// lambda, otherwise branches into A children; depth-bound nodes always stop.
ContextTree sample_tree_structure(const CtwPrior& prior, Rng& rng);

// ln pi_D(T) = ((|L|-1)/(A-1)) ln(1-lambda) + (|L| - |L_D|) ln(lambda)
double tree_log_prior(const ContextTree& tree, double lambda);

void sample_leaf_distributions(ContextTree& tree, std::span<const double> alpha, Rng& rng);

// Per leaf: one uniformly chosen symbol gets probability exactly zero, the
// rest are i.i.d. Uniform(0,1) normalized.
void sample_nonctw_leaf_distributions(ContextTree& tree, Rng& rng);

std::vector<Symbol> sample_uniform_context(int alphabet, int length, Rng& rng);

SourceSequence generate_sequence(const ContextTree& tree, std::size_t n,
                                 std::span<const Symbol> initial_context, Rng& rng);

// Mean of ln(1/p_leaf(x_i)) over the sequence; +inf if the source assigns an
// observed symbol probability zero.
double true_model_logloss(const ContextTree& tree, const SourceSequence& seq);

// Shannon entropy in nats of one leaf's next-symbol distribution.
double leaf_entropy(const ContextTree& tree, int leaf_id);

// ---- serialization ----

struct TreeFile {
  ContextTree tree;
  double lambda_used = 0.0;
};

// Canonical JSON: {"D":..,"lambda_used":..,"alphabet":..,"nodes":[...]} with
// nodes in preorder and probabilities as 17-significant-digit strings so
// doubles round-trip bit-exactly.
std::string tree_to_json(const ContextTree& tree, double lambda_used);
TreeFile tree_from_json(const std::string& text);

std::string sequence_to_json(const SourceSequence& seq);
SourceSequence sequence_from_json(const std::string& text);

}  // namespace vomc
