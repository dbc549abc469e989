#pragma once

// Context-tree weighting in the log domain.
//
// Per suffix s of the current context the state keeps
//   log_pe : Dirichlet marginal evidence of the node's counts, maintained as
//            a running product of predictive ratios;
//   log_pw : mixture evidence, log(lambda*pe + (1-lambda)*prod_children pw),
//            with log_pw = log_pe at the depth bound.
// Children never visited carry pw = 1 exactly (empty evidence), so the node
// store stays sparse.  The mixture step runs through log-sum-exp; linear
// p^w underflows after a few thousand symbols.

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "vomc/model.hpp"

namespace vomc {

// log of the Dirichlet marginal evidence of a counting vector (the Gamma
// closed form of the CTW p^e definition).
double log_dirichlet_evidence(std::span<const std::uint32_t> counts,
                              std::span<const double> alpha);
double log_dirichlet_evidence(std::span<const double> counts,
                              std::span<const double> alpha);

// Everything the path-blending predictors need about the current context
// path: per-depth evidence values, counts, and the children of each path
// node (the on-path child included).
struct PathSnapshot {
  int depth = 0;
  std::uint64_t position = 0;
  std::vector<Symbol> context;                       // most-recent-first, length depth
  std::vector<double> log_pe;                        // l = 0..D
  std::vector<double> log_pw;                        // l = 0..D
  std::vector<std::vector<std::uint32_t>> counts;    // l = 0..D
  std::vector<std::vector<double>> child_log_pw;     // index l-1: log pw of q*s_{l-1}, q in A
};

class CtwState {
 public:
  // `padding` is chronological and must hold at least D symbols; only the
  // last D are used.
  CtwState(CtwPrior prior, std::span<const Symbol> padding);

  const CtwPrior& prior() const { return prior_; }
  std::uint64_t position() const { return position_; }

  // P(x_{n+1} = a | history) for every a, via a hypothetical update of the
  // context path (D+1 nodes per candidate symbol).
  void predict(std::span<double> out) const;
  std::vector<double> predict() const;

  void update(Symbol x);

  // log p^w at the root = log of the Bayes mixture probability of x_1^n.
  double sequence_log_prob() const { return root_log_pw_; }

  PathSnapshot path_snapshot() const;

  std::size_t node_count() const { return nodes_.size(); }
  // cumulative count of node evaluations, for cost accounting in the bench
  std::uint64_t touch_count() const { return touches_; }

 private:
  struct Node {
    double log_pe = 0.0;
    double log_pw = 0.0;
    double child_lw_sum = 0.0;  // sum of log_pw over visited children
    std::uint32_t total = 0;
    std::vector<std::uint32_t> n;
  };

  const Node* find(ContextView suffix) const;
  std::uint64_t path_key(int len) const;

  CtwPrior prior_;
  double ln_lambda_ = 0.0;
  double ln_one_minus_lambda_ = 0.0;
  double alpha_sum_ = 0.0;
  std::vector<Symbol> recent_;  // most-recent-first context window
  std::uint64_t position_ = 0;
  double root_log_pw_ = 0.0;
  std::unordered_map<std::uint64_t, Node> nodes_;
  mutable std::uint64_t touches_ = 0;
};

// log P_pi(x_1^n | padding) by running the CTW procedure over the sequence.
double ctw_sequence_logprob(const CtwPrior& prior, const SourceSequence& seq);

// All full A-ary tree structures of depth <= D (shapes only).  Refuses when
// the count t(D), t(d) = 1 + t(d-1)^A, exceeds 10^6.
std::vector<ContextTree> enumerate_trees(int alphabet, int depth);
std::uint64_t enumerate_tree_count(int alphabet, int depth);

// Independent ground truth for the root mixture identity: sum over
// pi_D(T) * prod_leaves (Dirichlet evidence of the leaf's counts).
double bayes_oracle_logprob(const CtwPrior& prior, const SourceSequence& seq);

// Posterior over enumerated trees given the sequence; returns per-tree log
// posterior (normalized); the leaf-mass oracle for the blend weights.
std::vector<double> tree_log_posterior(const CtwPrior& prior, const SourceSequence& seq,
                                       const std::vector<ContextTree>& trees);

}  // namespace vomc
