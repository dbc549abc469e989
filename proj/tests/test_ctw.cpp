#include <cmath>

#include "doctest.h"
#include "vomc/ctw.hpp"

using namespace vomc;

namespace {

SourceSequence make_seq(int alphabet, std::vector<Symbol> padding, std::vector<Symbol> body) {
  SourceSequence seq;
  seq.alphabet = alphabet;
  seq.initial_context = std::move(padding);
  seq.symbols = std::move(body);
  return seq;
}

SourceSequence random_case(std::uint64_t seed, CtwPrior& prior_out, int max_a, int max_d,
                           std::size_t max_len) {
  Rng pick(seed, 0);
  const int a = 2 + int(pick.next_below(std::uint32_t(max_a - 1)));
  const int d = int(pick.next_below(std::uint32_t(max_d + 1)));
  const double lambdas[] = {0.05, 0.15, 0.5, 0.9};
  prior_out = CtwPrior::jeffreys(a, d, lambdas[pick.next_below(4)]);
  Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
  ContextTree tree = sample_tree_structure(prior_out, rng_structure);
  sample_leaf_distributions(tree, prior_out.alpha, rng_leaves);
  return generate_sequence(tree, pick.next_below(std::uint32_t(max_len + 1)),
                           sample_uniform_context(a, d + 1, rng_init), rng_body);
}

}  // namespace

TEST_CASE("fresh state predicts the prior mean") {
  CtwState state(CtwPrior::jeffreys(3, 2, 0.15), std::vector<Symbol>{0, 0});
  for (double p : state.predict()) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(state.sequence_log_prob() == 0.0);
}

TEST_CASE("two-tree mixture worked example") {
  // A=2, D=1, lambda=0.15, alpha=(.5,.5), padding x_0=0, observe (1,0):
  // p^w = 0.15 * 0.125 + 0.85 * 0.25 = 0.23125
  const CtwPrior prior = CtwPrior::jeffreys(2, 1, 0.15);
  const auto seq = make_seq(2, {0}, {1, 0});
  CHECK(ctw_sequence_logprob(prior, seq) ==
        doctest::Approx(std::log(0.23125)).epsilon(1e-12));
  CHECK(bayes_oracle_logprob(prior, seq) ==
        doctest::Approx(std::log(0.23125)).epsilon(1e-12));
}

TEST_CASE("evidence follows the sequential Dirichlet product") {
  // first step from a fresh root: alpha(a)/alpha_sum
  CtwState first(CtwPrior::jeffreys(3, 0, 0.2), std::vector<Symbol>{});
  first.update(1);
  CHECK(first.sequence_log_prob() == doctest::Approx(std::log(0.5 / 1.5)).epsilon(1e-12));

  // two identical symbols: (1/3) * (1.5/2.5) = 0.2
  CtwState twice(CtwPrior::jeffreys(3, 0, 0.2), std::vector<Symbol>{});
  twice.update(0);
  twice.update(0);
  CHECK(twice.sequence_log_prob() == doctest::Approx(std::log(0.2)).epsilon(1e-12));
}

TEST_CASE("depth-bound nodes weight to their own evidence") {
  CtwState state(CtwPrior::jeffreys(3, 2, 0.3), std::vector<Symbol>{1, 2});
  Rng rng(31);
  for (int i = 0; i < 40; ++i) {
    state.update(Symbol(rng.next_below(3)));
    const auto snap = state.path_snapshot();
    CHECK(snap.log_pw[2] == snap.log_pe[2]);
  }
}

TEST_CASE("empty sequence has probability one") {
  const CtwPrior prior = CtwPrior::jeffreys(3, 2, 0.15);
  CHECK(ctw_sequence_logprob(prior, make_seq(3, {0, 1}, {})) == 0.0);
}

TEST_CASE("chain rule consistency") {
  for (std::uint64_t k = 0; k < 10; ++k) {
    CtwPrior prior;
    const auto seq = random_case(Rng::derive(0x77, k), prior, 3, 3, 120);
    CtwState state(prior, seq.initial_context);
    double acc = 0.0;
    for (Symbol x : seq.symbols) {
      const auto p = state.predict();
      double sum = 0.0;
      for (double v : p) {
        CHECK(v > 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
      acc += std::log(p[x]);
      state.update(x);
    }
    CHECK(acc == doctest::Approx(state.sequence_log_prob()).epsilon(1e-9));
  }
}

TEST_CASE("tree enumeration counts and prior normalization") {
  CHECK(enumerate_tree_count(2, 0) == 1);
  CHECK(enumerate_tree_count(2, 1) == 2);
  CHECK(enumerate_tree_count(2, 2) == 5);
  CHECK(enumerate_tree_count(2, 3) == 26);
  CHECK(enumerate_tree_count(3, 2) == 9);
  CHECK(enumerate_trees(2, 3).size() == 26);
  CHECK(enumerate_trees(3, 2).size() == 9);
  CHECK_THROWS(enumerate_trees(3, 4));  // 730^3 + 1 blows the guard

  for (const double lambda : {0.05, 0.5, 0.9}) {
    for (const auto& [a, d] : {std::pair{2, 3}, std::pair{3, 2}}) {
      double total = 0.0;
      for (const auto& tree : enumerate_trees(a, d))
        total += std::exp(tree_log_prior(tree, lambda));
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("CTW equals the brute-force Bayes mixture") {
  for (std::uint64_t k = 0; k < 30; ++k) {
    CtwPrior prior;
    const auto seq = random_case(Rng::derive(0x71EE, k), prior, 3, 2, 50);
    CHECK(ctw_sequence_logprob(prior, seq) ==
          doctest::Approx(bayes_oracle_logprob(prior, seq)).epsilon(1e-9));
  }
}

TEST_CASE("predictions equal the oracle's conditional ratios") {
  for (std::uint64_t k = 0; k < 10; ++k) {
    CtwPrior prior;
    SourceSequence seq = random_case(Rng::derive(0x0C0, k), prior, 3, 2, 50);
    CtwState state(prior, seq.initial_context);
    for (Symbol x : seq.symbols) state.update(x);
    const auto predicted = state.predict();

    const double base = bayes_oracle_logprob(prior, seq);
    for (int a = 0; a < prior.alphabet; ++a) {
      SourceSequence extended = seq;
      extended.symbols.push_back(Symbol(a));
      const double conditional = std::exp(bayes_oracle_logprob(prior, extended) - base);
      CHECK(predicted[std::size_t(a)] == doctest::Approx(conditional).epsilon(1e-9));
    }
  }
}

TEST_CASE("a four-symbol alphabet works end to end") {
  CtwPrior prior;
  const auto seq = random_case(Rng::derive(0x4A, 2), prior, 4, 1, 40);
  if (prior.alphabet == 4) {
    CHECK(ctw_sequence_logprob(prior, seq) ==
          doctest::Approx(bayes_oracle_logprob(prior, seq)).epsilon(1e-9));
  }
  CtwPrior four = CtwPrior::jeffreys(4, 1, 0.2);
  SourceSequence seq4 = make_seq(4, {0, 3}, {3, 1, 0, 2, 3, 3, 1});
  CHECK(ctw_sequence_logprob(four, seq4) ==
        doctest::Approx(bayes_oracle_logprob(four, seq4)).epsilon(1e-9));
}

TEST_CASE("forcing the root-only tree reduces the oracle to plain evidence") {
  // lambda ~ 1 puts all prior mass on the root-only tree
  CtwPrior prior = CtwPrior::jeffreys(2, 2, 1.0 - 1e-12);
  const auto seq = make_seq(2, {0, 0}, {1, 1, 0, 1});
  std::vector<std::uint32_t> counts{1, 3};
  CHECK(bayes_oracle_logprob(prior, seq) ==
        doctest::Approx(log_dirichlet_evidence(counts, prior.alpha)).epsilon(1e-9));
}

TEST_CASE("alphabet relabeling leaves the sequence probability unchanged") {
  CtwPrior prior;
  const auto seq = random_case(Rng::derive(0xBEEF, 3), prior, 3, 3, 200);
  const int perm[3] = {2, 0, 1};
  SourceSequence relabeled = seq;
  for (auto& x : relabeled.initial_context) x = Symbol(perm[x]);
  for (auto& x : relabeled.symbols) x = Symbol(perm[x]);
  CHECK(ctw_sequence_logprob(prior, seq) == ctw_sequence_logprob(prior, relabeled));
}

TEST_CASE("appending a symbol never increases the log probability") {
  CtwPrior prior;
  const auto seq = random_case(Rng::derive(0xACE, 1), prior, 3, 3, 300);
  CtwState state(prior, seq.initial_context);
  double prev = 0.0;
  for (Symbol x : seq.symbols) {
    state.update(x);
    CHECK(state.sequence_log_prob() <= prev + 1e-12);
    prev = state.sequence_log_prob();
  }
}

TEST_CASE("log gamma closed form matches the sequential evidence") {
  // feed counts sequentially and compare against the Gamma formula
  const CtwPrior prior = CtwPrior::jeffreys(3, 0, 0.5);
  CtwState state(prior, std::vector<Symbol>{});
  std::vector<std::uint32_t> counts(3, 0);
  Rng rng(33);
  for (int i = 0; i < 60; ++i) {
    const Symbol x = Symbol(rng.next_below(3));
    state.update(x);
    counts[x] += 1;
    CHECK(state.sequence_log_prob() ==
          doctest::Approx(log_dirichlet_evidence(counts, prior.alpha)).epsilon(1e-10));
  }
}
