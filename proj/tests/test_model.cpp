#include <cmath>
#include <map>

#include "doctest.h"
#include "vomc/ctw.hpp"
#include "vomc/model.hpp"

using namespace vomc;

namespace {

// Fig.-3 style tree over {a,b,c}: leaves (b), (c), (a,a), (b,a), (c,a)
ContextTree fig3_tree() {
  ContextTree tree(3, 2);
  tree.branch(0);           // children by newest symbol: a, b, c
  tree.branch(tree.child(0, 0));  // the a-child splits on the older symbol
  return tree;
}

}  // namespace

TEST_CASE("near-degenerate lambda pins the tree structure") {
  Rng rng(1);
  CtwPrior stop = CtwPrior::jeffreys(3, 4, 1.0 - 1e-12);
  for (int k = 0; k < 200; ++k) CHECK(sample_tree_structure(stop, rng).leaf_count() == 1);

  CtwPrior grow = CtwPrior::jeffreys(3, 2, 1e-12);
  for (int k = 0; k < 200; ++k) {
    const auto tree = sample_tree_structure(grow, rng);
    CHECK(tree.leaf_count() == 9);  // complete depth-2 ternary tree
    CHECK(tree.leaf_count_at_depth_bound() == 9);
  }
}

TEST_CASE("root-only frequency matches the prior mass") {
  CtwPrior prior = CtwPrior::jeffreys(2, 2, 0.15);
  Rng rng(2);
  int root_only = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k)
    if (sample_tree_structure(prior, rng).leaf_count() == 1) ++root_only;
  CHECK(std::abs(root_only / double(n) - 0.15) < 0.01);
}

TEST_CASE("Monte Carlo tree frequencies match pi_D for every enumerable shape") {
  CtwPrior prior = CtwPrior::jeffreys(2, 2, 0.3);
  const auto family = enumerate_trees(2, 2);
  std::vector<int> hits(family.size(), 0);
  Rng rng(3);
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto tree = sample_tree_structure(prior, rng);
    bool found = false;
    for (std::size_t t = 0; t < family.size(); ++t)
      if (tree.structure_equals(family[t])) {
        hits[t]++;
        found = true;
        break;
      }
    REQUIRE(found);
  }
  for (std::size_t t = 0; t < family.size(); ++t) {
    const double p = std::exp(tree_log_prior(family[t], prior.lambda));
    const double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(hits[t] / double(n) - p) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("sampled trees are full and classify uniquely") {
  CtwPrior prior = CtwPrior::jeffreys(3, 3, 0.2);
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    ContextTree tree = sample_tree_structure(prior, rng);
    sample_leaf_distributions(tree, prior.alpha, rng);
    tree.validate();
    for (int probe = 0; probe < 200; ++probe) {
      const auto ctx = sample_uniform_context(3, 3, rng);
      const std::vector<Symbol> recent(ctx.rbegin(), ctx.rend());
      const int leaf = tree.classify(recent);
      CHECK(tree.is_leaf(leaf));
      const auto suffix = tree.suffix_of(leaf);
      for (std::size_t d = 0; d < suffix.size(); ++d) CHECK(suffix[d] == recent[d]);
    }
  }
}

TEST_CASE("Dirichlet leaf sampling has the right moments") {
  ContextTree root_only(3, 0);
  const std::vector<double> alpha{0.5, 0.5, 0.5};
  Rng rng(5);
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    ContextTree tree = root_only;
    sample_leaf_distributions(tree, alpha, rng);
    const auto& p = tree.leaf_dist(0);
    double total = 0.0;
    for (double v : p) total += v;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    sum += p[0];
    sumsq += p[0] * p[0];
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean - 1.0 / 3.0) < 0.01);
  // Dirichlet variance a(1-m)m/(a0+1) = (1/3)(2/3)/2.5
  CHECK(std::abs(var - (1.0 / 3.0) * (2.0 / 3.0) / 2.5) < 0.005);

  CHECK_THROWS(sample_leaf_distributions(root_only, std::vector<double>{0.5, -1.0, 0.5}, rng));
}

TEST_CASE("non-CTW leaves zero exactly one symbol") {
  Rng rng(6);
  ContextTree two(2, 0);
  sample_nonctw_leaf_distributions(two, rng);
  const auto& p2 = two.leaf_dist(0);
  CHECK(((p2[0] == 0.0 && p2[1] == 1.0) || (p2[0] == 1.0 && p2[1] == 0.0)));

  int zero_counts[3] = {0, 0, 0};
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    ContextTree tree(3, 0);
    sample_nonctw_leaf_distributions(tree, rng);
    const auto& p = tree.leaf_dist(0);
    int zeros = 0, zero_at = -1;
    double total = 0.0;
    for (int s = 0; s < 3; ++s) {
      total += p[std::size_t(s)];
      if (p[std::size_t(s)] == 0.0) {
        ++zeros;
        zero_at = s;
      } else {
        CHECK(p[std::size_t(s)] > 0.0);
      }
    }
    REQUIRE(zeros == 1);
    CHECK(std::abs(total - 1.0) <= 1e-12);
    zero_counts[zero_at]++;
  }
  for (int s = 0; s < 3; ++s)
    CHECK(std::abs(zero_counts[s] / double(n) - 1.0 / 3.0) < 0.02);
}

TEST_CASE("classify walks the suffix most-recent-first") {
  const ContextTree tree = fig3_tree();
  // context (..., c, a): newest a then c selects leaf (c,a)
  const std::vector<Symbol> ctx{0, 2};
  const int leaf = tree.classify(ctx);
  const auto suffix = tree.suffix_of(leaf);
  REQUIRE(suffix.size() == 2);
  CHECK(suffix[0] == 0);
  CHECK(suffix[1] == 2);

  ContextTree root_only(3, 2);
  CHECK(root_only.classify(ctx) == 0);

  ContextTree complete(3, 2);
  complete.branch(0);
  for (int s = 0; s < 3; ++s) complete.branch(complete.child(0, Symbol(s)));
  const std::vector<Symbol> ba{0, 1};  // (b,a) newest-first
  const auto got = complete.suffix_of(complete.classify(ba));
  CHECK(got == ba);
}

TEST_CASE("generation follows the leaf distributions") {
  Rng rng(8);
  ContextTree det = fig3_tree();
  for (int id = 0; id < det.node_count(); ++id)
    if (det.is_leaf(id)) det.leaf_dist(id) = {1.0, 0.0, 0.0};
  const auto all_zero = generate_sequence(det, 100, std::vector<Symbol>{1, 2}, rng);
  for (Symbol x : all_zero.symbols) CHECK(x == 0);
  CHECK(true_model_logloss(det, all_zero) == 0.0);

  ContextTree iid(3, 0);
  iid.leaf_dist(0) = {0.2, 0.3, 0.5};
  const auto seq = generate_sequence(iid, 100000, std::vector<Symbol>{}, rng);
  double freq[3] = {0, 0, 0};
  for (Symbol x : seq.symbols) freq[x] += 1.0 / double(seq.length());
  CHECK(std::abs(freq[0] - 0.2) < 0.01);
  CHECK(std::abs(freq[1] - 0.3) < 0.01);
  CHECK(std::abs(freq[2] - 0.5) < 0.01);

  Rng r1(99), r2(99);
  const auto s1 = generate_sequence(iid, 500, std::vector<Symbol>{}, r1);
  const auto s2 = generate_sequence(iid, 500, std::vector<Symbol>{}, r2);
  CHECK(s1.symbols == s2.symbols);
}

TEST_CASE("per-leaf conditional frequencies match the source") {
  Rng rng(9);
  CtwPrior prior = CtwPrior::jeffreys(3, 3, 0.15);
  ContextTree tree = sample_tree_structure(prior, rng);
  sample_leaf_distributions(tree, prior.alpha, rng);
  const auto seq =
      generate_sequence(tree, 20000, sample_uniform_context(3, 3, rng), rng);

  std::map<int, std::array<std::uint64_t, 3>> visits;
  std::vector<Symbol> ctx(3);
  for (std::size_t i = 1; i <= seq.length(); ++i) {
    context_before(seq, i, ctx);
    visits[tree.classify(ctx)][seq.symbols[i - 1]] += 1;
  }
  for (const auto& [leaf, counts] : visits) {
    const double n = double(counts[0] + counts[1] + counts[2]);
    if (n < 1000) continue;
    const auto& p = tree.leaf_dist(leaf);
    for (int s = 0; s < 3; ++s) {
      const double sigma = std::sqrt(std::max(p[std::size_t(s)] * (1 - p[std::size_t(s)]), 1e-9) / n);
      CHECK(std::abs(counts[std::size_t(s)] / n - p[std::size_t(s)]) <= 5.0 * sigma + 1e-9);
    }
  }
}

TEST_CASE("true model log-loss worked values") {
  ContextTree uniform(3, 0);
  uniform.leaf_dist(0) = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  Rng rng(10);
  const auto seq = generate_sequence(uniform, 64, std::vector<Symbol>{}, rng);
  CHECK(true_model_logloss(uniform, seq) == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  ContextTree half(3, 0);
  half.leaf_dist(0) = {0.5, 0.5, 0.0};
  SourceSequence alt;
  alt.alphabet = 3;
  for (int i = 0; i < 10; ++i) alt.symbols.push_back(Symbol(i % 2));
  CHECK(true_model_logloss(half, alt) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  alt.symbols.push_back(2);  // zero-probability symbol
  CHECK(std::isinf(true_model_logloss(half, alt)));
}

TEST_CASE("tree JSON round-trips bit-exactly") {
  Rng rng(11);
  CtwPrior prior = CtwPrior::jeffreys(3, 3, 0.15);
  ContextTree tree = sample_tree_structure(prior, rng);
  sample_leaf_distributions(tree, prior.alpha, rng);

  const std::string text = tree_to_json(tree, prior.lambda);
  const TreeFile parsed = tree_from_json(text);
  CHECK(parsed.lambda_used == prior.lambda);
  CHECK(parsed.tree.structure_equals(tree));
  for (int id = 0; id < tree.node_count(); ++id)
    if (tree.is_leaf(id)) {
      const auto& a = tree.leaf_dist(id);
      const auto& b = parsed.tree.leaf_dist(id);
      for (std::size_t s = 0; s < a.size(); ++s) CHECK(a[s] == b[s]);
    }
  CHECK(tree_to_json(parsed.tree, parsed.lambda_used) == text);
}

TEST_CASE("sequence JSON round-trips") {
  SourceSequence seq;
  seq.alphabet = 3;
  seq.initial_context = {2, 0, 1};
  seq.symbols = {0, 1, 2, 2, 1};
  seq.tree_id = 5;
  seq.seed = 77;
  const auto back = sequence_from_json(sequence_to_json(seq));
  CHECK(back.initial_context == seq.initial_context);
  CHECK(back.symbols == seq.symbols);
  CHECK(back.tree_id == seq.tree_id);
  CHECK(back.seed == seq.seed);
}

TEST_CASE("context_before dips into the padding and errors past it") {
  SourceSequence seq;
  seq.alphabet = 3;
  seq.initial_context = {1, 2};  // x_{-1}=1, x_0=2
  seq.symbols = {0, 1};
  std::vector<Symbol> ctx(3);
  context_before(seq, 2, ctx);  // before x_2: x_1=0, x_0=2, x_{-1}=1
  CHECK(ctx == std::vector<Symbol>{0, 2, 1});
  std::vector<Symbol> too_long(5);
  CHECK_THROWS(context_before(seq, 2, too_long));
}
