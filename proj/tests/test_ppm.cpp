#include <cmath>

#include "doctest.h"
#include "vomc/model.hpp"
#include "vomc/ppm.hpp"

using namespace vomc;

namespace {

PpmModel worked_model() {
  PpmModel model(3, 2);
  for (int x : {0, 1, 2, 0, 1, 1, 2}) model.update(Symbol(x));  // a b c a b b c
  return model;
}

}  // namespace

TEST_CASE("worked table counts are reproduced exactly") {
  const PpmModel m = worked_model();
  // order 2 (suffixes newest-first)
  CHECK(m.context_counts(std::vector<Symbol>{1, 0}) == std::vector<std::uint32_t>{0, 1, 1});
  CHECK(m.context_counts(std::vector<Symbol>{1, 1}) == std::vector<std::uint32_t>{0, 0, 1});
  CHECK(m.context_counts(std::vector<Symbol>{2, 1}) == std::vector<std::uint32_t>{1, 0, 0});
  CHECK(m.context_counts(std::vector<Symbol>{0, 2}) == std::vector<std::uint32_t>{0, 1, 0});
  // order 1
  CHECK(m.context_counts(std::vector<Symbol>{0}) == std::vector<std::uint32_t>{0, 2, 0});
  CHECK(m.context_counts(std::vector<Symbol>{1}) == std::vector<std::uint32_t>{0, 1, 2});
  CHECK(m.context_counts(std::vector<Symbol>{2}) == std::vector<std::uint32_t>{1, 0, 0});
  // order 0 totals the whole string
  CHECK(m.context_counts(std::vector<Symbol>{}) == std::vector<std::uint32_t>{2, 3, 2});
  CHECK(m.context_total(std::vector<Symbol>{}) == 7);
}

TEST_CASE("worked escape-chain predictions") {
  const PpmModel m = worked_model();  // current context is (b,c)
  CHECK(m.predict_symbol(0) == 0.5);
  CHECK(m.predict_symbol(1) == 3.0 / 32.0);   // 1/2 * 1/2 * 3/8
  CHECK(m.predict_symbol(2) == 1.0 / 16.0);   // 1/2 * 1/2 * 2/8

  const auto eff = m.effective_vector();
  double total = 0.0;
  for (double p : eff) {
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
    total += p;
  }
  const auto vec = m.predict_vector();
  double sum = 0.0;
  for (std::size_t q = 0; q < vec.size(); ++q) {
    CHECK(vec[q] == doctest::Approx(eff[q] / total).epsilon(1e-12));
    sum += vec[q];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fresh model falls straight through to uniform") {
  PpmModel m(3, 2, std::vector<Symbol>{0, 0});
  for (int a = 0; a < 3; ++a) CHECK(m.predict_symbol(Symbol(a)) == 1.0 / 3.0);
  const auto vec = m.predict_vector();
  for (double p : vec) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("unseen long contexts are skipped without escape charges") {
  PpmModel m(2, 2);
  for (int x : {0, 0, 1}) m.update(Symbol(x));
  // current context (a,b) was never observed, context (b) neither;
  // prediction drops straight to order 0: p(a) = 2/(3+1)
  CHECK(m.predict_symbol(0) == 0.5);
  // at order 0, b has count 1: p(b) = 1/4
  CHECK(m.predict_symbol(1) == 0.25);
}

TEST_CASE("order-0 totals count every update") {
  PpmModel m(3, 2, std::vector<Symbol>{0, 0});
  Rng rng(51);
  for (int i = 1; i <= 200; ++i) {
    m.update(Symbol(rng.next_below(3)));
    CHECK(m.context_total(std::vector<Symbol>{}) == std::uint64_t(i));
  }
  CHECK(m.position() == 200);
}

TEST_CASE("long-run predictions converge to the max-order conditionals") {
  // fixed first-order Markov source
  ContextTree chain(3, 1);
  chain.branch(0);
  chain.leaf_dist(chain.child(0, 0)) = {0.1, 0.7, 0.2};
  chain.leaf_dist(chain.child(0, 1)) = {0.5, 0.1, 0.4};
  chain.leaf_dist(chain.child(0, 2)) = {0.3, 0.3, 0.4};
  Rng rng(52);
  const auto seq = generate_sequence(chain, 10000, std::vector<Symbol>{0}, rng);

  PpmModel m(3, 1, seq.initial_context);
  double l1_sum = 0.0;
  std::size_t measured = 0;
  std::vector<Symbol> ctx(1);
  for (std::size_t i = 1; i <= seq.length(); ++i) {
    if (i > seq.length() - 1000) {
      context_before(seq, i, ctx);
      const auto& truth = chain.leaf_dist(chain.classify(ctx));
      const auto pred = m.predict_vector();
      double l1 = 0.0;
      for (int q = 0; q < 3; ++q) l1 += std::abs(pred[std::size_t(q)] - truth[std::size_t(q)]);
      l1_sum += l1;
      ++measured;
    }
    m.update(seq.symbols[i - 1]);
  }
  CHECK(l1_sum / double(measured) < 0.05);
}
