#include <cmath>

#include "doctest.h"
#include "vomc/pathblend.hpp"

using namespace vomc;

namespace {

CtwState random_state(std::uint64_t seed, CtwPrior prior, std::size_t n) {
  Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
  ContextTree tree = sample_tree_structure(prior, rng_structure);
  sample_leaf_distributions(tree, prior.alpha, rng_leaves);
  const auto seq = generate_sequence(tree, n, sample_uniform_context(prior.alphabet,
                                                                     prior.depth + 1, rng_init),
                                     rng_body);
  CtwState state(prior, seq.initial_context);
  for (Symbol x : seq.symbols) state.update(x);
  return state;
}

}  // namespace

TEST_CASE("prior weights with no data are the leaf-depth probabilities") {
  CtwState state(CtwPrior::jeffreys(3, 2, 0.15), std::vector<Symbol>{0, 0});
  const auto w = blend_weights(state.path_snapshot(), 0.15);
  REQUIRE(w.omega.size() == 3);
  CHECK(w.omega[0] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(w.omega[1] == doctest::Approx(0.1275).epsilon(1e-12));
  CHECK(w.omega[2] == doctest::Approx(0.7225).epsilon(1e-12));
  double sum = 0.0;
  for (double v : w.omega) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lambda near one collapses the blend onto the root") {
  const double lambda = 1.0 - 1e-12;
  CtwState state(CtwPrior::jeffreys(3, 3, lambda), std::vector<Symbol>{0, 0, 0});
  const auto w = blend_weights(state.path_snapshot(), lambda);
  CHECK(w.omega[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("with no data omega_0 increases with lambda") {
  double prev = 0.0;
  for (double lambda : {0.05, 0.15, 0.5, 0.9}) {
    CtwState state(CtwPrior::jeffreys(2, 3, lambda), std::vector<Symbol>{0, 0, 0});
    const auto w = blend_weights(state.path_snapshot(), lambda);
    CHECK(w.omega[0] > prev);
    prev = w.omega[0];
  }
}

TEST_CASE("depth predictives are Dirichlet posterior means") {
  // fresh: every depth gives the prior mean
  CtwState fresh(CtwPrior::jeffreys(3, 2, 0.15), std::vector<Symbol>{1, 1});
  for (const auto& p : depth_predictives(fresh.path_snapshot(), fresh.prior().alpha))
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // direct substitution: counts (2,0,0), alpha 0.5
  CountTable table2(3, 1, std::vector<Symbol>{0});
  table2.update(0);
  table2.update(0);
  const std::vector<double> alpha{0.5, 0.5, 0.5};
  const std::vector<Symbol> ctx{0};
  const auto preds = depth_predictives(table2, alpha, ctx, 0);
  CHECK(preds[0][0] == doctest::Approx(2.5 / 3.5).epsilon(1e-12));
  CHECK(preds[0][1] == doctest::Approx(0.5 / 3.5).epsilon(1e-12));

  // table-based and snapshot-based forms agree on a shared history
  CtwPrior prior = CtwPrior::jeffreys(3, 2, 0.15);
  Rng rng(41);
  CtwState state(prior, std::vector<Symbol>{2, 2});
  CountTable shadow(3, 2, std::vector<Symbol>{2, 2});
  for (int i = 0; i < 100; ++i) {
    const Symbol x = Symbol(rng.next_below(3));
    state.update(x);
    shadow.update(x);
  }
  const auto snap = state.path_snapshot();
  const auto via_snap = depth_predictives(snap, prior.alpha);
  const auto via_table = depth_predictives(shadow, prior.alpha, snap.context, prior.depth);
  for (std::size_t l = 0; l < via_snap.size(); ++l)
    for (std::size_t q = 0; q < via_snap[l].size(); ++q)
      CHECK(via_snap[l][q] == doctest::Approx(via_table[l][q]).epsilon(1e-12));
}

TEST_CASE("blend prediction is convex") {
  const std::vector<std::vector<double>> same{{0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}};
  const std::vector<double> omega{0.1, 0.3, 0.6};
  const auto out = convex_blend(omega, same);
  CHECK(out[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-12));

  CtwState state = random_state(0x99, CtwPrior::jeffreys(3, 3, 0.15), 200);
  const auto snap = state.path_snapshot();
  const auto preds = depth_predictives(snap, state.prior().alpha);
  const auto w = blend_weights(snap, state.prior().lambda);
  const auto mix = blend_predict(w, preds);
  for (std::size_t q = 0; q < mix.size(); ++q) {
    double lo = 1.0, hi = 0.0;
    for (const auto& p : preds) {
      lo = std::min(lo, p[q]);
      hi = std::max(hi, p[q]);
    }
    CHECK(mix[q] >= lo - 1e-12);
    CHECK(mix[q] <= hi + 1e-12);
  }
}

TEST_CASE("D=0 reduces to the root Dirichlet mean and to CTW") {
  CtwState state = random_state(0xD0, CtwPrior::jeffreys(3, 0, 0.5), 50);
  const auto blended = blend_predict(state);
  const auto direct = state.predict();
  const auto mean = depth_predictives(state.path_snapshot(), state.prior().alpha)[0];
  for (std::size_t q = 0; q < blended.size(); ++q) {
    CHECK(blended[q] == doctest::Approx(mean[q]).epsilon(1e-12));
    CHECK(blended[q] == doctest::Approx(direct[q]).epsilon(1e-9));
  }
}

TEST_CASE("path blending equals the CTW prediction across priors") {
  int done = 0;
  for (std::uint64_t k = 0; done < 60; ++k) {
    Rng pick(Rng::derive(0xB1, k), 0);
    const int a = 2 + int(pick.next_below(2));
    const int d = int(pick.next_below(5));
    const double lambdas[] = {0.05, 0.15, 0.5, 0.9};
    CtwPrior prior = CtwPrior::jeffreys(a, d, lambdas[pick.next_below(4)]);
    CtwState state = random_state(Rng::derive(0xB1, k), prior, pick.next_below(513));
    const auto direct = state.predict();
    const auto blended = blend_predict(state);
    for (std::size_t q = 0; q < direct.size(); ++q)
      CHECK(blended[q] == doctest::Approx(direct[q]).epsilon(1e-9));
    ++done;
  }
}

TEST_CASE("blend weights match the enumerated posterior leaf mass") {
  for (std::uint64_t k = 0; k < 12; ++k) {
    Rng pick(Rng::derive(0xEE, k), 0);
    const int a = 2;
    const int d = 1 + int(pick.next_below(3));
    CtwPrior prior = CtwPrior::jeffreys(a, d, 0.15);

    Rng rng_structure(Rng::derive(0xEE, k), 1), rng_leaves(Rng::derive(0xEE, k), 2),
        rng_init(Rng::derive(0xEE, k), 3), rng_body(Rng::derive(0xEE, k), 4);
    ContextTree tree = sample_tree_structure(prior, rng_structure);
    sample_leaf_distributions(tree, prior.alpha, rng_leaves);
    const auto seq = generate_sequence(tree, pick.next_below(31),
                                       sample_uniform_context(a, d + 1, rng_init), rng_body);

    CtwState state(prior, seq.initial_context);
    for (Symbol x : seq.symbols) state.update(x);
    const auto snap = state.path_snapshot();
    const auto w = blend_weights(snap, prior.lambda);

    const auto family = enumerate_trees(a, d);
    const auto log_post = tree_log_posterior(prior, seq, family);
    std::vector<double> oracle(std::size_t(d) + 1, 0.0);
    for (std::size_t t = 0; t < family.size(); ++t) {
      const int leaf = family[t].classify(snap.context);
      oracle[std::size_t(family[t].node(leaf).depth)] += std::exp(log_post[t]);
    }
    for (std::size_t l = 0; l <= std::size_t(d); ++l)
      CHECK(w.omega[l] == doctest::Approx(oracle[l]).epsilon(1e-9));
  }
}
