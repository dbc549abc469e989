#include "vomc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "vomc/bench.hpp"
#include "vomc/coder.hpp"
#include "vomc/ctw.hpp"
#include "vomc/pathblend.hpp"
#include "vomc/ppm.hpp"
#include "vomc/stats.hpp"
#include "vomc/syntf.hpp"

namespace vomc::verify {

namespace {

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

struct Case {
  CtwPrior prior;
  SourceSequence seq;
};

Case random_ctw_case(std::uint64_t seed, std::span<const int> alphabets,
                     std::span<const int> depths, std::span<const double> lambdas,
                     std::size_t max_len) {
  Rng pick(seed, 0);
  Case c;
  const int a = alphabets[pick.next_below(std::uint32_t(alphabets.size()))];
  const int d = depths[pick.next_below(std::uint32_t(depths.size()))];
  const double lambda = lambdas[pick.next_below(std::uint32_t(lambdas.size()))];
  c.prior = CtwPrior::jeffreys(a, d, lambda);

  Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
  ContextTree tree = sample_tree_structure(c.prior, rng_structure);
  sample_leaf_distributions(tree, c.prior.alpha, rng_leaves);
  const auto init = sample_uniform_context(a, d + 1, rng_init);
  const std::size_t n = pick.next_below(std::uint32_t(max_len + 1));
  c.seq = generate_sequence(tree, n, init, rng_body);
  return c;
}

// ---- criterion 1: CTW vs brute-force Bayes mixture ----

SuiteResult ctw_oracle_suite(int cases) {
  SuiteResult r;
  r.name = "ctw-oracle-equivalence";
  const int alphabets[] = {2, 3};
  const int depths[] = {1, 2};
  const double lambdas[] = {0.05, 0.15, 0.5};
  std::vector<double> gaps(std::size_t(cases), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < cases; ++k) {
    const Case c = random_ctw_case(Rng::derive(0xC1, std::uint64_t(k)), alphabets, depths,
                                   lambdas, 50);
    const double ctw = ctw_sequence_logprob(c.prior, c.seq);
    const double oracle = bayes_oracle_logprob(c.prior, c.seq);
    gaps[std::size_t(k)] = std::abs(ctw - oracle);
  }
  const double worst = *std::max_element(gaps.begin(), gaps.end());
  r.passed = worst <= 1e-9;
  r.detail = fmt("%d cases, max |log gap| = %.3g (tol 1e-9)", cases, worst);
  return r;
}

// ---- criterion 2: path-blending identity ----

SuiteResult blend_identity_suite(int cases, int omega_cases) {
  SuiteResult r;
  r.name = "path-blend-identity";
  const int alphabets[] = {2, 3};
  const int depths[] = {0, 1, 2, 3, 4};
  const double lambdas[] = {0.05, 0.15, 0.5, 0.9};
  std::vector<double> gaps(std::size_t(cases), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < cases; ++k) {
    const Case c = random_ctw_case(Rng::derive(0xC2, std::uint64_t(k)), alphabets, depths,
                                   lambdas, 512);
    CtwState state(c.prior, c.seq.initial_context);
    for (Symbol x : c.seq.symbols) state.update(x);
    const auto direct = state.predict();
    const auto blended = blend_predict(state);
    double gap = 0.0;
    for (std::size_t q = 0; q < direct.size(); ++q)
      gap = std::max(gap, std::abs(direct[q] - blended[q]));
    gaps[std::size_t(k)] = gap;
  }
  const double worst_predict = *std::max_element(gaps.begin(), gaps.end());

  // leaf-mass check on enumerable families: blend weights vs posterior
  // leaf-mass of the enumerated tree family
  const int omega_alphabets[] = {2, 3};
  std::vector<double> omega_gaps(std::size_t(omega_cases), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < omega_cases; ++k) {
    const std::uint64_t seed = Rng::derive(0xC2CE, std::uint64_t(k));
    Rng pick(seed, 0);
    const int a = omega_alphabets[pick.next_below(2)];
    const int d = a == 2 ? 1 + int(pick.next_below(3)) : 1 + int(pick.next_below(2));
    const double lambdas2[] = {0.05, 0.15, 0.5, 0.9};
    CtwPrior prior = CtwPrior::jeffreys(a, d, lambdas2[pick.next_below(4)]);

    Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
    ContextTree tree = sample_tree_structure(prior, rng_structure);
    sample_leaf_distributions(tree, prior.alpha, rng_leaves);
    const auto init = sample_uniform_context(a, d + 1, rng_init);
    const auto seq = generate_sequence(tree, pick.next_below(31), init, rng_body);

    CtwState state(prior, seq.initial_context);
    for (Symbol x : seq.symbols) state.update(x);
    const auto snap = state.path_snapshot();
    const auto weights = blend_weights(snap, prior.lambda);

    const auto trees = enumerate_trees(a, d);
    const auto log_post = tree_log_posterior(prior, seq, trees);
    std::vector<double> omega_oracle(std::size_t(d) + 1, 0.0);
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const int leaf = trees[t].classify(snap.context);
      omega_oracle[std::size_t(trees[t].node(leaf).depth)] += std::exp(log_post[t]);
    }
    double gap = 0.0;
    for (std::size_t l = 0; l <= std::size_t(d); ++l)
      gap = std::max(gap, std::abs(weights.omega[l] - omega_oracle[l]));
    omega_gaps[std::size_t(k)] = gap;
  }
  const double worst_omega = *std::max_element(omega_gaps.begin(), omega_gaps.end());

  r.passed = worst_predict <= 1e-9 && worst_omega <= 1e-9;
  r.detail = fmt("%d prediction cases max gap %.3g; %d omega cases max gap %.3g (tol 1e-9)",
                 cases, worst_predict, omega_cases, worst_omega);
  return r;
}

// ---- criterion 3: construction equivalence ----

SuiteResult construction_suite(int sequences, std::size_t length) {
  SuiteResult r;
  r.name = "construction-equivalence";
  std::vector<double> gaps(std::size_t(sequences), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < sequences; ++k) {
    const std::uint64_t seed = Rng::derive(0xC3, std::uint64_t(k));
    Rng pick(seed, 0);
    const int d = 1 + int(pick.next_below(3));
    CtwPrior prior = CtwPrior::jeffreys(3, d, 0.15);

    Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
    ContextTree tree = sample_tree_structure(prior, rng_structure);
    sample_leaf_distributions(tree, prior.alpha, rng_leaves);
    const auto init = sample_uniform_context(3, d + 1, rng_init);
    const auto seq = generate_sequence(tree, length, init, rng_body);

    SynTfConfig cfg;
    cfg.prior = prior;
    cfg.max_window = length;
    SynTfSimulator sim(cfg, seq.initial_context);
    CtwState state(prior, seq.initial_context);

    double gap = 0.0;
    for (Symbol x : seq.symbols) {
      const auto ps = sim.predict();
      const auto pc = state.predict();
      for (std::size_t q = 0; q < ps.size(); ++q)
        gap = std::max(gap, std::abs(ps[q] - pc[q]));
      sim.update(x);
      state.update(x);
    }
    gaps[std::size_t(k)] = gap;
  }
  const double worst = *std::max_element(gaps.begin(), gaps.end());
  r.passed = worst <= 1e-6;
  r.detail = fmt("%d sequences x %zu positions, max |gap| = %.3g (tol 1e-6)", sequences,
                 length, worst);
  return r;
}

// ---- criterion 4: PPM golden table ----

SuiteResult ppm_golden_suite() {
  SuiteResult r;
  r.name = "ppm-golden-table";
  PpmModel model(3, 2);
  for (Symbol x : {0, 1, 2, 0, 1, 1, 2}) model.update(Symbol(x));  // a b c a b b c

  auto expect = [&](std::initializer_list<int> suffix_recent_first,
                    std::initializer_list<std::uint32_t> want) {
    std::vector<Symbol> s;
    for (int v : suffix_recent_first) s.push_back(Symbol(v));
    const auto got = model.context_counts(s);
    return std::equal(got.begin(), got.end(), want.begin(), want.end());
  };
  bool counts_ok = true;
  // order 2 (suffixes written newest-first): (a,b)->{b,c}, (b,b)->{c}, (b,c)->{a}, (c,a)->{b}
  counts_ok &= expect({1, 0}, {0, 1, 1});
  counts_ok &= expect({1, 1}, {0, 0, 1});
  counts_ok &= expect({2, 1}, {1, 0, 0});
  counts_ok &= expect({0, 2}, {0, 1, 0});
  // order 1
  counts_ok &= expect({0}, {0, 2, 0});
  counts_ok &= expect({1}, {0, 1, 2});
  counts_ok &= expect({2}, {1, 0, 0});
  // order 0
  counts_ok &= expect({}, {2, 3, 2});

  // current context is (b,c); worked predictions from the escape chain
  const double pa = model.predict_symbol(0);
  const double pb = model.predict_symbol(1);
  const double pc = model.predict_symbol(2);
  const bool preds_ok = pa == 0.5 && pb == 3.0 / 32.0 && pc == 1.0 / 16.0;

  r.passed = counts_ok && preds_ok;
  r.detail = fmt("counts %s; p(a|bc)=%g p(b|bc)=%g p(c|bc)=%g (want 0.5, 0.09375, 0.0625)",
                 counts_ok ? "exact" : "MISMATCH", pa, pb, pc);
  return r;
}

// ---- criterion 5: Table-2 CTW row ----

ExperimentConfig table2_config(int depth, std::size_t window, int trees) {
  ExperimentConfig cfg;
  cfg.prior_kind = PriorKind::ctw;
  cfg.alphabet = 3;
  cfg.depth = depth;
  cfg.lambda = 0.15;
  cfg.alpha = 0.5;
  cfg.num_trees = trees;
  cfg.seq_len = 5120;
  cfg.window = window;
  cfg.predictors = {"ctw"};
  cfg.seed = 0x7AB2 + std::uint64_t(depth);
  return cfg;
}

SuiteResult table2_suite(int trees) {
  SuiteResult r;
  r.name = "table2-ctw-row";
  struct Row {
    int depth;
    std::size_t window;
    double target;
  };
  const Row rows[] = {{3, 512, 0.7165}, {4, 512, 0.7603}, {5, 1536, 0.7400}};
  bool ok = true;
  std::string detail;
  for (const Row& row : rows) {
    const auto result = run_experiment(table2_config(row.depth, row.window, trees));
    const double avg = result.curves.at(0).window_average;
    ok = ok && std::abs(avg - row.target) <= 0.02;
    detail += fmt("D=%d: %.4f (target %.4f +/- 0.02)  ", row.depth, avg, row.target);
  }
  r.passed = ok;
  r.detail = detail;
  return r;
}

// ---- criterion 6: Fig.-5 qualitative shape ----

SuiteResult fig5_shape_suite(int trees) {
  SuiteResult r;
  r.name = "fig5-ppm-shape";
  ExperimentConfig cfg = table2_config(5, 1536, trees);
  cfg.predictors = {"ctw", "ppm:5"};
  cfg.seed = 0xF165;
  const auto result = run_experiment(cfg);
  const RateCurve* ctw = find_curve(result, "ctw");
  const RateCurve* ppm = find_curve(result, "ppm:5");
  const double early_gap = ppm->early_average - ctw->early_average;
  const double late_gap = ppm->late_average - ctw->late_average;
  r.passed = early_gap >= 0.05 && late_gap < early_gap;
  r.detail = fmt("PPM-CTW gap: early %.4f (need >= 0.05), late %.4f (need < early)", early_gap,
                 late_gap);
  return r;
}

// ---- criterion 7: coder contract ----

SuiteResult coder_suite(int trials) {
  SuiteResult r;
  r.name = "coder-roundtrip";
  std::vector<int> fail(std::size_t(trials), 0);
  std::vector<double> excess(std::size_t(trials), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < trials; ++k) {
    const std::uint64_t seed = Rng::derive(0xC7, std::uint64_t(k));
    Rng pick(seed, 0);
    const int a = 2 + int(pick.next_below(2));
    const std::size_t n = pick.next_below(1500);

    PredictorConfig pc;
    pc.prior = CtwPrior::jeffreys(a, int(pick.next_below(4)), 0.15);
    const int kind = int(pick.next_below(3));
    pc.id = kind == 0 ? PredictorId::uniform : (kind == 1 ? PredictorId::ctw : PredictorId::ppm);

    SourceSequence seq;
    if (pick.next_below(2) == 0) {
      Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
      CtwPrior source = CtwPrior::jeffreys(a, 2, 0.15);
      ContextTree tree = sample_tree_structure(source, rng_structure);
      sample_leaf_distributions(tree, source.alpha, rng_leaves);
      seq = generate_sequence(tree, n, sample_uniform_context(a, 3, rng_init), rng_body);
    } else {
      Rng rng_init(seed, 3), rng_body(seed, 4);
      seq.alphabet = a;
      seq.initial_context = sample_uniform_context(a, std::max(1, pc.prior.depth), rng_init);
      for (std::size_t i = 0; i < n; ++i)
        seq.symbols.push_back(Symbol(rng_body.next_below(std::uint32_t(a))));
    }

    const CodeStream stream = encode(seq, pc);
    const SourceSequence back = decode(stream);
    const bool same = back.symbols == seq.symbols;
    const double bound = std::ceil(stream.ideal_quantized_bits) + 32.0;
    if (!same || double(stream.payload_bits) > bound) fail[std::size_t(k)] = 1;
    excess[std::size_t(k)] = double(stream.payload_bits) - stream.ideal_quantized_bits;
    // container serialization must be byte-stable
    const auto bytes = stream_to_bytes(stream);
    const CodeStream parsed = stream_from_bytes(bytes);
    if (stream_to_bytes(parsed) != bytes || decode(parsed).symbols != seq.symbols)
      fail[std::size_t(k)] = 1;
  }
  const int failures = std::accumulate(fail.begin(), fail.end(), 0);
  const double worst_excess = *std::max_element(excess.begin(), excess.end());
  r.passed = failures == 0;
  r.detail = fmt("%d trials, %d failures, worst payload excess over quantized ideal %.2f bits",
                 trials, failures, worst_excess);
  return r;
}

// ---- criterion 8: count reconstruction + ablation ordering ----

SuiteResult reconstruction_suite(int triples, int ablation_trees) {
  SuiteResult r;
  r.name = "count-reconstruction-and-ablation";
  int checked = 0, mismatches = 0;
  double worst_pre_round = 0.0;
  for (int k = 0; checked < triples && k < triples * 20; ++k) {
    const std::uint64_t seed = Rng::derive(0xC8, std::uint64_t(k));
    Rng pick(seed, 0);
    const int d = 1 + int(pick.next_below(3));
    CtwPrior prior = CtwPrior::jeffreys(3, d, 0.3);
    Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
    ContextTree tree = sample_tree_structure(prior, rng_structure);
    sample_leaf_distributions(tree, prior.alpha, rng_leaves);
    const auto init = sample_uniform_context(3, d + 1, rng_init);
    const std::size_t n = 20 + pick.next_below(181);
    const auto seq = generate_sequence(tree, n, init, rng_body);
    const std::size_t position = 1 + pick.next_below(std::uint32_t(n));

    CountTable table(3, d + 1, seq.initial_context);
    for (std::size_t i = 0; i < position; ++i) table.update(seq.symbols[i]);
    const auto rec = reconstruct_counts(table, d);
    if (!rec.path_seen.back()) continue;  // needs a fully-visited path
    ++checked;

    std::vector<Symbol> ctx(std::size_t(d), Symbol(0));
    table.current_context(ctx);
    for (int l = 0; l <= d; ++l) {
      const auto direct = table.counts(ContextView(ctx.data(), std::size_t(l)));
      for (int q = 0; q < 3; ++q) {
        const double rebuilt = rec.counts[std::size_t(l)][std::size_t(q)];
        worst_pre_round = std::max(worst_pre_round, std::abs(rebuilt - double(direct[std::size_t(q)])));
        if (std::llround(rebuilt) != long(direct[std::size_t(q)])) ++mismatches;
      }
    }
  }

  ExperimentConfig cfg;
  cfg.alphabet = 3;
  cfg.depth = 3;
  cfg.lambda = 0.15;
  cfg.alpha = 0.5;
  cfg.num_trees = ablation_trees;
  cfg.seq_len = 512;
  cfg.window = 512;
  cfg.predictors = {"syntf", "syntf:totalcounts", "syntf:nocounts"};
  cfg.seed = 0xAB1A;
  const auto result = run_experiment(cfg);
  const double full = result.curves.at(0).window_average;
  const double total_only = result.curves.at(1).window_average;
  const double none = result.curves.at(2).window_average;
  const bool ordering = full <= total_only && total_only <= none;

  r.passed = checked >= triples && mismatches == 0 && ordering;
  r.detail = fmt("%d triples, %d mismatches, max pre-round gap %.2g; rates full %.4f <= "
                 "total-only %.4f <= none %.4f: %s",
                 checked, mismatches, worst_pre_round, full, total_only, none,
                 ordering ? "yes" : "NO");
  return r;
}

// ---- criterion 9: non-CTW suboptimality gap ----

SuiteResult nonctw_gap_suite(int trees) {
  SuiteResult r;
  r.name = "nonctw-ctw-gap";
  ExperimentConfig cfg;
  cfg.prior_kind = PriorKind::nonctw;
  cfg.alphabet = 3;
  cfg.depth = 3;
  cfg.lambda = 0.15;
  cfg.alpha = 0.5;
  cfg.num_trees = trees;
  cfg.seq_len = 5120;
  cfg.window = 512;
  cfg.predictors = {"ctw", "genie"};
  cfg.seed = 0x90C;
  const auto result = run_experiment(cfg);
  const double ctw = find_curve(result, "ctw")->window_average;
  const double genie = find_curve(result, "genie")->window_average;
  const double gap = ctw - genie;
  r.passed = gap >= 0.01;
  r.detail = fmt("CTW %.4f vs genie %.4f: gap %.4f (need >= 0.01); entropy check %.4f", ctw,
                 genie, gap, result.genie_entropy_average);
  return r;
}

// ---- informational: literal (stale) retrieval gap of the construction ----

SuiteResult stale_retrieval_suite(int sequences, std::size_t length) {
  SuiteResult r;
  r.name = "syntf-stale-retrieval-gap (informational)";
  StaleRetrievalReport agg;
  for (int k = 0; k < sequences; ++k) {
    const std::uint64_t seed = Rng::derive(0x57A1E, std::uint64_t(k));
    Rng pick(seed, 0);
    const int d = 1 + int(pick.next_below(3));
    CtwPrior prior = CtwPrior::jeffreys(3, d, 0.15);
    Rng rng_structure(seed, 1), rng_leaves(seed, 2), rng_init(seed, 3), rng_body(seed, 4);
    ContextTree tree = sample_tree_structure(prior, rng_structure);
    sample_leaf_distributions(tree, prior.alpha, rng_leaves);
    const auto seq = generate_sequence(tree, length, sample_uniform_context(3, d + 1, rng_init),
                                       rng_body);
    SynTfConfig cfg;
    cfg.prior = prior;
    cfg.max_window = length;
    const auto rep = measure_stale_retrieval(cfg, seq);
    agg.positions += rep.positions;
    agg.differing_positions += rep.differing_positions;
    agg.max_abs_prediction_gap = std::max(agg.max_abs_prediction_gap, rep.max_abs_prediction_gap);
    agg.mean_abs_prediction_gap += rep.mean_abs_prediction_gap * double(rep.positions);
    agg.max_abs_logloss_gap = std::max(agg.max_abs_logloss_gap, rep.max_abs_logloss_gap);
  }
  if (agg.positions) agg.mean_abs_prediction_gap /= double(agg.positions);
  r.passed = true;  // documents the literal construction's one-observation lag
  r.detail = fmt("literal sibling retrieval differs at %llu/%llu positions; max |dp| %.3g, "
                 "mean |dp| %.3g, max |dlogloss| %.3g",
                 (unsigned long long)agg.differing_positions, (unsigned long long)agg.positions,
                 agg.max_abs_prediction_gap, agg.mean_abs_prediction_gap,
                 agg.max_abs_logloss_gap);
  return r;
}

template <typename Fn>
SuiteResult timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r = fn();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<SuiteResult> run_acceptance() {
  std::vector<SuiteResult> out;
  out.push_back(timed([] { return ctw_oracle_suite(100); }));
  out.push_back(timed([] { return blend_identity_suite(500, 120); }));
  out.push_back(timed([] { return construction_suite(64, 512); }));
  out.push_back(timed([] { return ppm_golden_suite(); }));
  out.push_back(timed([] { return table2_suite(256); }));
  out.push_back(timed([] { return fig5_shape_suite(256); }));
  out.push_back(timed([] { return coder_suite(1000); }));
  out.push_back(timed([] { return reconstruction_suite(1000, 256); }));
  out.push_back(timed([] { return nonctw_gap_suite(256); }));
  return out;
}

std::vector<SuiteResult> run(Level level) {
  if (level == Level::quick) {
    std::vector<SuiteResult> out;
    out.push_back(timed([] { return ctw_oracle_suite(30); }));
    out.push_back(timed([] { return blend_identity_suite(120, 40); }));
    out.push_back(timed([] { return construction_suite(8, 192); }));
    out.push_back(timed([] { return ppm_golden_suite(); }));
    out.push_back(timed([] { return coder_suite(150); }));
    out.push_back(timed([] { return reconstruction_suite(250, 32); }));
    return out;
  }
  std::vector<SuiteResult> out = run_acceptance();
  out.push_back(timed([] { return stale_retrieval_suite(16, 256); }));
  return out;
}

bool all_passed(const std::vector<SuiteResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

std::string format_report(const std::vector<SuiteResult>& results) {
  std::string out;
  for (const auto& r : results)
    out += fmt("%-4s %-42s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
               r.detail.c_str());
  return out;
}

}  // namespace vomc::verify
