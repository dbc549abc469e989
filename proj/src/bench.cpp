#include "vomc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "vomc/ctw.hpp"
#include "vomc/pathblend.hpp"
#include "vomc/syntf.hpp"

#ifndef VOMC_GIT_DESCRIBE
#define VOMC_GIT_DESCRIBE "untracked"
#endif

namespace vomc {

namespace {

struct ParsedPredictor {
  std::string token;
  bool genie = false;
  PredictorConfig config;
};

int required_padding(const std::vector<ParsedPredictor>& preds, const ExperimentConfig& cfg) {
  int need = cfg.depth + 1;  // statistics collection looks one symbol past D
  for (const auto& p : preds)
    if (!p.genie) need = std::max(need, p.config.prior.depth + 1);
  return need;
}

struct PerTree {
  // per predictor, per in-window position
  std::vector<std::vector<double>> loss_sum;
  std::vector<std::vector<double>> loss_sqsum;
  std::uint64_t windows = 0;
  double entropy_sum = 0.0;
  std::uint64_t entropy_count = 0;

  void add(const PerTree& other) {
    for (std::size_t p = 0; p < loss_sum.size(); ++p)
      for (std::size_t t = 0; t < loss_sum[p].size(); ++t) {
        loss_sum[p][t] += other.loss_sum[p][t];
        loss_sqsum[p][t] += other.loss_sqsum[p][t];
      }
    windows += other.windows;
    entropy_sum += other.entropy_sum;
    entropy_count += other.entropy_count;
  }
};

// fixed-shape pairwise reduction; independent of thread scheduling
PerTree pairwise_reduce(std::vector<PerTree>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  PerTree left = pairwise_reduce(parts, lo, mid);
  const PerTree right = pairwise_reduce(parts, mid, hi);
  left.add(right);
  return left;
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (alphabet < 2 || alphabet > 256) throw std::invalid_argument("config: bad alphabet");
  if (depth < 1) throw std::invalid_argument("config: depth must be >= 1");
  if (!(lambda > 0.0) || !(lambda < 1.0)) throw std::invalid_argument("config: bad lambda");
  if (!(alpha > 0.0)) throw std::invalid_argument("config: bad alpha");
  if (num_trees < 1) throw std::invalid_argument("config: need at least one tree");
  if (window < 1 || window > seq_len)
    throw std::invalid_argument("config: window must be in [1, seq_len]");
  if (predictors.empty()) throw std::invalid_argument("config: no predictors");
  for (const auto& token : predictors)
    if (token != "genie") (void)parse_predictor_token(token, *this);
}

PredictorConfig parse_predictor_token(const std::string& token, const ExperimentConfig& config) {
  PredictorConfig out;
  out.prior = CtwPrior::jeffreys(config.alphabet, config.depth, config.lambda);
  out.prior.alpha.assign(std::size_t(config.alphabet), config.alpha);

  std::string head = token, arg;
  if (const auto colon = token.find(':'); colon != std::string::npos) {
    head = token.substr(0, colon);
    arg = token.substr(colon + 1);
  }
  if (head == "ctw") {
    out.id = PredictorId::ctw;
  } else if (head == "blend") {
    out.id = PredictorId::blend;
  } else if (head == "uniform") {
    out.id = PredictorId::uniform;
  } else if (head == "ppm") {
    out.id = PredictorId::ppm;
    if (!arg.empty()) out.prior.depth = std::stoi(arg);
    if (out.prior.depth < 0) throw std::invalid_argument("ppm order must be >= 0");
    return out;  // lambda/alpha unused
  } else if (head == "syntf") {
    out.id = PredictorId::syntf;
    if (!arg.empty()) {
      const auto v = feature_variant_from_name(arg);
      if (!v) throw std::invalid_argument("unknown syntf variant: " + arg);
      out.syntf_variant = int(*v);
    }
  } else {
    throw std::invalid_argument("unknown predictor token: " + token);
  }
  return out;
}

namespace {

PerTree evaluate_tree(const ExperimentConfig& cfg, const std::vector<ParsedPredictor>& preds,
                      int pad_len, int tree_index) {
  const std::uint64_t tree_seed = Rng::derive(cfg.seed, std::uint64_t(tree_index));
  Rng rng_depth(tree_seed, 0);
  Rng rng_structure(tree_seed, 1);
  Rng rng_leaves(tree_seed, 2);
  Rng rng_init(tree_seed, 3);
  Rng rng_body(tree_seed, 4);

  const int source_depth = cfg.prior_kind == PriorKind::ctw
                               ? cfg.depth
                               : 1 + int(rng_depth.next_below(std::uint32_t(cfg.depth)));
  CtwPrior source_prior = CtwPrior::jeffreys(cfg.alphabet, source_depth, cfg.lambda);
  source_prior.alpha.assign(std::size_t(cfg.alphabet), cfg.alpha);

  ContextTree tree = sample_tree_structure(source_prior, rng_structure);
  if (cfg.prior_kind == PriorKind::ctw)
    sample_leaf_distributions(tree, source_prior.alpha, rng_leaves);
  else
    sample_nonctw_leaf_distributions(tree, rng_leaves);

  const auto init = sample_uniform_context(cfg.alphabet, pad_len, rng_init);
  SourceSequence seq = generate_sequence(tree, cfg.seq_len, init, rng_body);
  seq.tree_id = tree_index;
  seq.seed = tree_seed;

  PerTree acc;
  acc.loss_sum.assign(preds.size(), std::vector<double>(cfg.window, 0.0));
  acc.loss_sqsum.assign(preds.size(), std::vector<double>(cfg.window, 0.0));

  std::vector<std::unique_ptr<SequentialPredictor>> machines(preds.size());
  for (std::size_t p = 0; p < preds.size(); ++p)
    if (!preds[p].genie) machines[p] = make_predictor(preds[p].config);

  const std::size_t window_count = cfg.seq_len / cfg.window;
  std::vector<Symbol> pad_recent(std::size_t(pad_len), Symbol(0));
  std::vector<Symbol> genie_ctx(std::size_t(source_depth), Symbol(0));
  std::vector<double> prob(std::size_t(cfg.alphabet), 0.0);

  for (std::size_t w = 0; w < window_count; ++w) {
    const std::size_t base = w * cfg.window;  // window covers positions base+1..base+window
    context_before(seq, base + 1, pad_recent);
    const std::vector<Symbol> padding(pad_recent.rbegin(), pad_recent.rend());  // chronological

    for (std::size_t p = 0; p < preds.size(); ++p)
      if (machines[p]) machines[p]->reset(padding);

    for (std::size_t t = 0; t < cfg.window; ++t) {
      const std::size_t pos = base + t + 1;
      const Symbol x = seq.symbols[pos - 1];
      for (std::size_t p = 0; p < preds.size(); ++p) {
        double loss;
        if (preds[p].genie) {
          context_before(seq, pos, genie_ctx);
          const int leaf = tree.classify(genie_ctx);
          loss = -std::log(tree.leaf_dist(leaf)[x]);
          acc.entropy_sum += leaf_entropy(tree, leaf);
          acc.entropy_count += 1;
        } else {
          machines[p]->predict(prob);
          loss = -std::log(prob[x]);
          machines[p]->update(x);
        }
        acc.loss_sum[p][t] += loss;
        acc.loss_sqsum[p][t] += loss * loss;
      }
    }
    acc.windows += 1;
  }
  return acc;
}

// one instrumented window measuring node evaluations per prediction for the
// plain-CTW route (hypothetical updates) vs the path-blending route
void measure_touches(const ExperimentConfig& cfg, ExperimentResult& result) {
  const std::uint64_t tree_seed = Rng::derive(cfg.seed, 0);
  Rng rng_structure(tree_seed, 1);
  Rng rng_leaves(tree_seed, 2);
  Rng rng_init(tree_seed, 3);
  Rng rng_body(tree_seed, 4);
  CtwPrior prior = CtwPrior::jeffreys(cfg.alphabet, cfg.depth, cfg.lambda);
  prior.alpha.assign(std::size_t(cfg.alphabet), cfg.alpha);
  ContextTree tree = sample_tree_structure(prior, rng_structure);
  sample_leaf_distributions(tree, prior.alpha, rng_leaves);
  const auto init = sample_uniform_context(cfg.alphabet, cfg.depth, rng_init);
  const auto seq = generate_sequence(tree, cfg.window, init, rng_body);

  CtwState route_a(prior, seq.initial_context);
  CtwState route_b(prior, seq.initial_context);
  std::uint64_t touches_a = 0, touches_b = 0;
  for (Symbol x : seq.symbols) {
    const std::uint64_t a0 = route_a.touch_count();
    (void)route_a.predict();
    touches_a += route_a.touch_count() - a0;
    route_a.update(x);

    const std::uint64_t b0 = route_b.touch_count();
    (void)blend_predict(route_b);
    touches_b += route_b.touch_count() - b0;
    route_b.update(x);
  }
  result.ctw_touches_per_prediction = double(touches_a) / double(cfg.window);
  result.blend_touches_per_prediction = double(touches_b) / double(cfg.window);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  std::vector<ParsedPredictor> preds;
  for (const auto& token : config.predictors) {
    ParsedPredictor p;
    p.token = token;
    if (token == "genie")
      p.genie = true;
    else
      p.config = parse_predictor_token(token, config);
    preds.push_back(std::move(p));
  }
  const int pad_len = required_padding(preds, config);

  // exceptions may not escape the parallel region; failed trees are dropped
  // from the aggregate and reported in the manifest instead
  std::vector<PerTree> parts(std::size_t(config.num_trees));
  std::vector<std::string> errors(std::size_t(config.num_trees));
  auto run_tree = [&](int k) {
    try {
      parts[std::size_t(k)] = evaluate_tree(config, preds, pad_len, k);
    } catch (const std::exception& e) {
      errors[std::size_t(k)] = "tree " + std::to_string(k) + ": " + e.what();
    }
  };
  if (config.parallel) {
#ifdef _OPENMP
    const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int k = 0; k < config.num_trees; ++k) run_tree(k);
#else
    for (int k = 0; k < config.num_trees; ++k) run_tree(k);
#endif
  } else {
    for (int k = 0; k < config.num_trees; ++k) run_tree(k);
  }

  ExperimentResult result;
  result.config = config;
  std::vector<PerTree> good;
  good.reserve(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (errors[k].empty())
      good.push_back(std::move(parts[k]));
    else
      result.failures.push_back(std::move(errors[k]));
  }
  if (good.empty()) throw std::runtime_error("run_experiment: every tree failed");
  const PerTree total = pairwise_reduce(good, 0, good.size());

  const double unit_scale = config.unit == RateUnit::bits ? 1.0 / std::numbers::ln2 : 1.0;
  const double n = double(total.windows);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    RateCurve curve;
    curve.predictor = preds[p].token;
    curve.windows = total.windows;
    curve.mean.resize(config.window);
    curve.stderr_.resize(config.window);
    for (std::size_t t = 0; t < config.window; ++t) {
      const double sum = total.loss_sum[p][t];
      const double sq = total.loss_sqsum[p][t];
      const double mean = sum / n;
      curve.mean[t] = mean * unit_scale;
      const double var = n > 1 ? std::max(0.0, (sq - sum * sum / n) / (n - 1.0)) : 0.0;
      curve.stderr_[t] = std::sqrt(var / n) * unit_scale;
    }
    const std::size_t tenth = std::max<std::size_t>(1, config.window / 10);
    double full = 0.0, early = 0.0, late = 0.0;
    for (std::size_t t = 0; t < config.window; ++t) full += curve.mean[t];
    for (std::size_t t = 0; t < tenth; ++t) early += curve.mean[t];
    for (std::size_t t = config.window - tenth; t < config.window; ++t) late += curve.mean[t];
    curve.window_average = full / double(config.window);
    curve.early_average = early / double(tenth);
    curve.late_average = late / double(tenth);
    result.curves.push_back(std::move(curve));
  }
  if (total.entropy_count) {
    result.has_genie = true;
    result.genie_entropy_average =
        total.entropy_sum / double(total.entropy_count) * unit_scale;
  }
  measure_touches(config, result);
  return result;
}

const RateCurve* find_curve(const ExperimentResult& result, const std::string& name) {
  for (const auto& c : result.curves)
    if (c.predictor == name) return &c;
  return nullptr;
}

std::string curve_csv(const RateCurve& curve) {
  std::string out = "position,mean,stderr,movavg16\n";
  double window_sum = 0.0;
  for (std::size_t t = 0; t < curve.mean.size(); ++t) {
    window_sum += curve.mean[t];
    if (t >= 16) window_sum -= curve.mean[t - 16];
    const double avg = window_sum / double(std::min<std::size_t>(16, t + 1));
    out += std::to_string(t + 1);
    out += ',';
    out += format_g17(curve.mean[t]);
    out += ',';
    out += format_g17(curve.stderr_[t]);
    out += ',';
    out += format_g17(avg);
    out += '\n';
  }
  return out;
}

std::string comparison_table(const ExperimentResult& result) {
  std::string out = "predictor        window-avg      early-10%       late-10%\n";
  char buf[128];
  for (const auto& c : result.curves) {
    std::snprintf(buf, sizeof buf, "%-16s %-15.6f %-15.6f %-15.6f\n", c.predictor.c_str(),
                  c.window_average, c.early_average, c.late_average);
    out += buf;
  }
  if (result.has_genie) {
    std::snprintf(buf, sizeof buf, "visited-leaf entropy average: %.6f\n",
                  result.genie_entropy_average);
    out += buf;
  }
  return out;
}

std::string summary_json(const ExperimentResult& result) {
  const ExperimentConfig& c = result.config;
  nlohmann::json j;
  j["config"] = {{"prior", c.prior_kind == PriorKind::ctw ? "ctw" : "nonctw"},
                 {"alphabet", c.alphabet},
                 {"depth", c.depth},
                 {"lambda", c.lambda},
                 {"alpha", c.alpha},
                 {"trees", c.num_trees},
                 {"seq_len", c.seq_len},
                 {"window", c.window},
                 {"predictors", c.predictors},
                 {"seed", c.seed},
                 {"unit", c.unit == RateUnit::nats ? "nats" : "bits"},
                 {"parallel", c.parallel}};
  j["manifest"] = {{"version", VOMC_GIT_DESCRIBE},
                   {"seed", c.seed},
                   {"partial", !result.failures.empty()},
                   {"failures", result.failures}};

  nlohmann::json curves = nlohmann::json::array();
  for (const auto& curve : result.curves)
    curves.push_back({{"predictor", curve.predictor},
                      {"window_average", curve.window_average},
                      {"early_average", curve.early_average},
                      {"late_average", curve.late_average},
                      {"windows", curve.windows}});
  j["curves"] = std::move(curves);

  const RateCurve* genie = find_curve(result, "genie");
  if (genie) {
    nlohmann::json gaps = nlohmann::json::object();
    for (const auto& curve : result.curves)
      if (curve.predictor != "genie")
        gaps[curve.predictor] = curve.window_average - genie->window_average;
    j["gap_above_genie"] = std::move(gaps);
    j["genie_entropy_average"] = result.genie_entropy_average;
  }

  // qualitative orderings the curves are expected to satisfy
  const RateCurve* ctw = find_curve(result, "ctw");
  nlohmann::json orderings = nlohmann::json::object();
  if (ctw) {
    double triple_gap = 0.0;
    for (const char* other : {"blend", "syntf"})
      if (const RateCurve* oc = find_curve(result, other))
        for (std::size_t t = 0; t < ctw->mean.size(); ++t)
          triple_gap = std::max(triple_gap, std::abs(ctw->mean[t] - oc->mean[t]));
    orderings["equivalence_triple_max_pointwise_gap"] = triple_gap;
    for (const auto& curve : result.curves)
      if (curve.predictor.rfind("ppm", 0) == 0) {
        orderings["ppm_early_minus_ctw_early"] = curve.early_average - ctw->early_average;
        orderings["ppm_late_minus_ctw_late"] = curve.late_average - ctw->late_average;
      }
  }
  if (genie) {
    bool below = true;
    for (const auto& curve : result.curves)
      if (curve.predictor != "genie" && curve.window_average < genie->window_average)
        below = false;
    orderings["genie_below_all"] = below;
  }
  j["orderings"] = std::move(orderings);
  j["touches_per_prediction"] = {{"ctw", result.ctw_touches_per_prediction},
                                 {"blend", result.blend_touches_per_prediction}};
  return j.dump(2);
}

}  // namespace vomc
