#include "vomc/syntf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "vomc/pathblend.hpp"

namespace vomc {

namespace {

constexpr double kOneHotTol = 1e-12;
constexpr double kSimplexTol = 1e-9;

double logsumexp2(double a, double b) {
  const double m = a > b ? a : b;
  const double s = a > b ? b : a;
  return m + std::log1p(std::exp(s - m));
}

std::vector<double> one_hot(int alphabet, Symbol x) {
  std::vector<double> v(std::size_t(alphabet), 0.0);
  v[x] = 1.0;
  return v;
}

void check_simplex_block(const std::vector<double>& v, const char* what) {
  double sum = 0.0;
  for (double p : v) {
    if (p < -kSimplexTol || p > 1.0 + kSimplexTol)
      throw std::runtime_error(std::string("embedding invariant: ") + what + " out of range");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw std::runtime_error(std::string("embedding invariant: ") + what + " not a distribution");
}

}  // namespace

const char* feature_variant_name(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::full: return "full";
    case FeatureVariant::no_counts: return "nocounts";
    case FeatureVariant::total_counts_only: return "totalcounts";
    case FeatureVariant::all_counts: return "allcounts";
  }
  return "?";
}

std::optional<FeatureVariant> feature_variant_from_name(std::string_view name) {
  for (FeatureVariant v : {FeatureVariant::full, FeatureVariant::no_counts,
                           FeatureVariant::total_counts_only, FeatureVariant::all_counts})
    if (name == feature_variant_name(v)) return v;
  return std::nullopt;
}

std::vector<std::vector<double>> context_extension_blocks(const CountTable& table, int m_heads) {
  if (m_heads < 0 || m_heads + 1 > table.max_order())
    throw std::invalid_argument("context_extension_blocks: window too small for M");
  std::vector<Symbol> ctx(std::size_t(m_heads) + 1, Symbol(0));
  table.current_context(ctx);
  std::vector<std::vector<double>> blocks;
  blocks.reserve(std::size_t(m_heads) + 1);
  for (int m = 0; m <= m_heads; ++m)
    blocks.push_back(one_hot(table.alphabet(), ctx[std::size_t(m)]));
  return blocks;
}

StatisticsBlocks statistics_blocks(const CountTable& table, int m_stat) {
  if (m_stat < 1 || m_stat > table.max_order())
    throw std::invalid_argument("statistics_blocks: M' out of range");
  std::vector<Symbol> ctx(std::size_t(m_stat), Symbol(0));
  table.current_context(ctx);
  StatisticsBlocks out;
  for (int l = 0; l < m_stat; ++l) {
    const ContextView suffix(ctx.data(), std::size_t(l));
    out.forward.push_back(table.forward_stats(suffix));
    out.backward.push_back(table.backward_stats(suffix));
  }
  return out;
}

void EmbeddingVector::check_invariants(int alphabet) const {
  for (const auto& block : onehot) {
    int ones = 0;
    for (double v : block) {
      if (std::abs(v) > kOneHotTol && std::abs(v - 1.0) > kOneHotTol)
        throw std::runtime_error("embedding invariant: one-hot block not binary");
      if (std::abs(v - 1.0) <= kOneHotTol) ++ones;
    }
    if (int(block.size()) != alphabet || ones != 1)
      throw std::runtime_error("embedding invariant: one-hot block malformed");
  }
  for (const auto& b : forward) check_simplex_block(b, "forward statistics");
  for (const auto& b : backward) check_simplex_block(b, "backward statistics");
  for (const auto& b : predictive) check_simplex_block(b, "predictive");
  const double c = pos[1], s = pos[2];
  if (std::abs(pos[0] - 1.0) > kOneHotTol || std::abs(c * c + s * s - 1.0) > 1e-9)
    throw std::runtime_error("embedding invariant: positional triple broken");
}

SynTfSimulator::SynTfSimulator(SynTfConfig config, std::span<const Symbol> padding)
    : config_(std::move(config)),
      table_(config_.prior.alphabet, config_.prior.depth + 1, padding) {
  config_.prior.validate();
  stale_lw_.resize(std::size_t(config_.prior.depth) + 1);
}

double SynTfSimulator::subtree_log_pw(ContextView suffix) const {
  if (table_.total(suffix) == 0) return 0.0;  // never visited: empty evidence
  const double le = log_dirichlet_evidence(table_.counts(suffix), config_.prior.alpha);
  if (int(suffix.size()) >= config_.prior.depth) return le;
  std::vector<Symbol> child(suffix.begin(), suffix.end());
  child.push_back(0);
  double child_sum = 0.0;
  for (int q = 0; q < config_.prior.alphabet; ++q) {
    child.back() = Symbol(q);
    child_sum += subtree_log_pw(child);
  }
  return logsumexp2(std::log(config_.prior.lambda) + le,
                    std::log1p(-config_.prior.lambda) + child_sum);
}

LayerTrace SynTfSimulator::run_pipeline() const {
  const int a = config_.prior.alphabet;
  const int d = config_.prior.depth;
  const double lambda = config_.prior.lambda;
  const double ln_lambda = std::log(lambda);
  const double ln_keep = std::log1p(-lambda);
  const std::uint64_t i = table_.position();

  std::vector<Symbol> ctx(std::size_t(d) + 1);
  table_.current_context(ctx);

  LayerTrace t;
  const double angle = double(i) * std::numbers::pi / double(config_.max_window);
  const std::array<double, 3> pos{1.0, std::cos(angle), std::sin(angle)};

  // ---- encoding + layer 1: finite-memory context extension (M = D) ----
  t.h1.onehot = {one_hot(a, ctx[0])};
  t.h1.pos = pos;
  t.h2.pos = pos;
  t.h2.onehot = context_extension_blocks(table_, d);

  // ---- layer 2: statistics collection (M' = M + 1 = D + 1) ----
  t.a2 = t.h2;
  StatisticsBlocks stats = statistics_blocks(table_, d + 1);
  t.a2.forward = std::move(stats.forward);
  t.a2.backward = std::move(stats.backward);

  // ---- layer-2 feed-forward: statistics to evidence ----
  t.h3 = t.a2;
  std::vector<std::vector<double>> counts(std::size_t(d) + 1);
  t.reconstruction_fallback.assign(std::size_t(d) + 1, false);
  const bool exact_counts =
      config_.variant == FeatureVariant::full || config_.variant == FeatureVariant::all_counts;
  for (int l = 0; l <= d; ++l) {
    const ContextView suffix(ctx.data(), std::size_t(l));
    switch (config_.variant) {
      case FeatureVariant::full: {
        // telescoping identity over the collected statistics; with the
        // uniform unseen default the product vanishes exactly at the first
        // unseen depth, so flagged depths still reproduce the (zero) counts
        std::vector<double> factors(std::size_t(l), 0.0);
        for (int j = 0; j < l; ++j)
          factors[std::size_t(j)] = t.a2.backward[std::size_t(j)][ctx[std::size_t(j)]];
        auto n = reconstruct_at_depth(t.a2.forward[std::size_t(l)], factors, i);
        for (double& v : n) v = std::round(v);
        counts[std::size_t(l)] = std::move(n);
        t.reconstruction_fallback[std::size_t(l)] = table_.total(suffix) == 0 && i > 0;
        break;
      }
      case FeatureVariant::all_counts: {
        const auto direct = table_.counts(suffix);
        counts[std::size_t(l)].assign(direct.begin(), direct.end());
        break;
      }
      case FeatureVariant::no_counts: {
        // statistics only: back the forward vector with one pseudo-count
        const auto& g = t.a2.forward[std::size_t(l)];
        counts[std::size_t(l)].assign(g.begin(), g.end());
        break;
      }
      case FeatureVariant::total_counts_only: {
        // position count scaled down by the expected suffix hit rate A^-l
        const double proxy_total = double(i) / std::pow(double(a), double(l));
        const auto& g = t.a2.forward[std::size_t(l)];
        auto& n = counts[std::size_t(l)];
        n.resize(std::size_t(a));
        for (int q = 0; q < a; ++q) n[std::size_t(q)] = proxy_total * g[std::size_t(q)];
        break;
      }
    }
    // Dirichlet posterior mean of the (reconstructed or proxy) counts
    double denom = 0.0;
    for (int q = 0; q < a; ++q) denom += config_.prior.alpha[std::size_t(q)] + counts[std::size_t(l)][std::size_t(q)];
    std::vector<double> p(std::size_t(a), 0.0);
    for (int q = 0; q < a; ++q)
      p[std::size_t(q)] =
          (config_.prior.alpha[std::size_t(q)] + counts[std::size_t(l)][std::size_t(q)]) / denom;
    t.h3.predictive.push_back(std::move(p));
    t.h3.log_pe.push_back(log_dirichlet_evidence(counts[std::size_t(l)], config_.prior.alpha));
  }
  t.h3.log_pw_path = t.h3.log_pe[std::size_t(d)];

  // ---- layers 3..D+2: induction ----
  std::vector<double> delta(std::size_t(d), 0.0);
  double carried = t.h3.log_pw_path;
  EmbeddingVector state = t.h3;
  for (int depth = d; depth >= 1; --depth) {
    EmbeddingVector layer = state;
    const double dirichlet_terms =
        t.h3.log_pe[std::size_t(depth)] - t.h3.log_pe[std::size_t(depth - 1)];
    double value = ln_keep - (depth == d ? ln_lambda : 0.0);
    if (exact_counts) {
      // fetch the A child values of the depth-(l-1) path node
      std::vector<Symbol> sibling(ctx.begin(), ctx.begin() + (depth - 1));
      sibling.push_back(0);
      std::vector<double> sib(std::size_t(a), 0.0);
      for (int q = 0; q < a; ++q) {
        sibling.back() = Symbol(q);
        if (Symbol(q) == ctx[std::size_t(depth - 1)]) {
          sib[std::size_t(q)] = carried;  // on-path child: own carried value
        } else if (config_.retrieval == SiblingRetrieval::current) {
          sib[std::size_t(q)] = subtree_log_pw(sibling);
        } else {
          const auto& store = stale_lw_[std::size_t(depth)];
          const auto it = store.find(pack_suffix(sibling, a));
          sib[std::size_t(q)] = it == store.end() ? 0.0 : it->second;
        }
      }
      double sibling_sum = 0.0;
      for (double v : sib) sibling_sum += v;
      layer.sibling_log_pw = std::move(sib);
      value += dirichlet_terms + sibling_sum - carried;
      carried = logsumexp2(ln_lambda + t.h3.log_pe[std::size_t(depth - 1)], ln_keep + sibling_sum);
    } else if (config_.variant == FeatureVariant::total_counts_only) {
      // impoverished features: evidence differences from the proxy counts,
      // no sibling information available
      value += dirichlet_terms;
    }
    // no_counts: prior-only increment
    delta[std::size_t(depth - 1)] = value;
    layer.delta = delta;
    layer.log_pw_path = carried;
    t.induction.push_back(std::move(layer));
    state = t.induction.back();
  }

  // ---- output layer ----
  const std::vector<double> omega = omega_from_deltas(delta);
  t.prediction = convex_blend(omega, t.h3.predictive);
  return t;
}

std::vector<double> SynTfSimulator::predict() const { return run_pipeline().prediction; }

LayerTrace SynTfSimulator::trace() const { return run_pipeline(); }

void SynTfSimulator::update(Symbol x) {
  table_.update(x);
  if (config_.retrieval == SiblingRetrieval::stale) {
    // persist this position's chain for later retrievals
    const LayerTrace t = run_pipeline();
    const int d = config_.prior.depth;
    std::vector<Symbol> ctx(std::size_t(d) + 1);
    table_.current_context(ctx);
    for (int depth = 0; depth <= d; ++depth) {
      const double value = depth == d
                               ? t.h3.log_pw_path
                               : t.induction[std::size_t(d - 1 - depth)].log_pw_path;
      stale_lw_[std::size_t(depth)][pack_suffix(ContextView(ctx.data(), std::size_t(depth)),
                                                config_.prior.alphabet)] = value;
    }
  }
}

std::string trace_to_json(const LayerTrace& trace) {
  nlohmann::json j;
  auto embed = [](const EmbeddingVector& e) {
    nlohmann::json je;
    je["onehot"] = e.onehot;
    je["forward"] = e.forward;
    je["backward"] = e.backward;
    je["predictive"] = e.predictive;
    je["log_pe"] = e.log_pe;
    je["delta"] = e.delta;
    je["log_pw_path"] = e.log_pw_path;
    je["sibling_log_pw"] = e.sibling_log_pw;
    je["pos"] = e.pos;
    return je;
  };
  j["h1"] = embed(trace.h1);
  j["h2"] = embed(trace.h2);
  j["a2"] = embed(trace.a2);
  j["h3"] = embed(trace.h3);
  j["induction"] = nlohmann::json::array();
  for (const auto& e : trace.induction) j["induction"].push_back(embed(e));
  j["prediction"] = trace.prediction;
  j["reconstruction_fallback"] = trace.reconstruction_fallback;
  return j.dump();
}

StaleRetrievalReport measure_stale_retrieval(const SynTfConfig& config,
                                             const SourceSequence& seq) {
  SynTfConfig current_cfg = config;
  current_cfg.retrieval = SiblingRetrieval::current;
  SynTfConfig stale_cfg = config;
  stale_cfg.retrieval = SiblingRetrieval::stale;
  SynTfSimulator current(current_cfg, seq.initial_context);
  SynTfSimulator stale(stale_cfg, seq.initial_context);

  StaleRetrievalReport report;
  double gap_sum = 0.0;
  for (Symbol x : seq.symbols) {
    const auto pc = current.predict();
    const auto ps = stale.predict();
    double gap = 0.0;
    for (std::size_t q = 0; q < pc.size(); ++q)
      gap = std::max(gap, std::abs(pc[q] - ps[q]));
    gap_sum += gap;
    if (gap > 1e-12) ++report.differing_positions;
    report.max_abs_prediction_gap = std::max(report.max_abs_prediction_gap, gap);
    report.max_abs_logloss_gap =
        std::max(report.max_abs_logloss_gap, std::abs(std::log(pc[x]) - std::log(ps[x])));
    ++report.positions;
    current.update(x);
    stale.update(x);
  }
  if (report.positions) report.mean_abs_prediction_gap = gap_sum / double(report.positions);
  return report;
}

SynTfPredictor::SynTfPredictor(SynTfConfig config) : config_(std::move(config)) {
  config_.prior.validate();
}

void SynTfPredictor::reset(std::span<const Symbol> padding) {
  // the statistics table needs D+1 context symbols; a header that carries
  // only D is left-extended deterministically
  std::vector<Symbol> pad(padding.begin(), padding.end());
  while (int(pad.size()) < config_.prior.depth + 1) pad.insert(pad.begin(), Symbol(0));
  sim_.emplace(config_, pad);
}

void SynTfPredictor::predict(std::span<double> out) const {
  if (!sim_) throw std::logic_error("SynTfPredictor: reset() not called");
  const auto p = sim_->predict();
  std::copy(p.begin(), p.end(), out.begin());
}

void SynTfPredictor::update(Symbol x) {
  if (!sim_) throw std::logic_error("SynTfPredictor: reset() not called");
  sim_->update(x);
}

std::string SynTfPredictor::name() const {
  std::string n = "syntf";
  if (config_.variant != FeatureVariant::full) {
    n += ':';
    n += feature_variant_name(config_.variant);
  }
  return n;
}

}  // namespace vomc
