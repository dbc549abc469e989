#include "vomc/pathblend.hpp"

#include <cmath>
#include <stdexcept>

namespace vomc {

std::vector<double> omega_from_deltas(std::span<const double> delta) {
  std::vector<double> cum(delta.size() + 1, 0.0);
  for (std::size_t l = 0; l < delta.size(); ++l) cum[l + 1] = cum[l] + delta[l];
  double m = cum[0];
  for (double c : cum) m = std::max(m, c);
  double z = 0.0;
  for (double& c : cum) {
    c = std::exp(c - m);
    z += c;
  }
  for (double& c : cum) c /= z;
  return cum;
}

std::vector<double> convex_blend(std::span<const double> omega,
                                 const std::vector<std::vector<double>>& predictives) {
  if (omega.size() != predictives.size())
    throw std::invalid_argument("convex_blend: length mismatch");
  std::vector<double> out(predictives.at(0).size(), 0.0);
  for (std::size_t l = 0; l < omega.size(); ++l)
    for (std::size_t a = 0; a < out.size(); ++a)
      out[a] += omega[l] * predictives[l][a];
  return out;
}

namespace {

std::vector<double> dirichlet_mean(std::span<const std::uint32_t> counts,
                                   std::span<const double> alpha) {
  double denom = 0.0;
  for (std::size_t a = 0; a < alpha.size(); ++a) denom += alpha[a] + double(counts[a]);
  std::vector<double> p(alpha.size());
  for (std::size_t a = 0; a < alpha.size(); ++a)
    p[a] = (alpha[a] + double(counts[a])) / denom;
  return p;
}

}  // namespace

std::vector<std::vector<double>> depth_predictives(const CountTable& table,
                                                   std::span<const double> alpha,
                                                   ContextView context, int max_depth) {
  if (int(context.size()) < max_depth)
    throw std::invalid_argument("depth_predictives: context shorter than depth");
  std::vector<std::vector<double>> out;
  out.reserve(std::size_t(max_depth) + 1);
  for (int l = 0; l <= max_depth; ++l) {
    const auto counts = table.counts(context.subspan(0, std::size_t(l)));
    out.push_back(dirichlet_mean(counts, alpha));
  }
  return out;
}

std::vector<std::vector<double>> depth_predictives(const PathSnapshot& snap,
                                                   std::span<const double> alpha) {
  std::vector<std::vector<double>> out;
  out.reserve(snap.counts.size());
  for (const auto& counts : snap.counts) out.push_back(dirichlet_mean(counts, alpha));
  return out;
}

BlendWeights blend_weights(const PathSnapshot& snap, double lambda) {
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw std::invalid_argument("blend_weights: lambda out of range");
  const int d = snap.depth;
  BlendWeights w;
  w.delta.resize(std::size_t(d));
  const double ln_lambda = std::log(lambda);
  const double ln_keep = std::log1p(-lambda);
  for (int l = 1; l <= d; ++l) {
    double sibling_sum = 0.0;
    for (double lw : snap.child_log_pw[std::size_t(l - 1)]) sibling_sum += lw;
    w.delta[std::size_t(l - 1)] = ln_keep - (l == d ? ln_lambda : 0.0) +
                                  snap.log_pe[std::size_t(l)] - snap.log_pe[std::size_t(l - 1)] +
                                  sibling_sum - snap.log_pw[std::size_t(l)];
  }
  w.omega = omega_from_deltas(w.delta);
  return w;
}

std::vector<double> blend_predict(const BlendWeights& weights,
                                  const std::vector<std::vector<double>>& predictives) {
  return convex_blend(weights.omega, predictives);
}

std::vector<double> blend_predict(const CtwState& state) {
  const PathSnapshot snap = state.path_snapshot();
  const BlendWeights w = blend_weights(snap, state.prior().lambda);
  return blend_predict(w, depth_predictives(snap, state.prior().alpha));
}

}  // namespace vomc
