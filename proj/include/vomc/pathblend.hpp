#pragma once

// Path-blending form of the Bayes-optimal prediction: a convex combination
// of per-depth Dirichlet posterior means along the current suffix path,
// with log-weight increments
//   delta_l = ln(1-lambda) - [l=D] ln(lambda)
//           + le_{s_l} - le_{s_{l-1}} + sum_q lw_{q s_{l-1}} - lw_{s_l},
// where the sum over children includes the on-path child.  The weights equal
// the posterior probability that the depth-l path node is a leaf of the
// generating tree, which the enumeration oracle in ctw.hpp checks directly.

#include <span>
#include <vector>

#include "vomc/ctw.hpp"
#include "vomc/stats.hpp"

namespace vomc {

struct BlendWeights {
  std::vector<double> omega;  // D+1 entries, simplex
  std::vector<double> delta;  // D entries; delta[l-1] = ln omega_l - ln omega_{l-1}
};

// Normalize cumulative log-weights (0, d_1, d_1+d_2, ...) into the simplex.
std::vector<double> omega_from_deltas(std::span<const double> delta);

// sum_l omega_l * predictives[l]
std::vector<double> convex_blend(std::span<const double> omega,
                                 const std::vector<std::vector<double>>& predictives);

// Dirichlet posterior means (alpha + n)/(alpha_sum + total) for the suffixes
// of `context` at depths 0..max_depth, counts taken from the table.
std::vector<std::vector<double>> depth_predictives(const CountTable& table,
                                                   std::span<const double> alpha,
                                                   ContextView context, int max_depth);

// Same means computed from a CTW path snapshot.
std::vector<std::vector<double>> depth_predictives(const PathSnapshot& snap,
                                                   std::span<const double> alpha);

BlendWeights blend_weights(const PathSnapshot& snap, double lambda);

std::vector<double> blend_predict(const BlendWeights& weights,
                                  const std::vector<std::vector<double>>& predictives);

// Convenience: full path-blending prediction from a live CTW state.
std::vector<double> blend_predict(const CtwState& state);

}  // namespace vomc
