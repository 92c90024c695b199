#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "icee/common.hpp"
#include "icee/rng.hpp"

namespace icee::bo {

// Probability vector (over the original indices) of the rank-softmax data
// collection policy: sort ascending by value, the i-th ranked action (1-based)
// gets mass proportional to exp(gamma * (N - i) / (N - 1)). Lower values are
// favored for gamma > 0; ties keep their original order (stable sort).
inline Vecd rank_softmax_probs(const Vecd& values, double gamma) {
  const int n = int(values.size());
  if (n < 2) throw InputError("rank_softmax: need at least two actions");
  if (gamma < 0) throw InputError("rank_softmax: gamma must be nonnegative");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] < values[b]; });
  Vecd probs(n);
  double total = 0.0;
  for (int rank = 1; rank <= n; ++rank) {
    // exponent in [0, gamma]; shift by gamma so the largest term is exp(0)
    const double w = std::exp(gamma * double(n - rank) / double(n - 1) - gamma);
    probs[order[rank - 1]] = w;
    total += w;
  }
  probs /= total;
  return probs;
}

// Draws one action and returns (index, exact probability) for the importance
// weight U/pi with U = 1/N.
inline std::pair<int, double> rank_softmax_collector(const Vecd& values, double gamma,
                                                     Rng& rng) {
  const Vecd probs = rank_softmax_probs(values, gamma);
  const int idx = rng.categorical(probs);
  return {idx, probs[idx]};
}

}  // namespace icee::bo
