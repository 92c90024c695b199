#pragma once

#include <cmath>
#include <vector>

#include "icee/bo/gp.hpp"
#include "icee/common.hpp"
#include "icee/types.hpp"

namespace icee::bo {

// Expected improvement for minimization: E[max(best - f, 0)] under
// f ~ N(mu, var). Degenerates to max(best - mu, 0) at zero variance.
inline double expected_improvement(double mu, double var, double best) {
  if (var < 0) throw InputError("expected_improvement: negative variance");
  const double sigma = std::sqrt(var);
  if (sigma == 0.0) return std::max(best - mu, 0.0);
  const double z = (best - mu) / sigma;
  return (best - mu) * norm_cdf(z) + sigma * norm_pdf(z);
}

// One suggestion of the GP-EI baseline: refit hyperparameters on the observed
// history, score every unqueried candidate, return the EI argmax (ties break
// to the lowest index).
inline int gp_ei_suggest(const Matd& X_obs, const Vecd& y_obs, const CandidateSet& cands,
                         const GPSpec& spec) {
  if (y_obs.size() < 1) throw InputError("gp_ei_suggest: empty history");
  std::vector<int> open;
  for (int i = 0; i < cands.size(); ++i)
    if (!cands.queried[i]) open.push_back(i);
  if (open.empty()) throw InputError("gp_ei_suggest: no unqueried candidates");
  if (open.size() == 1) return open[0];

  const double mean_y = y_obs.mean();
  const Vecd yc = y_obs.array() - mean_y;
  const GPHyper hyper = fit_gp_hyperparams(X_obs, yc, spec);

  Matd Xstar(int(open.size()), cands.dim());
  for (size_t i = 0; i < open.size(); ++i) Xstar.row(int(i)) = cands.locations.row(open[i]);
  const GPPosterior post = gp_posterior(X_obs, yc, hyper, Xstar, spec.jitter);

  const double best = y_obs.minCoeff() - mean_y;
  int arg = 0;
  double best_ei = -1.0;
  for (int i = 0; i < int(open.size()); ++i) {
    const double ei = expected_improvement(post.mean[i], post.var[i], best);
    if (ei > best_ei) {
      best_ei = ei;
      arg = i;
    }
  }
  return open[arg];
}

}  // namespace icee::bo
