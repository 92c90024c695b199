#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "icee/common.hpp"
#include "icee/rng.hpp"
#include "icee/types.hpp"

namespace icee::bo {

// Matern 5/2 prior over the unit cube, unit signal variance, zero mean.
struct GPSpec {
  double len_min = 0.05;
  double len_max = 0.3;
  double signal_var = 1.0;
  double jitter = 1e-8;
  double noise_floor = 1e-6;

  void validate() const {
    if (len_min <= 0 || len_max < len_min) throw ConfigError("invalid lengthscale range");
    if (jitter <= 0) throw ConfigError("jitter must be positive");
  }
};

// k(r) = s^2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r) with r the lengthscale-
// scaled Euclidean distance.
inline double matern52(double r, double signal_var = 1.0) {
  static const double sqrt5 = 2.2360679774997896964;
  const double a = sqrt5 * r;
  return signal_var * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

inline double scaled_distance(const Eigen::Ref<const Vecd>& a,
                              const Eigen::Ref<const Vecd>& b, const Vecd& lengthscales) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / lengthscales[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline Matd kernel_matrix(const Matd& X, const Vecd& lengthscales, double signal_var,
                          double diag_add) {
  const int n = int(X.rows());
  Matd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = signal_var + diag_add;
    for (int j = 0; j < i; ++j) {
      const double k = matern52(scaled_distance(X.row(i), X.row(j), lengthscales), signal_var);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

inline Matd cross_kernel(const Matd& X, const Matd& Xstar, const Vecd& lengthscales,
                         double signal_var) {
  Matd K(X.rows(), Xstar.rows());
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < Xstar.rows(); ++j)
      K(i, j) = matern52(scaled_distance(X.row(i), Xstar.row(j), lengthscales), signal_var);
  return K;
}

// Exact joint draw from the prior at the given locations.
inline Vecd sample_gp_values(const Matd& locations, const GPSpec& spec, Rng& rng,
                             const Vecd& lengthscales) {
  spec.validate();
  const Matd K = kernel_matrix(locations, lengthscales, spec.signal_var, spec.jitter);
  Eigen::LLT<Matd> llt(K);
  if (llt.info() != Eigen::Success)
    throw NumericError("GP prior factorization failed at jitter " + std::to_string(spec.jitter));
  Vecd z(locations.rows());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return llt.matrixL() * z;
}

// n uniform locations in [0,1]^d, lengthscales drawn per dimension from the
// spec range, values drawn jointly from the prior.
inline CandidateSet sample_gp_candidates(int n, int d, const GPSpec& spec, Rng& rng,
                                         uint64_t seed_tag = 0) {
  if (n < 1 || d < 1) throw InputError("sample_gp_candidates: n and d must be positive");
  spec.validate();
  Matd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform();
  Vecd lengthscales(d);
  for (int j = 0; j < d; ++j) lengthscales[j] = rng.uniform(spec.len_min, spec.len_max);
  CandidateSet set;
  set.locations = std::move(X);
  set.values = sample_gp_values(set.locations, spec, rng, lengthscales);
  set.queried.assign(n, 0);
  set.provenance = "gp-sample";
  set.seed = seed_tag;
  return set;
}

struct GPHyper {
  Vecd lengthscales;
  double signal_var = 1.0;
  double noise_var = 1e-6;
};

// Negative log marginal likelihood of centered targets.
inline double gp_nlml(const Matd& X, const Vecd& y, const GPHyper& h, double jitter) {
  const int m = int(y.size());
  const Matd K = kernel_matrix(X, h.lengthscales, h.signal_var, h.noise_var + jitter);
  Eigen::LLT<Matd> llt(K);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Vecd alpha = llt.solve(y);
  double logdet = 0.0;
  for (int i = 0; i < m; ++i) logdet += std::log(llt.matrixLLT()(i, i));
  return 0.5 * y.dot(alpha) + logdet + 0.5 * m * std::log(2.0 * M_PI);
}

// Minimal Nelder-Mead used for the few-parameter marginal-likelihood fits.
inline Vecd nelder_mead(const std::function<double(const Vecd&)>& f, Vecd x0, double step,
                        int max_iters) {
  const int n = int(x0.size());
  std::vector<Vecd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 1; i <= n; ++i) pts[i][i - 1] += step;
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);
  for (int iter = 0; iter < max_iters; ++iter) {
    // order
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Vecd> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (int i = 0; i <= n; ++i) {
      p2[i] = pts[idx[i]];
      v2[i] = vals[idx[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);

    Vecd centroid = Vecd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[i];
    centroid /= double(n);

    const Vecd xr = centroid + (centroid - pts[n]);
    const double fr = f(xr);
    if (fr < vals[0]) {
      const Vecd xe = centroid + 2.0 * (centroid - pts[n]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      const Vecd xc = centroid + 0.5 * (pts[n] - centroid);
      const double fc = f(xc);
      if (fc < vals[n]) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (vals[i] < vals[best]) best = i;
  return pts[best];
}

// Fits lengthscales, signal variance and noise variance by maximizing the
// marginal likelihood with a few Nelder-Mead restarts. Falls back to
// prior-scale hyperparameters when every start fails to factorize.
inline GPHyper fit_gp_hyperparams(const Matd& X, const Vecd& y_centered, const GPSpec& spec,
                                  int restarts = 4, int iters = 160) {
  const int d = int(X.cols());
  const double var_y = std::max(y_centered.squaredNorm() / std::max<int>(1, int(y_centered.size())), 1e-8);

  auto unpack = [&](const Vecd& t) {
    GPHyper h;
    h.lengthscales = t.head(d).array().exp();
    h.signal_var = std::exp(t[d]);
    h.noise_var = std::exp(t[d + 1]) + spec.noise_floor;
    return h;
  };
  auto objective = [&](const Vecd& t) {
    for (int i = 0; i < t.size(); ++i)
      if (std::abs(t[i]) > 12.0) return std::numeric_limits<double>::infinity();
    return gp_nlml(X, y_centered, unpack(t), spec.jitter);
  };

  const double len_starts[] = {0.07, 0.15, 0.3, 0.6};
  Vecd best_t;
  double best_val = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Vecd t0(d + 2);
    for (int i = 0; i < d; ++i) t0[i] = std::log(len_starts[r % 4]);
    t0[d] = std::log(var_y);
    t0[d + 1] = std::log(1e-4 * var_y + spec.noise_floor);
    const Vecd t = nelder_mead(objective, t0, 0.5, iters);
    const double v = objective(t);
    if (v < best_val) {
      best_val = v;
      best_t = t;
    }
  }
  if (!std::isfinite(best_val)) {
    std::fprintf(stderr, "warning: GP fit singular, falling back to prior-scale hyperparameters\n");
    GPHyper h;
    h.lengthscales = Vecd::Constant(d, 0.5 * (spec.len_min + spec.len_max));
    h.signal_var = spec.signal_var;
    h.noise_var = spec.noise_floor;
    return h;
  }
  return unpack(best_t);
}

struct GPPosterior {
  Vecd mean;
  Vecd var;  // latent variance, clamped at zero
};

inline GPPosterior gp_posterior(const Matd& X, const Vecd& y_centered, const GPHyper& h,
                                const Matd& Xstar, double jitter) {
  const Matd K = kernel_matrix(X, h.lengthscales, h.signal_var, h.noise_var + jitter);
  Eigen::LLT<Matd> llt(K);
  if (llt.info() != Eigen::Success)
    throw NumericError("GP posterior factorization failed at jitter " + std::to_string(jitter));
  const Matd Ks = cross_kernel(X, Xstar, h.lengthscales, h.signal_var);
  GPPosterior post;
  post.mean = Ks.transpose() * llt.solve(y_centered);
  const Matd V = llt.matrixL().solve(Ks);
  post.var = (Vecd::Constant(Xstar.rows(), h.signal_var) -
              V.colwise().squaredNorm().transpose())
                 .cwiseMax(0.0);
  return post;
}

}  // namespace icee::bo
