#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "icee/common.hpp"
#include "icee/rng.hpp"
#include "icee/types.hpp"

namespace icee::bo {

// A 2D benchmark surface: closed form on its native domain plus the affine
// map from the normalized unit square.
struct Benchmark {
  double x_lo, x_hi, y_lo, y_hi;
  std::function<double(double, double)> f;

  double eval_normalized(double u, double v) const {
    return f(x_lo + u * (x_hi - x_lo), y_lo + v * (y_hi - y_lo));
  }
};

inline const std::map<std::string, Benchmark>& benchmark_registry() {
  static const std::map<std::string, Benchmark> registry = [] {
    std::map<std::string, Benchmark> r;
    const double pi = M_PI;

    r["branin"] = {-5, 10, 0, 15, [pi](double x, double y) {
                     const double b = 5.1 / (4 * pi * pi), c = 5 / pi, s = 10,
                                  t = 1 / (8 * pi);
                     const double u = y - b * x * x + c * x - 6;
                     return u * u + s * (1 - t) * std::cos(x) + s;
                   }};
    r["beale"] = {-4.5, 4.5, -4.5, 4.5, [](double x, double y) {
                    const double a = 1.5 - x + x * y;
                    const double b = 2.25 - x + x * y * y;
                    const double c = 2.625 - x + x * y * y * y;
                    return a * a + b * b + c * c;
                  }};
    r["bohachevsky"] = {-100, 100, -100, 100, [pi](double x, double y) {
                          return x * x + 2 * y * y - 0.3 * std::cos(3 * pi * x) -
                                 0.4 * std::cos(4 * pi * y) + 0.7;
                        }};
    r["bukin6"] = {-15, -5, -3, 3, [](double x, double y) {
                     return 100 * std::sqrt(std::abs(y - 0.01 * x * x)) +
                            0.01 * std::abs(x + 10);
                   }};
    r["dejong5"] = {-65.536, 65.536, -65.536, 65.536, [](double x, double y) {
                      static const double a[5] = {-32, -16, 0, 16, 32};
                      double s = 0.002;
                      for (int i = 0; i < 25; ++i) {
                        const double dx = x - a[i % 5], dy = y - a[i / 5];
                        s += 1.0 / (i + 1 + std::pow(dx, 6) + std::pow(dy, 6));
                      }
                      return 1.0 / s;
                    }};
    r["dropwave"] = {-5.12, 5.12, -5.12, 5.12, [](double x, double y) {
                       const double q = x * x + y * y;
                       return -(1 + std::cos(12 * std::sqrt(q))) / (0.5 * q + 2);
                     }};
    r["eggholder"] = {-512, 512, -512, 512, [](double x, double y) {
                        return -(y + 47) * std::sin(std::sqrt(std::abs(x / 2 + y + 47))) -
                               x * std::sin(std::sqrt(std::abs(x - (y + 47))));
                      }};
    r["goldsteinprice"] = {-2, 2, -2, 2, [](double x, double y) {
                             const double p =
                                 1 + (x + y + 1) * (x + y + 1) *
                                         (19 - 14 * x + 3 * x * x - 14 * y + 6 * x * y +
                                          3 * y * y);
                             const double q =
                                 30 + (2 * x - 3 * y) * (2 * x - 3 * y) *
                                          (18 - 32 * x + 12 * x * x + 48 * y -
                                           36 * x * y + 27 * y * y);
                             return p * q;
                           }};
    r["holdertable"] = {-10, 10, -10, 10, [pi](double x, double y) {
                          return -std::abs(
                              std::sin(x) * std::cos(y) *
                              std::exp(std::abs(1 - std::sqrt(x * x + y * y) / pi)));
                        }};
    r["michalewicz"] = {0, pi, 0, pi, [pi](double x, double y) {
                          auto term = [pi](double v, int i) {
                            return std::sin(v) *
                                   std::pow(std::sin(i * v * v / pi), 20);
                          };
                          return -(term(x, 1) + term(y, 2));
                        }};
    r["shubert"] = {-10, 10, -10, 10, [](double x, double y) {
                      double sx = 0, sy = 0;
                      for (int i = 1; i <= 5; ++i) {
                        sx += i * std::cos((i + 1) * x + i);
                        sy += i * std::cos((i + 1) * y + i);
                      }
                      return sx * sy;
                    }};
    r["sixhumpcamel"] = {-3, 3, -2, 2, [](double x, double y) {
                           return (4 - 2.1 * x * x + std::pow(x, 4) / 3) * x * x + x * y +
                                  (-4 + 4 * y * y) * y * y;
                         }};
    r["threehumpcamel"] = {-5, 5, -5, 5, [](double x, double y) {
                             return 2 * x * x - 1.05 * std::pow(x, 4) + std::pow(x, 6) / 6 +
                                    x * y + y * y;
                           }};
    // kim1/kim2/kim3: stand-in surfaces. The registry keeps the names so runs
    // referencing them work; the surfaces are standard multimodal benchmarks.
    r["kim1"] = {-32.768, 32.768, -32.768, 32.768, [pi](double x, double y) {
                   const double q = 0.5 * (x * x + y * y);
                   return -20 * std::exp(-0.2 * std::sqrt(q)) -
                          std::exp(0.5 * (std::cos(2 * pi * x) + std::cos(2 * pi * y))) +
                          20 + std::exp(1.0);
                 }};
    r["kim2"] = {-10, 10, -10, 10, [pi](double x, double y) {
                   const double a = std::sin(3 * pi * x);
                   const double b = std::sin(3 * pi * y);
                   const double c = std::sin(2 * pi * y);
                   return a * a + (x - 1) * (x - 1) * (1 + b * b) +
                          (y - 1) * (y - 1) * (1 + c * c);
                 }};
    r["kim3"] = {-5.12, 5.12, -5.12, 5.12, [pi](double x, double y) {
                   return 20 + x * x - 10 * std::cos(2 * pi * x) + y * y -
                          10 * std::cos(2 * pi * y);
                 }};
    return r;
  }();
  return registry;
}

inline std::vector<std::string> benchmark_names() {
  std::vector<std::string> names;
  for (const auto& [name, bench] : benchmark_registry()) names.push_back(name);
  return names;
}

// n uniform locations on the unit square; values standardized to zero mean
// and unit (population) variance.
inline CandidateSet load_benchmark(const std::string& name, int n, Rng& rng) {
  const auto& registry = benchmark_registry();
  const auto it = registry.find(name);
  if (it == registry.end()) throw InputError("unknown benchmark function: " + name);
  const Benchmark& bench = it->second;

  CandidateSet set;
  set.locations.resize(n, 2);
  set.values.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(), v = rng.uniform();
    set.locations(i, 0) = u;
    set.locations(i, 1) = v;
    set.values[i] = bench.eval_normalized(u, v);
  }
  const double mean = set.values.mean();
  const double var = (set.values.array() - mean).square().sum() / n;
  set.values = (set.values.array() - mean) / std::sqrt(std::max(var, 1e-300));
  set.queried.assign(n, 0);
  set.provenance = name;
  return set;
}

}  // namespace icee::bo
