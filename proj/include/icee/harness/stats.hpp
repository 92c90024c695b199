#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "icee/common.hpp"

namespace icee::harness {

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw InputError("mean of empty vector");
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

// Normal-approximation 95% confidence half-width of the mean (the
// parenthetical convention of the result tables).
inline double ci95_halfwidth(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return 1.959963984540054 * sample_std(v) / std::sqrt(double(v.size()));
}

inline std::vector<double> ranks_of(const std::vector<double>& v) {
  const int n = int(v.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * (i + j) + 1.0;  // average rank for ties
    for (int k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw InputError("pearson needs matched vectors");
  const double ma = mean_of(a), mb = mean_of(b);
  double num = 0, da = 0, db = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da == 0 || db == 0) return 0.0;
  return num / std::sqrt(da * db);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks_of(a), ranks_of(b));
}

}  // namespace icee::harness
