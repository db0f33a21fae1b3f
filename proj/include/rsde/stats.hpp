#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rsde {

/// Order-independent pairwise summation; keeps threaded accumulations
/// reproducible for a fixed element order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;        // sample std / sqrt(n)
  double variance = 0.0;  // unbiased sample variance
  std::size_t n = 0;
};

inline MeanSe mean_se(std::span<const double> v) {
  MeanSe r;
  r.n = v.size();
  if (r.n == 0) return r;
  r.mean = pairwise_sum(v) / static_cast<double>(r.n);
  if (r.n == 1) return r;
  std::vector<double> dev(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    const double d = v[i] - r.mean;
    dev[i] = d * d;
  }
  r.variance = pairwise_sum(dev) / static_cast<double>(r.n - 1);
  r.se = std::sqrt(r.variance / static_cast<double>(r.n));
  return r;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  double m = v[h];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + h - 1, v.begin() + h);
    m = 0.5 * (m + v[h - 1]);
  }
  return m;
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope needs matched samples, n >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

}  // namespace rsde
