#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsde {

/// Pathwise state escaped the divergence guard box during an RDE solve.
struct divergence_error : std::runtime_error {
  std::size_t step;
  divergence_error(std::size_t step_index, const std::string& what)
      : std::runtime_error(what), step(step_index) {}
};

/// Two path objects live on incompatible grids (no implicit resampling).
struct grid_mismatch_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(double v, const std::string& name) {
  if (!std::isfinite(v)) throw std::invalid_argument(name + " is not finite");
}

/// Index of the first non-finite entry, or npos.
inline std::size_t first_non_finite(std::span<const double> v) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return i;
  return static_cast<std::size_t>(-1);
}

inline double sq(double x) { return x * x; }

/// FNV-1a over raw bytes; used for audit fingerprints of specs.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::span<const double> v,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(v.data(), v.size() * sizeof(double), h);
}

/// Euclidean norm of a flat vector.
inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace rsde
