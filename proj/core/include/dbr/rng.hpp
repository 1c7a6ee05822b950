#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "dbr/types.hpp"

namespace dbr {

// Counter-based generator: output depends only on (seed, stream name, counter),
// so runs are reproducible regardless of call interleaving across streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_name) : key_(mix(seed ^ fnv1a(stream_name))) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Point in the open right half-plane at desk scale.
  Complex halfplane_point() {
    double re = std::exp(uniform(std::log(0.1), std::log(5.0)));
    double im = uniform(-3.0, 3.0);
    return {re, im};
  }

  // Point in the open unit disk, radius bounded away from the boundary.
  Complex disk_point() {
    double r = 0.95 * std::sqrt(uniform());
    double t = uniform(0.0, 2.0 * 3.14159265358979323846);
    return {r * std::cos(t), r * std::sin(t)};
  }

  Complex complex_unit_box() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

  CVec cvec(Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_unit_box();
    return v;
  }

  CMat cmat(Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_unit_box();
    return m;
  }

  // Pairwise-distinct half-plane nodes (separation 1e-6, far above the 1e-8 Gram tolerance).
  std::vector<Complex> halfplane_nodes(int count) {
    std::vector<Complex> nodes;
    while (static_cast<int>(nodes.size()) < count) {
      Complex cand = halfplane_point();
      bool ok = true;
      for (Complex n : nodes)
        if (std::abs(n - cand) < 1e-6) ok = false;
      if (ok) nodes.push_back(cand);
    }
    return nodes;
  }

  std::vector<Complex> disk_nodes(int count) {
    std::vector<Complex> nodes;
    while (static_cast<int>(nodes.size()) < count) {
      Complex cand = disk_point();
      bool ok = true;
      for (Complex n : nodes)
        if (std::abs(n - cand) < 1e-6) ok = false;
      if (ok) nodes.push_back(cand);
    }
    return nodes;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Deterministic low-discrepancy sequence for quasi-random scan points.
inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  for (std::uint64_t i = index + 1; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

}  // namespace dbr
