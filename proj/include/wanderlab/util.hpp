#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wanderlab {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// Violated operation precondition; the CLI maps this to exit code 2.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown inside an otherwise valid call (divergence, branch
// ambiguity, root-count mismatch). Also exit code 2 at the CLI boundary.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw precondition_error(msg);
}

// Deterministic random stream. mt19937_64 has a fully specified sequence and
// the [0,1) mapping below avoids std::uniform_real_distribution, whose output
// is implementation-defined; identical seeds give identical doubles anywhere.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Area-uniform draw from the closed disk of the given radius.
  cplx disk(double radius) {
    double t = 2.0 * pi * unit();
    double r = radius * std::sqrt(unit());
    return std::polar(r, t);
  }

  std::uint64_t integer() { return gen_(); }

  // Sub-seed for index-pure providers: provider(n) must not depend on call
  // order, so each index derives its own stream from the base seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + index);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

 private:
  std::mt19937_64 gen_;
};

// Product evaluated as a balanced reduction tree. Keeps rounding error at
// O(log d) ulps instead of O(d) and gives an order-independent result.
inline cplx pairwise_product(std::vector<cplx> factors) {
  if (factors.empty()) return cplx(1.0, 0.0);
  while (factors.size() > 1) {
    std::size_t m = 0;
    for (std::size_t i = 0; i + 1 < factors.size(); i += 2)
      factors[m++] = factors[i] * factors[i + 1];
    if (factors.size() % 2 == 1) factors[m++] = factors.back();
    factors.resize(m);
  }
  return factors[0];
}

inline bool finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Shifts x by a multiple of 2pi into (anchor - pi, anchor + pi].
inline double unwrap_near(double x, double anchor) {
  double d = x - anchor;
  d -= 2.0 * pi * std::round(d / (2.0 * pi));
  return anchor + d;
}

}  // namespace wanderlab
