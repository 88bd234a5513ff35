#pragma once

#include <functional>
#include <optional>
#include <string>

#include "wanderlab/blaschke.hpp"

namespace wanderlab {

// A sequence of normalized Blaschke products indexed from 0. The provider
// must be pure: the same index always yields the same product, so traces for
// distinct starting points can run in parallel with no shared state.
struct BlaschkeSequence {
  std::function<BlaschkeProduct(int)> provider;
  int degree_bound;
  std::optional<double> declared_radius;
};

// Fetches member n and enforces the sequence invariants on it.
inline BlaschkeProduct seq_member(const BlaschkeSequence& seq, int n) {
  require(n >= 0, "seq_member: index must be >= 0");
  require(static_cast<bool>(seq.provider), "seq_member: missing provider");
  BlaschkeProduct b = seq.provider(n);
  require(b.degree() >= 2 && b.degree() <= seq.degree_bound,
          "seq_member: member degree outside [2, degree_bound]");
  require(b.normalized, "seq_member: member must fix 0");
  return b;
}

struct OrbitTrace {
  DiskPoint start;
  // points[k] = B_k(start) with B_0 = id, B_{k+1} = b_k after B_k.
  std::vector<cplx> points;
  // Indices n with points[n] outside the closed disk of radius r but mapped
  // inside by b_n; filled only when the sequence declares a radius.
  std::vector<int> annulus_hits;
};

namespace detail {

inline std::vector<int> annulus_hits_from_points(
    const BlaschkeSequence& seq, const std::vector<cplx>& points, double r) {
  std::vector<int> hits;
  for (std::size_t n = 0; n + 1 < points.size(); ++n) {
    if (std::abs(points[n]) > r && std::abs(points[n + 1]) < r)
      hits.push_back(static_cast<int>(n));
  }
  return hits;
}

}  // namespace detail

inline OrbitTrace compose_orbit(const BlaschkeSequence& seq, DiskPoint z,
                                int n) {
  require(n >= 0, "compose_orbit: n must be >= 0");
  OrbitTrace trace{z, {}, {}};
  trace.points.reserve(static_cast<std::size_t>(n) + 1);
  trace.points.push_back(z.value);
  cplx v = z.value;
  for (int k = 0; k < n; ++k) {
    v = eval(seq_member(seq, k), v);
    trace.points.push_back(v);
  }
  if (seq.declared_radius) {
    // Membership in the step-n annulus needs b_n of the last point too.
    std::vector<cplx> extended = trace.points;
    extended.push_back(eval(seq_member(seq, n), v));
    trace.annulus_hits =
        detail::annulus_hits_from_points(seq, extended, *seq.declared_radius);
  }
  return trace;
}

// Indices n <= n_max whose orbit point lies in the moving annulus between
// the circle of radius r and its b_n preimage curve: |B_n(z)| > r while
// |b_n(B_n(z))| < r. At most one such index can exist for a uniformly
// hyperbolic sequence; tests assert that, this routine just reports.
inline std::vector<int> annulus_entry_indices(const BlaschkeSequence& seq,
                                              DiskPoint z, double r,
                                              int n_max) {
  require(r > 0.0 && r < 1.0, "annulus_entry_indices: r must be in (0,1)");
  require(n_max >= 0, "annulus_entry_indices: n_max must be >= 0");
  std::vector<cplx> points;
  points.reserve(static_cast<std::size_t>(n_max) + 2);
  cplx v = z.value;
  points.push_back(v);
  for (int k = 0; k <= n_max; ++k) {
    BlaschkeProduct b = seq_member(seq, k);
    for (const cplx& a : b.zeros)
      require(std::abs(a) < r,
              "annulus_entry_indices: member zeros must lie inside radius r");
    v = eval(b, v);
    points.push_back(v);
  }
  return detail::annulus_hits_from_points(seq, points, r);
}

struct HyperbolicityCertificate {
  double r_est;  // sup of zero moduli
  double s_est;  // sup of critical point moduli
  double C_est;  // sup of hyperbolic distance from 0 to a critical point
  bool uniformly_hyperbolic;
  std::string verdict;
  double margin;
  int n_max;
  int witness_r_n, witness_r_k;
  int witness_s_n, witness_s_k;
  int witness_C_n;
};

// Finite-horizon check of the uniform-hyperbolicity conditions: bounded
// degree is structural, so the estimate tracks zero moduli (r), critical
// point moduli (s) and critical hyperbolic distances seen along the fixed
// orbit at 0, which every member fixes. The verdict is explicitly "up to
// n_max"; nothing finite can rule out degeneration beyond the horizon.
inline HyperbolicityCertificate certify_uniform_hyperbolicity(
    const BlaschkeSequence& seq, int n_max, double margin = 0.05) {
  require(n_max >= 1, "certify_uniform_hyperbolicity: n_max must be >= 1");
  require(margin > 0.0 && margin < 1.0,
          "certify_uniform_hyperbolicity: margin must be in (0,1)");
  HyperbolicityCertificate cert{};
  cert.margin = margin;
  cert.n_max = n_max;
  cert.witness_r_n = cert.witness_r_k = -1;
  cert.witness_s_n = cert.witness_s_k = -1;
  cert.witness_C_n = -1;
  const DiskPoint origin(0.0, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    BlaschkeProduct b = seq_member(seq, n);
    for (int k = 0; k < b.degree(); ++k) {
      double m = std::abs(b.zeros[static_cast<std::size_t>(k)]);
      if (m > cert.r_est) {
        cert.r_est = m;
        cert.witness_r_n = n;
        cert.witness_r_k = k;
      }
    }
    std::vector<DiskPoint> crit = critical_points(b);
    for (int k = 0; k < static_cast<int>(crit.size()); ++k) {
      double m = std::abs(crit[static_cast<std::size_t>(k)].value);
      if (m > cert.s_est) {
        cert.s_est = m;
        cert.witness_s_n = n;
        cert.witness_s_k = k;
      }
      double d = hyp_dist(origin, crit[static_cast<std::size_t>(k)]);
      if (d > cert.C_est) {
        cert.C_est = d;
        cert.witness_C_n = n;
      }
    }
  }
  cert.uniformly_hyperbolic = cert.r_est < 1.0 - margin;
  cert.verdict = cert.uniformly_hyperbolic
                     ? "uniformly hyperbolic up to n_max (finite-horizon)"
                     : "not uniformly hyperbolic up to n_max (finite-horizon)";
  return cert;
}

// Average multiplier modulus over members 1..n (member 0 excluded to match
// the strong-contraction average convention).
inline double contraction_average(const BlaschkeSequence& seq, int n) {
  require(n >= 1, "contraction_average: n must be >= 1");
  double sum = 0.0;
  for (int k = 1; k <= n; ++k)
    sum += std::abs(multiplier(seq_member(seq, k)));
  return sum / n;
}

struct RateFitDetails {
  int fit_lo, fit_hi;  // inclusive index range used for the slope
  bool truncated;      // distances underflowed before n_max
};

// Fits log hyp_dist(B_n(z), B_n(z2)) against n on the tail half by least
// squares and returns exp(slope): the measured per-step contraction factor.
inline double measure_contraction_rate(const BlaschkeSequence& seq, DiskPoint z,
                                       DiskPoint z2, int n_max,
                                       RateFitDetails* details = nullptr) {
  require(z.value != z2.value, "measure_contraction_rate: z and z2 coincide");
  require(n_max >= 4, "measure_contraction_rate: n_max must be >= 4");
  std::vector<double> dist;
  cplx a = z.value, b = z2.value;
  dist.push_back(hyp_dist(z, z2));
  for (int k = 0; k < n_max; ++k) {
    BlaschkeProduct m = seq_member(seq, k);
    a = eval(m, a);
    b = eval(m, b);
    dist.push_back(hyp_dist(DiskPoint(a), DiskPoint(b)));
  }
  int hi = n_max;
  bool truncated = false;
  for (int n = 0; n <= n_max; ++n) {
    if (dist[static_cast<std::size_t>(n)] < 1e-300) {
      hi = n - 1;
      truncated = true;
      break;
    }
  }
  int lo = std::min(n_max / 2, std::max(0, hi - 1));
  if (details) *details = RateFitDetails{lo, hi, truncated};
  if (hi - lo < 1) return 0.0;  // fully collapsed orbit pair
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int n = lo; n <= hi; ++n) {
    double x = n, y = std::log(dist[static_cast<std::size_t>(n)]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  double denom = count * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) return 0.0;
  double slope = (count * sxy - sx * sy) / denom;
  return std::exp(slope);
}

// Iterates the scalar Schwarz bound t -> t (t + r)/(1 + r t) until it drops
// under eps; an a-priori horizon for orbit convergence to 0.
inline int schwarz_decay_horizon(double eps, double t0, double r) {
  require(eps > 0.0 && eps < 1.0, "schwarz_decay_horizon: eps must be in (0,1)");
  require(t0 >= 0.0 && t0 < 1.0, "schwarz_decay_horizon: t0 must be in [0,1)");
  require(r > 0.0 && r < 1.0, "schwarz_decay_horizon: r must be in (0,1)");
  double t = t0;
  int n = 0;
  const int cap = 100000;
  while (t >= eps && n < cap) {
    t = t * (t + r) / (1.0 + r * t);
    ++n;
  }
  require(n < cap, "schwarz_decay_horizon: did not converge within cap");
  return n;
}

// The alternating strongly-contracting-but-not-uniform example: odd members
// are the squaring map; even members pull a zero toward the boundary along
// the schedule. Even-index critical points then drift to -1, so no uniform
// critical bound exists while the average multiplier stays near 1/2.
inline BlaschkeSequence prop54_fixture(std::function<double(int)> a_schedule) {
  require(static_cast<bool>(a_schedule), "prop54_fixture: missing schedule");
  require(std::abs(a_schedule(2) - 0.5) <= 1e-12,
          "prop54_fixture: schedule must start at a(2) = 1/2");
  auto provider = [a_schedule](int n) -> BlaschkeProduct {
    if (n % 2 == 1 || n == 0) return blaschke_power(2);
    double a = a_schedule(n);
    require(a > 0.0 && a < 1.0, "prop54_fixture: schedule left (0,1)");
    if (n >= 4)
      require(a >= a_schedule(n - 2) - 1e-15,
              "prop54_fixture: schedule must be nondecreasing");
    return make_blaschke(cplx(1.0, 0.0), {cplx(0.0, 0.0), cplx(-a, 0.0)});
  };
  return BlaschkeSequence{provider, 2, std::nullopt};
}

inline double prop54_default_schedule(int n) {
  require(n >= 2 && n % 2 == 0, "prop54_default_schedule: even n >= 2 only");
  double k = n / 2.0;
  return 1.0 - 0.5 / (k * k);
}

}  // namespace wanderlab
