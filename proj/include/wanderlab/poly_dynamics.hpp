#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "poly.hpp"
#include "util.hpp"

// Polynomial dynamics in the escape region and on grand orbits: Green's
// function and the Boettcher coordinate near infinity, equipotential level
// curves traced by Newton continuation, breadth-first grand-orbit sampling,
// an evidence-grade discreteness diagnostic for grand orbits, and branch
// transport of grand-orbit relations along parameter paths.

namespace wanderlab {

struct Polynomial {
  coeffs c;          // ascending; c.back() is the leading coefficient
  bool fixes_zero = false;

  int degree() const { return static_cast<int>(c.size()) - 1; }
};

inline Polynomial make_polynomial(coeffs c) {
  require(c.size() >= 3, "make_polynomial: degree must be >= 2");
  for (const cplx& a : c)
    require(std::isfinite(a.real()) && std::isfinite(a.imag()),
            "make_polynomial: coefficients must be finite");
  require(std::abs(c.back()) > 0.0,
          "make_polynomial: leading coefficient must be nonzero");
  Polynomial p;
  p.fixes_zero = (std::abs(c.front()) == 0.0);
  p.c = std::move(c);
  return p;
}

inline cplx eval(const Polynomial& p, cplx z) { return poly_eval(p.c, z); }

inline cplx derivative_value(const Polynomial& p, cplx z) {
  return poly_eval(poly_derivative(p.c), z);
}

inline std::vector<cplx> critical_points(const Polynomial& p) {
  std::vector<cplx> r = poly_roots(poly_derivative(p.c));
  poly_sort_roots(r);
  return r;
}

inline std::vector<cplx> preimages(const Polynomial& p, cplx w) {
  coeffs shifted = p.c;
  shifted[0] -= w;
  std::vector<cplx> r = poly_roots(shifted);
  poly_sort_roots(r);
  return r;
}

namespace detail {

inline double coefficient_tail_sum(const Polynomial& p) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < p.c.size(); ++k) s += std::abs(p.c[k]);
  return s;
}

inline double winding_about(const std::vector<cplx>& pts, cplx around) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cplx a = pts[i] - around;
    cplx b = pts[(i + 1) % pts.size()] - around;
    total += std::arg(b / a);
  }
  return total / (2.0 * pi);
}

// Radius beyond which |P(z)| >= 2|z|: for |z| >= max(1, (2+sum)/|lead|),
//   |P(z)| >= |z|^(d-1) (|lead||z| - sum) >= 2|z|.
inline double escape_radius_of(const Polynomial& p) {
  return std::max(1.0,
                  (2.0 + coefficient_tail_sum(p)) / std::abs(p.c.back()));
}

// Largest modulus at which P may still be evaluated without overflow risk,
// and at which the asymptotic form of the potential is exact to ~1e-20.
inline double potential_stop_radius(const Polynomial& p) {
  double budget =
      (280.0 - std::log10(1.0 + coefficient_tail_sum(p) +
                          std::abs(p.c.back()))) /
      static_cast<double>(p.degree());
  double stop = std::pow(10.0, std::min(budget, 60.0));
  return std::max(stop, 4.0 * escape_radius_of(p));
}

}  // namespace detail

struct BottcherData {
  double escape_radius = 0.0;  // |P(z)| >= 2|z| whenever |z| >= escape_radius
  int max_iter = 0;
  cplx lead_root;              // principal (d-1)-th root of the leading coeff
};

inline BottcherData make_bottcher(const Polynomial& p, int max_iter = 4096) {
  require(max_iter >= 1, "make_bottcher: max_iter must be >= 1");
  BottcherData b;
  b.escape_radius = detail::escape_radius_of(p);
  b.max_iter = max_iter;
  b.lead_root = std::exp(std::log(p.c.back()) /
                         static_cast<double>(p.degree() - 1));
  return b;
}

// Green's function of the basin of infinity:
//   G(z) = lim d^{-k} log|P^k(z)|  (0 on bounded orbits).
// The orbit is run until it provably escapes (|z| >= escape radius, after
// which the modulus at least doubles each step) and then to a stop radius
// where the asymptotic closed form  log|z| + log|lead|/(d-1)  is exact far
// below the 1e-10 tolerance.  A return of exactly 0.0 means the orbit did
// not escape within max_iter steps -- a horizon statement, not a proof of
// boundedness.  (An orbit escaping only after ~1075 iterations would carry
// G < 1e-300 and is also reported as 0.)
inline double green_value(const Polynomial& p, cplx z, int max_iter = 4096) {
  require(max_iter >= 1, "green_value: max_iter must be >= 1");
  require(std::isfinite(z.real()) && std::isfinite(z.imag()),
          "green_value: point must be finite");
  const double d = p.degree();
  const double esc = detail::escape_radius_of(p);
  const double stop = detail::potential_stop_radius(p);
  const double lead_term = std::log(std::abs(p.c.back())) / (d - 1.0);

  double inv = 1.0;
  int k = 0;
  for (; k < max_iter; ++k) {
    if (std::abs(z) >= esc) break;
    z = eval(p, z);
    inv /= d;
  }
  if (std::abs(z) < esc) return 0.0;

  // escaped: resolve the potential (modulus doubles per step, so this phase
  // is provably short; the guard is pure paranoia)
  for (int extra = 0; extra < 2000; ++extra) {
    if (std::abs(z) >= stop)
      return inv * (std::log(std::abs(z)) + lead_term);
    z = eval(p, z);
    inv /= d;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw numeric_error("green_value: overflow while resolving the potential");
  }
  throw numeric_error(
      "green_value: escape detected but the potential did not resolve");
}

// Boettcher coordinate near infinity, via the root-tracked product
//   beta(z) = lead^{1/(d-1)} z prod_k (P(z_k)/(lead z_k^d))^{d^-(k+1)},
// accumulated in logarithms (every ratio stays in the right half plane once
// |z| >= 2 escape_radius, which is the precondition).
inline cplx bottcher_coordinate(const Polynomial& p, cplx z) {
  const double d = p.degree();
  const cplx lead = p.c.back();
  const double esc = detail::escape_radius_of(p);
  require(std::abs(z) >= 2.0 * esc,
          "bottcher_coordinate: point must satisfy |z| >= 2 x escape radius");
  const double stop = detail::potential_stop_radius(p);

  cplx log_acc = std::log(z) + std::log(lead) / (d - 1.0);
  double inv = 1.0;
  for (int k = 0; k < 2000; ++k) {
    if (std::abs(z) >= stop) return std::exp(log_acc);
    cplx zd = std::pow(z, p.degree());
    cplx w = eval(p, z);
    inv /= d;
    log_acc += inv * std::log(w / (lead * zd));
    z = w;
  }
  throw numeric_error("bottcher_coordinate: product did not resolve");
}

// Smallest safe level scale for the equipotential construction:
//   R = safety * exp(max G over critical points),
// so every critical point sits strictly below the base level log R (the
// level curves above it are Jordan curves and the Boettcher chart is
// injective there).  Bounded critical orbits contribute exp(0) = 1, making
// R = safety exactly.
inline double choose_R(const Polynomial& p, double safety) {
  require(safety > 1.0, "choose_R: safety must be > 1");
  double gmax = 0.0;
  for (const cplx& c : critical_points(p))
    gmax = std::max(gmax, green_value(p, c));
  return std::max(safety, safety * std::exp(gmax));
}

struct EquipotentialDomain {
  Polynomial P;
  double R = 0.0;
  int n = 0;
  std::vector<cplx> boundary;   // closed polyline, uniform Boettcher angles
  double level = 0.0;           // d^n log R
  double level_residual = 0.0;  // worst measured |G(sample) - level|
};

namespace detail {

// Solve P(u) = target by guarded Newton from the given seed.
inline cplx poly_newton(const Polynomial& p, cplx target, cplx seed,
                        const char* who) {
  cplx u = seed;
  double tol = 1e-13 * std::max(1.0, std::abs(target));
  for (int it = 0; it < 60; ++it) {
    cplx f = eval(p, u) - target;
    if (std::abs(f) <= tol) return u;
    cplx df = derivative_value(p, u);
    if (!(std::abs(df) > 0.0))
      throw numeric_error(std::string(who) + ": vanishing derivative");
    cplx step = f / df;
    double cap = 0.5 * std::max(1.0, std::abs(u));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    u -= step;
  }
  throw numeric_error(std::string(who) + ": Newton did not converge");
}

}  // namespace detail

// Level curve {G = d^n log R}, traced at uniform Boettcher angles: each
// sample is seeded on a circle at large modulus (where the Boettcher chart
// is its asymptote) and pulled down level by level with branch-targeted
// Newton corrections.  The result is validated: winding 1 around every root
// of P and Green residual below 1e-6 at every sample.
inline EquipotentialDomain equipotential_curve(const Polynomial& p, double R,
                                               int n, int n_samples) {
  require(R > 1.0, "equipotential_curve: R must be > 1");
  require(n >= 0, "equipotential_curve: n must be >= 0");
  require(n_samples >= 16, "equipotential_curve: need at least 16 samples");
  const double d = p.degree();
  const double level = std::pow(d, n) * std::log(R);
  // curve points sit at modulus ~ exp(level) / |lead|^(1/(d-1)); require
  // that to stay inside double range (levels at or beyond the asymptotic
  // stop radius are seeded directly off the large-modulus chart and need
  // no polynomial evaluation, so only representability limits the depth)
  const double lead_adj =
      std::log(std::abs(p.c.back())) / (d - 1.0);
  require(level - std::min(0.0, lead_adj) < 690.0,
          "equipotential_curve: level too deep for double-precision moduli");

  for (const cplx& c : critical_points(p))
    if (green_value(p, c) >= level)
      throw precondition_error(
          "equipotential_curve: level does not exceed the critical potential; "
          "the level curve is not a Jordan curve");

  const cplx lead = p.c.back();
  const double stop = detail::potential_stop_radius(p);
  const cplx lead_root =
      std::exp(std::log(lead) / static_cast<double>(p.degree() - 1));
  int K = 0;
  double top = level;
  while (top < std::log(stop)) {
    top *= d;
    ++K;
  }

  EquipotentialDomain dom;
  dom.P = p;
  dom.R = R;
  dom.n = n;
  dom.level = level;
  dom.boundary.reserve(n_samples);
  for (int j = 0; j < n_samples; ++j) {
    double theta = 2.0 * pi * j / static_cast<double>(n_samples);
    double arg_top = std::pow(d, K) * theta;
    cplx z = std::polar(std::exp(top), arg_top) / lead_root;
    for (int k = K - 1; k >= 0; --k) {
      double intended = std::pow(d, k) * theta;
      cplx ratio = z / lead;
      double seed_arg =
          unwrap_near(std::arg(ratio), d * intended) / d;
      cplx seed = std::polar(std::pow(std::abs(ratio), 1.0 / d), seed_arg);
      try {
        z = detail::poly_newton(p, z, seed, "equipotential_curve");
      } catch (const numeric_error& e) {
        throw numeric_error(std::string(e.what()) + " (angle " +
                            std::to_string(theta) + ", level index " +
                            std::to_string(k) + ")");
      }
    }
    dom.boundary.push_back(z);
  }

  for (const cplx& root : poly_roots(p.c))
    if (std::abs(detail::winding_about(dom.boundary, root) - 1.0) > 0.1)
      throw numeric_error(
          "equipotential_curve: traced curve does not wind once around every "
          "root");
  for (const cplx& s : dom.boundary)
    dom.level_residual =
        std::max(dom.level_residual, std::abs(green_value(p, s) - level));
  if (dom.level_residual > 1e-6)
    throw numeric_error(
        "equipotential_curve: Green residual " +
        std::to_string(dom.level_residual) + " exceeds 1e-6");
  return dom;
}

// ---------------------------------------------------------------------------
// Grand orbits.

// Closed-disk clipping region for orbit sampling.
struct ClipRegion {
  cplx center;
  double radius = 0.0;

  bool contains(cplx z) const { return std::abs(z - center) <= radius; }
};

// A point w related to the base by P^n(w) = P^m(base).
struct GrandOrbitPoint {
  cplx value;
  int n = 0;
  int m = 0;
};

struct GrandOrbitSample {
  cplx base;
  ClipRegion region;
  std::vector<GrandOrbitPoint> points;
  bool truncated = false;     // node cap hit, or forward orbit left double range
  std::size_t visited = 0;    // backward-tree nodes expanded
};

namespace detail {

// Spatial dedup at tolerance tol: two points are "the same" when closer than
// tol.  Quantized cell keys with a 3x3 neighbourhood check; quantization is
// done in doubles so arbitrarily large orbit values degrade gracefully (at
// magnitudes where the quantum is unrepresentable, distinct doubles are
// already farther apart than tol).
class PointDedup {
 public:
  explicit PointDedup(double tol) : tol_(tol) {}

  // Returns true if the point was new and was inserted.
  bool insert(cplx z) {
    double qx = std::floor(z.real() / tol_), qy = std::floor(z.imag() / tol_);
    for (double dx = -1.0; dx <= 1.0; dx += 1.0)
      for (double dy = -1.0; dy <= 1.0; dy += 1.0) {
        auto it = cells_.find(key(qx + dx, qy + dy));
        if (it == cells_.end()) continue;
        for (const cplx& p : it->second)
          if (std::abs(p - z) < tol_) return false;
      }
    cells_[key(qx, qy)].push_back(z);
    return true;
  }

 private:
  static std::uint64_t key(double qx, double qy) {
    auto fold = [](double v) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      return bits;
    };
    std::uint64_t h = fold(qx) * 0x9e3779b97f4a7c15ULL;
    h ^= fold(qy) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

  double tol_;
  std::unordered_map<std::uint64_t, std::vector<cplx>> cells_;
};

}  // namespace detail

// Breadth-first grand-orbit enumeration: backward trees of depth backward_m
// hang off every forward iterate P^k(base), k <= forward_n.  Emitted points
// are clipped to the region, deduplicated at 1e-9, and re-checked against
// the defining relation from scratch.  The traversal itself is not clipped
// (a branch may re-enter the region deeper down); it is bounded by node_cap,
// and hitting the cap sets the truncated flag.
inline GrandOrbitSample grand_orbit_sample(const Polynomial& p, cplx base,
                                           int forward_n, int backward_m,
                                           ClipRegion region,
                                           std::size_t node_cap = 1000000) {
  require(forward_n >= 0 && backward_m >= 0,
          "grand_orbit_sample: depths must be >= 0");
  require(std::isfinite(region.radius) && region.radius > 0.0,
          "grand_orbit_sample: region must be bounded with positive radius");
  require(std::isfinite(base.real()) && std::isfinite(base.imag()),
          "grand_orbit_sample: base must be finite");

  GrandOrbitSample out;
  out.base = base;
  out.region = region;

  std::vector<cplx> forward{base};
  for (int k = 0; k < forward_n; ++k) {
    cplx next = eval(p, forward.back());
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag()) ||
        std::abs(next) > 1e100) {
      out.truncated = true;  // forward orbit left usable double range
      break;
    }
    forward.push_back(next);
  }

  detail::PointDedup emitted(1e-9);
  auto emit = [&](cplx w, int n_steps, int m_steps) {
    if (!region.contains(w)) return;
    if (!emitted.insert(w)) return;
    cplx chk = w;
    for (int j = 0; j < n_steps; ++j) chk = eval(p, chk);
    const cplx want = forward[static_cast<std::size_t>(m_steps)];
    // scale-relative beyond unit magnitude: an absolute 1e-8 is below the
    // resolution of double once forward values grow large
    if (std::abs(chk - want) >= 1e-8 * std::max(1.0, std::abs(want)))
      throw numeric_error(
          "grand_orbit_sample: emitted point fails the defining relation");
    out.points.push_back(GrandOrbitPoint{w, n_steps, m_steps});
  };

  for (std::size_t k = 0; k < forward.size(); ++k) {
    // Frontier pruning is much tighter than the output dedup: nearby tree
    // nodes can have well-separated preimages (square roots magnify small
    // moduli), so merging at the output tolerance would delete genuinely
    // distinct descendants.  1e-12 still collapses exact critical
    // collisions while keeping such pairs alive.
    detail::PointDedup tree_seen(1e-12);
    std::vector<cplx> frontier{forward[k]};
    tree_seen.insert(forward[k]);
    emit(forward[k], 0, static_cast<int>(k));
    for (int depth = 1; depth <= backward_m && !frontier.empty(); ++depth) {
      std::vector<cplx> next;
      for (const cplx& node : frontier) {
        if (out.visited >= node_cap) {
          out.truncated = true;
          break;
        }
        ++out.visited;
        for (const cplx& w : preimages(p, node)) {
          if (!tree_seen.insert(w)) continue;
          emit(w, depth, static_cast<int>(k));
          next.push_back(w);
        }
      }
      if (out.truncated && out.visited >= node_cap) break;
      frontier = std::move(next);
    }
    if (out.truncated && out.visited >= node_cap) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discreteness diagnostic.

struct DiagnosticOptions {
  int marker_depth = 6;          // forward/backward depth for critical orbits
  double marker_margin = 1e-6;   // precondition distance from the base point
  double marker_exclusion = -1.0;  // floor statistic drops points this close
                                   // to markers; < 0 means 2% of the radius
  std::size_t node_cap = 1000000;
};

struct DiscretenessReport {
  std::vector<int> depths;           // probed grand-orbit depths
  std::vector<double> min_pairwise;  // per depth, inside the probe sub-region
  std::vector<double> nn_median;     // per depth, median nearest-neighbour
  double level_alignment = 0.0;      // share of escaping samples on the
                                     // geometric Green grid  G(base) d^j
  std::size_t sample_size_full = 0;  // filtered sample size at full depth
  std::string verdict;  // discrete-evidence | indiscrete-evidence | inconclusive
};

namespace detail {

inline std::vector<cplx> critical_markers(const Polynomial& p,
                                          ClipRegion region, int depth,
                                          std::size_t node_cap) {
  ClipRegion inflated{region.center, 1.5 * region.radius};
  std::vector<cplx> markers;
  for (const cplx& c : critical_points(p)) {
    GrandOrbitSample s =
        grand_orbit_sample(p, c, depth, depth, inflated, node_cap);
    for (const GrandOrbitPoint& q : s.points) markers.push_back(q.value);
  }
  return markers;
}

inline double distance_to_set(cplx z, const std::vector<cplx>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const cplx& m : set) best = std::min(best, std::abs(z - m));
  return best;
}

}  // namespace detail

// Evidence-grade probe of whether the grand orbit of the base point is
// discrete inside the region.  The truncated critical grand orbit stands in
// for the non-wandering markers (it is a finite-depth approximation of a
// closure, so the verdict is evidence, never proof).  Statistics are taken
// over sample points inside a fixed compact sub-region (80% of the clipping
// disk) and away from the markers; thresholds:
//   discrete-evidence:   floor at full depth >= 0.5 x floor at half depth
//   indiscrete-evidence: median nearest-neighbour shrinks >= 4x from half
//                        depth to full depth
// both scale-free in the sample geometry.
inline DiscretenessReport discreteness_diagnostic(
    const Polynomial& p, cplx base, ClipRegion region, int depth,
    DiagnosticOptions opt = {}) {
  require(depth >= 2, "discreteness_diagnostic: depth must be >= 2");
  require(region.radius > 0.0 && std::isfinite(region.radius),
          "discreteness_diagnostic: region must be bounded");

  std::vector<cplx> markers = detail::critical_markers(
      p, region, std::min(opt.marker_depth, depth), opt.node_cap);
  double base_gap = detail::distance_to_set(base, markers);
  if (base_gap < opt.marker_margin) {
    cplx nearest{};
    for (const cplx& m : markers)
      if (std::abs(base - m) == base_gap) nearest = m;
    throw precondition_error(
        "discreteness_diagnostic: base point is within " +
        std::to_string(base_gap) + " of a critical grand-orbit marker at (" +
        std::to_string(nearest.real()) + ", " + std::to_string(nearest.imag()) +
        ")");
  }

  double exclusion = opt.marker_exclusion >= 0.0 ? opt.marker_exclusion
                                                 : 0.02 * region.radius;
  ClipRegion sub{region.center, 0.8 * region.radius};

  DiscretenessReport rep;
  std::vector<int> probes{std::max(1, depth / 4), std::max(1, depth / 2),
                          depth};
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  double base_green = green_value(p, base);
  for (int dep : probes) {
    GrandOrbitSample s =
        grand_orbit_sample(p, base, dep, dep, region, opt.node_cap);
    std::vector<cplx> pts;
    for (const GrandOrbitPoint& q : s.points)
      if (sub.contains(q.value) &&
          detail::distance_to_set(q.value, markers) >= exclusion)
        pts.push_back(q.value);

    double min_pw = std::numeric_limits<double>::infinity();
    std::vector<double> nn(pts.size(),
                           std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        double dij = std::abs(pts[i] - pts[j]);
        min_pw = std::min(min_pw, dij);
        nn[i] = std::min(nn[i], dij);
        nn[j] = std::min(nn[j], dij);
      }
    double nn_med = std::numeric_limits<double>::infinity();
    if (!nn.empty()) {
      std::sort(nn.begin(), nn.end());
      nn_med = nn[nn.size() / 2];
    }
    rep.depths.push_back(dep);
    rep.min_pairwise.push_back(min_pw);
    rep.nn_median.push_back(nn_med);
    if (dep == depth) {
      rep.sample_size_full = pts.size();
      if (base_green > 1e-12) {
        std::size_t escaping = 0, aligned = 0;
        double logd = std::log(static_cast<double>(p.degree()));
        for (const cplx& q : pts) {
          double g = green_value(p, q);
          if (g <= 1e-12) continue;
          ++escaping;
          double x = std::log(g / base_green) / logd;
          if (std::abs(x - std::round(x)) < 0.02) ++aligned;
        }
        rep.level_alignment =
            escaping ? static_cast<double>(aligned) / escaping : 0.0;
      }
    }
  }

  std::size_t half = rep.depths.size() - 2, full = rep.depths.size() - 1;
  bool enough = rep.sample_size_full >= 8 &&
                std::isfinite(rep.min_pairwise[half]) &&
                std::isfinite(rep.min_pairwise[full]);
  if (!enough) {
    rep.verdict = "inconclusive";
    return rep;
  }
  bool cond_discrete =
      rep.min_pairwise[full] >= 0.5 * rep.min_pairwise[half];
  bool cond_indiscrete = rep.nn_median[half] >= 4.0 * rep.nn_median[full];
  if (cond_discrete && !cond_indiscrete)
    rep.verdict = "discrete-evidence";
  else if (cond_indiscrete && !cond_discrete)
    rep.verdict = "indiscrete-evidence";
  else
    rep.verdict = "inconclusive";
  return rep;
}

// ---------------------------------------------------------------------------
// Branch transport along parameter paths.

namespace detail {

inline cplx iterate(const Polynomial& p, cplx z, int k) {
  for (int i = 0; i < k; ++i) z = eval(p, z);
  return z;
}

// Newton for P^n(u) = target with the chain-rule derivative; returns the
// solution or throws.
inline cplx iterate_newton(const Polynomial& p, int n, cplx target, cplx seed,
                           const char* who) {
  cplx u = seed;
  double tol = 1e-12 * std::max(1.0, std::abs(target));
  for (int it = 0; it < 40; ++it) {
    cplx v = u, dv = 1.0;
    for (int k = 0; k < n; ++k) {
      dv *= derivative_value(p, v);
      v = eval(p, v);
    }
    cplx f = v - target;
    if (std::abs(f) <= tol) return u;
    if (!(std::abs(dv) > 0.0))
      throw numeric_error(std::string(who) + ": vanishing derivative");
    cplx step = f / dv;
    double cap = 0.5 * std::max(1.0, std::abs(u));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    u -= step;
  }
  throw numeric_error(std::string(who) + ": Newton did not converge");
}

}  // namespace detail

// Continue the branch of P^{-n} o P^m that sends lambda0 to z along the
// path: the grand-orbit relation P^n(w) = P^m(lambda) is preserved while
// lambda moves, by predictor-corrector (predictor: previous value;
// corrector: Newton on w -> P^n(w) - P^m(lambda)) with step halving.  The
// path must stay clear of the finite-depth critical grand-orbit markers --
// those are where branches of P^{-n} collide.
inline cplx holomorphic_motion_transport(const Polynomial& p, cplx lambda0,
                                         const std::vector<cplx>& path, cplx z,
                                         int n, int m,
                                         DiagnosticOptions opt = {}) {
  require(n >= 0 && m >= 0, "holomorphic_motion_transport: negative indices");
  require(!path.empty(), "holomorphic_motion_transport: empty path");
  require(std::abs(path.front() - lambda0) < 1e-12,
          "holomorphic_motion_transport: path must start at lambda0");
  const cplx rel_target = detail::iterate(p, lambda0, m);
  if (std::abs(detail::iterate(p, z, n) - rel_target) >=
      1e-8 * std::max(1.0, std::abs(rel_target)))
    throw precondition_error(
        "holomorphic_motion_transport: base point does not satisfy "
        "P^n(z) = P^m(lambda0) within 1e-8");

  double reach = std::abs(z);
  for (const cplx& q : path) reach = std::max(reach, std::abs(q - lambda0));
  ClipRegion hull{lambda0, 2.0 * reach + 1.0};
  std::vector<cplx> markers =
      detail::critical_markers(p, hull, opt.marker_depth, opt.node_cap);
  for (const cplx& q : path)
    if (detail::distance_to_set(q, markers) < 1e-4)
      throw precondition_error(
          "holomorphic_motion_transport: path vertex (" +
          std::to_string(q.real()) + ", " + std::to_string(q.imag()) +
          ") is within 1e-4 of a critical grand-orbit marker");

  cplx w = z;
  for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
    cplx a = path[seg], b = path[seg + 1];
    double t = 0.0, dt = 0.25;
    while (t < 1.0) {
      double tn = std::min(1.0, t + dt);
      cplx lam = a + (b - a) * tn;
      if (detail::distance_to_set(lam, markers) < 1e-4)
        throw precondition_error(
            "holomorphic_motion_transport: path passes within 1e-4 of a "
            "critical grand-orbit marker at parameter " + std::to_string(tn));
      cplx target = detail::iterate(p, lam, m);
      bool ok = true;
      cplx wn{};
      try {
        wn = detail::iterate_newton(p, n, target, w,
                                    "holomorphic_motion_transport");
      } catch (const numeric_error&) {
        ok = false;
      }
      if (ok && std::abs(wn - w) > 0.3 * (1.0 + std::abs(w))) ok = false;
      if (!ok) {
        dt *= 0.5;
        if (dt < 1e-12)
          throw numeric_error(
              "holomorphic_motion_transport: branch tracking failed near "
              "lambda = (" + std::to_string(lam.real()) + ", " +
              std::to_string(lam.imag()) + ")");
        continue;
      }
      w = wn;
      t = tn;
      dt = std::min(0.25, dt * 1.7);
    }
  }

  const cplx end_target = detail::iterate(p, path.back(), m);
  if (std::abs(detail::iterate(p, w, n) - end_target) >=
      1e-8 * std::max(1.0, std::abs(end_target)))
    throw numeric_error(
        "holomorphic_motion_transport: final residual exceeds tolerance");
  return w;
}

// ---------------------------------------------------------------------------
// Raster of the potential.

struct FieldRaster {
  int nx = 0, ny = 0;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  int max_iter = 0;
  std::vector<double> green;    // row-major, y increasing by row
  std::vector<int> iterations;  // escape-detection step; -1 if bounded
};

inline FieldRaster julia_field(const Polynomial& p, double x_min, double x_max,
                               double y_min, double y_max, int nx, int ny,
                               int max_iter = 256) {
  require(nx >= 2 && ny >= 2, "julia_field: need at least a 2x2 grid");
  require(x_max > x_min && y_max > y_min, "julia_field: empty extent");
  require(max_iter >= 1, "julia_field: max_iter must be >= 1");
  FieldRaster f;
  f.nx = nx;
  f.ny = ny;
  f.x_min = x_min;
  f.x_max = x_max;
  f.y_min = y_min;
  f.y_max = y_max;
  f.max_iter = max_iter;
  f.green.resize(static_cast<std::size_t>(nx) * ny);
  f.iterations.assign(static_cast<std::size_t>(nx) * ny, -1);

  const double esc = detail::escape_radius_of(p);
  for (int j = 0; j < ny; ++j) {
    double y = y_min + (y_max - y_min) * (j + 0.5) / ny;
    for (int i = 0; i < nx; ++i) {
      double x = x_min + (x_max - x_min) * (i + 0.5) / nx;
      cplx z(x, y);
      std::size_t idx = static_cast<std::size_t>(j) * nx + i;
      cplx w = z;
      for (int k = 0; k < max_iter; ++k) {
        if (std::abs(w) >= esc) {
          f.iterations[idx] = k;
          break;
        }
        w = eval(p, w);
      }
      f.green[idx] =
          (f.iterations[idx] >= 0) ? green_value(p, z, max_iter) : 0.0;
    }
  }
  return f;
}

}  // namespace wanderlab
