#pragma once

#include <optional>
#include <sstream>
#include <vector>

#include "wanderlab/disk_geometry.hpp"
#include "wanderlab/poly.hpp"
#include "wanderlab/util.hpp"

namespace wanderlab {

// Finite Blaschke product phase * prod_k (z - a_k)/(1 - conj(a_k) z).
// The normalized family keeps zeros[0] == 0 exactly (the product fixes 0);
// `normalized` records whether that holds.
struct BlaschkeProduct {
  cplx phase;
  std::vector<cplx> zeros;
  bool normalized;

  int degree() const { return static_cast<int>(zeros.size()); }
};

inline BlaschkeProduct make_blaschke(cplx phase, std::vector<cplx> zeros) {
  require(!zeros.empty(), "BlaschkeProduct: needs at least one zero");
  require(std::abs(std::abs(phase) - 1.0) <= 1e-14,
          "BlaschkeProduct: |phase| must be 1 within 1e-14");
  for (const cplx& a : zeros)
    require(std::abs(a) < 1.0, "BlaschkeProduct: zeros must lie in the disk");
  bool normalized = (zeros[0] == cplx(0.0, 0.0));
  return BlaschkeProduct{phase, std::move(zeros), normalized};
}

inline BlaschkeProduct blaschke_power(int d) {
  require(d >= 1, "blaschke_power: degree must be >= 1");
  return make_blaschke(cplx(1.0, 0.0),
                       std::vector<cplx>(static_cast<std::size_t>(d), cplx(0.0, 0.0)));
}

namespace detail {

// Factor evaluation without the |z| <= 1 gate; preimage polishing touches
// points a hair outside the circle.
inline cplx blaschke_eval_raw(const BlaschkeProduct& b, cplx z) {
  std::vector<cplx> factors;
  factors.reserve(b.zeros.size());
  for (const cplx& a : b.zeros)
    factors.push_back((z - a) / (1.0 - std::conj(a) * z));
  return b.phase * pairwise_product(std::move(factors));
}

// Product rule with prefix/suffix partial products; O(d) per call.
inline cplx blaschke_derivative_raw(const BlaschkeProduct& b, cplx z) {
  const std::size_t d = b.zeros.size();
  std::vector<cplx> f(d), df(d);
  for (std::size_t k = 0; k < d; ++k) {
    cplx a = b.zeros[k];
    cplx den = 1.0 - std::conj(a) * z;
    f[k] = (z - a) / den;
    df[k] = (1.0 - std::norm(a)) / (den * den);
  }
  std::vector<cplx> prefix(d + 1), suffix(d + 1);
  prefix[0] = cplx(1.0, 0.0);
  suffix[d] = cplx(1.0, 0.0);
  for (std::size_t k = 0; k < d; ++k) prefix[k + 1] = prefix[k] * f[k];
  for (std::size_t k = d; k-- > 0;) suffix[k] = suffix[k + 1] * f[k];
  cplx sum(0.0, 0.0);
  for (std::size_t k = 0; k < d; ++k) sum += prefix[k] * df[k] * suffix[k + 1];
  return b.phase * sum;
}

// Numerator and denominator of b as polynomials: b = phase * N / D.
inline coeffs blaschke_numerator(const BlaschkeProduct& b) {
  coeffs n{cplx(1.0, 0.0)};
  for (const cplx& a : b.zeros) n = poly_mul(n, coeffs{-a, cplx(1.0, 0.0)});
  return n;
}

inline coeffs blaschke_denominator(const BlaschkeProduct& b) {
  coeffs d{cplx(1.0, 0.0)};
  for (const cplx& a : b.zeros)
    d = poly_mul(d, coeffs{cplx(1.0, 0.0), -std::conj(a)});
  return d;
}

}  // namespace detail

// Product formula with a balanced multiplication tree; |z| <= 1 required.
inline cplx eval(const BlaschkeProduct& b, cplx z) {
  require(std::abs(z) <= 1.0 + 1e-12, "eval: |z| must be <= 1");
  return detail::blaschke_eval_raw(b, z);
}

inline cplx derivative_value(const BlaschkeProduct& b, cplx z) {
  require(std::abs(z) <= 1.0 + 1e-12, "derivative_value: |z| must be <= 1");
  return detail::blaschke_derivative_raw(b, z);
}

// b'(0) = phase * (-1)^(d-1) * prod of the nonzero-slot zeros; requires the
// normalized form (zeros[0] == 0).
inline cplx multiplier(const BlaschkeProduct& b) {
  require(b.normalized, "multiplier: product must be normalized (zeros[0]=0)");
  std::vector<cplx> rest(b.zeros.begin() + 1, b.zeros.end());
  cplx prod = pairwise_product(std::move(rest));
  double sign = (b.zeros.size() % 2 == 1) ? 1.0 : -1.0;
  return b.phase * sign * prod;
}

// The d-1 critical points inside the disk, with multiplicity, sorted by
// (re, im). Roots come from the numerator of b' (a polynomial of degree at
// most 2d-2 whose disk roots are exactly the critical points; the others are
// their circle reflections).
inline std::vector<DiskPoint> critical_points(const BlaschkeProduct& b) {
  require(b.degree() >= 2, "critical_points: degree must be >= 2");
  coeffs n = detail::blaschke_numerator(b);
  coeffs d = detail::blaschke_denominator(b);
  coeffs q = poly_sub(poly_mul(poly_derivative(n), d),
                      poly_mul(n, poly_derivative(d)));
  std::vector<cplx> roots = poly_roots(q);
  std::vector<cplx> inside;
  for (cplx r : roots) {
    if (std::abs(r) >= 1.0 - 1e-10) continue;
    // One extra Newton polish against Q itself.
    coeffs dq = poly_derivative(q);
    cplx f = poly_eval(q, r);
    cplx df = poly_eval(dq, r);
    if (std::abs(df) > 1e-300) {
      cplx next = r - f / df;
      if (finite(next) && std::abs(poly_eval(q, next)) <= std::abs(f) &&
          std::abs(next) < 1.0)
        r = next;
    }
    inside.push_back(r);
  }
  if (static_cast<int>(inside.size()) != b.degree() - 1) {
    std::ostringstream msg;
    msg << "critical_points: expected " << b.degree() - 1 << " disk roots, got "
        << inside.size() << "; numerator-of-b' coefficients:";
    for (const cplx& c : q) msg << " (" << c.real() << "," << c.imag() << ")";
    throw numeric_error(msg.str());
  }
  for (cplx r : inside) {
    if (std::abs(detail::blaschke_derivative_raw(b, r)) >= 1e-8)
      throw numeric_error("critical_points: polished root fails |b'| < 1e-8");
  }
  poly_sort_roots(inside);
  std::vector<DiskPoint> out;
  out.reserve(inside.size());
  for (cplx r : inside) out.emplace_back(r);
  return out;
}

// All d preimages of w in the disk, sorted by (re, im). Clears denominators
// into a degree-d polynomial; near-circle roots are kept or dropped by their
// re-evaluation residual, not by modulus alone.
inline std::vector<DiskPoint> preimages(const BlaschkeProduct& b, cplx w) {
  require(std::abs(w) < 1.0, "preimages: |w| must be < 1");
  coeffs n = detail::blaschke_numerator(b);
  for (cplx& c : n) c *= b.phase;
  coeffs d = detail::blaschke_denominator(b);
  for (cplx& c : d) c *= w;
  coeffs p = poly_sub(std::move(n), d);
  std::vector<cplx> roots = poly_roots(p);
  std::vector<cplx> accepted;
  for (cplx r : roots) {
    // Newton polish on b itself.
    for (int step = 0; step < 2; ++step) {
      cplx f = detail::blaschke_eval_raw(b, r) - w;
      cplx df = detail::blaschke_derivative_raw(b, r);
      if (std::abs(df) < 1e-300) break;
      cplx next = r - f / df;
      if (!finite(next)) break;
      if (std::abs(detail::blaschke_eval_raw(b, next) - w) <= std::abs(f))
        r = next;
    }
    double mod = std::abs(r);
    if (mod < 1.0 - 1e-10) {
      accepted.push_back(r);
    } else if (mod < 1.0 + 1e-10 &&
               std::abs(detail::blaschke_eval_raw(b, r) - w) < 1e-9) {
      // Float noise can push a genuine disk preimage marginally over the
      // circle; pull it back inside the type invariant. The shift is below
      // every tolerance in this library.
      if (mod >= 1.0) r *= (1.0 - 1e-15) / mod;
      accepted.push_back(r);
    }
  }
  if (static_cast<int>(accepted.size()) != b.degree())
    throw numeric_error(
        "preimages: root count after disk filtering does not match the "
        "degree; numerical breakdown near the boundary");
  for (cplx r : accepted) {
    if (std::abs(detail::blaschke_eval_raw(b, r) - w) >= 1e-10)
      throw numeric_error("preimages: polished root fails residual 1e-10");
  }
  poly_sort_roots(accepted);
  std::vector<DiskPoint> out;
  out.reserve(accepted.size());
  for (cplx r : accepted) out.emplace_back(r);
  return out;
}

// Closed polyline tracing the preimage of the circle of radius r. The level
// set is a single analytic Jordan curve once all zeros sit inside the disk
// of radius r, and b restricted to it is a degree-d covering of the circle.
struct PreimageDomain {
  double r;
  std::vector<cplx> boundary;
  double contains_disk_radius;
  double level_tolerance;
};

namespace detail {

inline cplx trace_newton(const BlaschkeProduct& b, cplx target, cplx seed,
                         bool& ok) {
  cplx z = seed;
  ok = false;
  for (int it = 0; it < 30; ++it) {
    cplx f = blaschke_eval_raw(b, z) - target;
    if (std::abs(f) < 1e-13) {
      ok = true;
      return z;
    }
    cplx df = blaschke_derivative_raw(b, z);
    if (std::abs(df) < 1e-300) return z;
    cplx step = f / df;
    // A hop comparable to the distance between preimage branches means the
    // continuation lost its branch; the caller then substeps.
    if (std::abs(step) > 0.25) return z;
    z -= step;
    if (std::abs(z) >= 1.0) return z;
  }
  return z;
}

// Advances the traced point from angle t0 (solution z0) to angle t1,
// bisecting the angular step on Newton failure.
inline cplx trace_advance(const BlaschkeProduct& b, double rr, double t0,
                          cplx z0, double t1, int depth) {
  bool ok = false;
  cplx z1 = trace_newton(b, std::polar(rr, t1), z0, ok);
  if (ok) return z1;
  if (depth >= 14) {
    std::ostringstream msg;
    msg << "preimage_domain: continuation failed near angle " << t1;
    throw numeric_error(msg.str());
  }
  double tm = 0.5 * (t0 + t1);
  cplx zm = trace_advance(b, rr, t0, z0, tm, depth + 1);
  return trace_advance(b, rr, tm, zm, t1, depth + 1);
}

inline double polyline_winding(const std::vector<cplx>& pts, cplx around) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cplx a = pts[i] - around;
    cplx b = pts[(i + 1) % pts.size()] - around;
    total += std::arg(b / a);
  }
  return total / (2.0 * pi);
}

}  // namespace detail

inline PreimageDomain preimage_domain(const BlaschkeProduct& b, double r,
                                      int n_samples) {
  require(r > 0.0 && r < 1.0, "preimage_domain: r must be in (0,1)");
  for (const cplx& a : b.zeros)
    require(std::abs(a) < r,
            "preimage_domain: all zeros must have modulus < r");
  require(n_samples >= 16, "preimage_domain: need at least 16 samples");

  const int d = b.degree();
  const double theta_total = 2.0 * pi * d;

  // Seed at image angle 0 with the preimage of smallest |arg|; the curve is
  // connected, so any starting preimage traces the same polyline up to
  // rotation of the parameter.
  std::vector<DiskPoint> seeds = preimages(b, cplx(r, 0.0));
  cplx z = seeds[0].value;
  double best = std::abs(std::arg(z));
  for (const DiskPoint& s : seeds) {
    double a = std::abs(std::arg(s.value));
    if (a < best - 1e-15) {
      best = a;
      z = s.value;
    }
  }

  PreimageDomain out;
  out.r = r;
  out.boundary.reserve(static_cast<std::size_t>(n_samples));
  out.level_tolerance = 0.0;
  double t_prev = 0.0;
  for (int j = 0; j < n_samples; ++j) {
    double t = theta_total * j / n_samples;
    if (j > 0) z = detail::trace_advance(b, r, t_prev, z, t, 0);
    t_prev = t;
    out.boundary.push_back(z);
    out.level_tolerance = std::max(
        out.level_tolerance, std::abs(std::abs(detail::blaschke_eval_raw(b, z)) - r));
  }
  // Closure and Jordan checks.
  cplx z_close = detail::trace_advance(b, r, t_prev, z, theta_total, 0);
  if (std::abs(z_close - out.boundary.front()) > 1e-8)
    throw numeric_error("preimage_domain: traced curve failed to close");
  double winding = detail::polyline_winding(out.boundary, cplx(0.0, 0.0));
  if (std::abs(winding - 1.0) > 0.1)
    throw numeric_error("preimage_domain: boundary does not wind once around 0");

  double min_mod = std::numeric_limits<double>::infinity();
  for (const cplx& p : out.boundary) min_mod = std::min(min_mod, std::abs(p));
  if (!(min_mod > r))
    throw numeric_error(
        "preimage_domain: closed disk of radius r is not inside the curve");
  out.contains_disk_radius = min_mod;
  return out;
}

// lo = (1/4pi) log(1/(r(2-r))), hi = ((d-1)/(2 pi d)) log(1/r): the modulus
// of the annulus between the circle of radius r and its preimage curve lies
// in [lo, hi], with hi attained exactly by the power map.
inline std::pair<double, double> annulus_modulus_bounds(const BlaschkeProduct& b,
                                                        double r) {
  require(r > 0.0 && r < 1.0, "annulus_modulus_bounds: r must be in (0,1)");
  require(b.degree() >= 2, "annulus_modulus_bounds: degree must be >= 2");
  for (const cplx& a : b.zeros)
    require(std::abs(a) < r,
            "annulus_modulus_bounds: all zeros must have modulus < r");
  const double d = b.degree();
  double lo = std::log(1.0 / (r * (2.0 - r))) / (4.0 * pi);
  double hi = (d - 1.0) / (2.0 * pi * d) * std::log(1.0 / r);
  return {lo, hi};
}

}  // namespace wanderlab
