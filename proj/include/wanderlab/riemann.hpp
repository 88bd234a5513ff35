#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "disk_geometry.hpp"
#include "qc_numerics.hpp"
#include "util.hpp"

// Conformal uniformization of Jordan domains and of doubly connected regions.
//
// riemann_map builds a numerical conformal map psi : (D, 0) -> (unit disk, 0)
// with psi'(0) > 0 from a closed boundary polyline, by the geodesic zipper
// construction: boundary samples are absorbed one at a time by elementary
// slit maps of the upper half plane, each with an exact elementary inverse,
// so both psi and psi^{-1} evaluate by composing closed-form steps (no grids,
// no linear solves).  Accuracy is measured rather than assumed: the reported
// figure is the worst deviation of boundary points and edge midpoints from
// the unit circle, plus |psi(0)|, and the builder subdivides the polyline
// until the requested target is met or a sample cap is reached (in which case
// the result is flagged as degraded, never silently accepted).
//
// annulus_band_chart fits the harmonic measure of a doubly connected region
// bounded by two sampled curves as  u = beta log|z| + Re(Laurent series)  by
// least squares.  beta alone determines the conformal modulus, and the
// analytic completion  z exp(h(z)/beta)  is a conformal chart onto a round
// annulus [1, e^(1/beta)] — the "band chart" used to compare annuli and to
// interpolate maps between them.

namespace wanderlab {

// One absorbed boundary sample.  Forward action on the upper half plane:
//   w -> w / (1 - w/c)        (Moebius pulling the sample onto i R+)
//   w -> w sqrt(1 + (s/w)^2)  (closing the slit [0, i s])
// c may be +-infinity (sample already on the vertical geodesic), in which
// case the Moebius factor degenerates to the identity, which IEEE division
// produces on its own.
struct ZipStep {
  double c = 0.0;
  double s = 0.0;
};

namespace detail {

// Initial chart: complement of the segment [z0, z1] onto the upper half
// plane, z1 -> 0, z0 -> infinity.
inline cplx zip_initial(cplx z, cplx z0, cplx z1) {
  return cplx(0.0, 1.0) * std::sqrt((z - z1) / (z - z0));
}

// w sqrt(1 + (s/w)^2) with the principal square root.  This is the branch
// that maps H minus the slit [0, i s] onto H (slit tip -> 0); the naive
// principal sqrt(w^2 + s^2) picks the wrong sheet left of the slit.  Tiny w
// (images of already-absorbed boundary samples) would overflow (s/w)^2, so
// that neighbourhood uses the expansion around the slit base +-s.
inline cplx zip_slit(cplx w, double s) {
  double aw = std::abs(w);
  if (aw <= s * 1e-120) {
    if (aw == 0.0) return cplx(s, 0.0);
    double sign = (std::real(w) >= 0.0) ? 1.0 : -1.0;
    return sign * (cplx(s, 0.0) + w * w / (2.0 * s));
  }
  cplx t = s / w;
  return w * std::sqrt(1.0 + t * t);
}

inline cplx zip_apply(cplx w, const ZipStep& st) {
  return zip_slit(w / (1.0 - w / st.c), st.s);
}

// Exact inverse: reopen the slit (w sqrt(1 - (s/w)^2), principal branch,
// which lands back in H minus the slit), then undo the Moebius factor.
inline cplx zip_unapply(cplx w, const ZipStep& st) {
  double aw = std::abs(w);
  if (aw <= st.s * 1e-120) {
    w = (aw == 0.0) ? cplx(0.0, st.s)
                    : cplx(0.0, st.s) * (1.0 - w * w / (2.0 * st.s * st.s));
  } else {
    cplx t = st.s / w;
    w = w * std::sqrt(1.0 - t * t);
  }
  return w / (1.0 + w / st.c);
}

// O(N^2) pairwise segment test with a bounding-box cull; adjacent edges
// share a vertex and are skipped.
inline bool polyline_simple(const std::vector<cplx>& pts) {
  std::size_t n = pts.size();
  std::vector<double> xlo(n), xhi(n), ylo(n), yhi(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx a = pts[i], b = pts[(i + 1) % n];
    xlo[i] = std::min(a.real(), b.real());
    xhi[i] = std::max(a.real(), b.real());
    ylo[i] = std::min(a.imag(), b.imag());
    yhi[i] = std::max(a.imag(), b.imag());
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // wrap-around neighbours
      if (xhi[i] < xlo[j] || xhi[j] < xlo[i] || yhi[i] < ylo[j] ||
          yhi[j] < ylo[i])
        continue;
      if (segments_properly_intersect(pts[i], pts[(i + 1) % n], pts[j],
                                      pts[(j + 1) % n]))
        return false;
    }
  }
  return true;
}

}  // namespace detail

struct RiemannMapNumeric {
  std::vector<cplx> boundary;  // counterclockwise polyline actually used
  cplx z0{}, z1{};             // anchor edge of the construction
  std::vector<ZipStep> steps;  // one per absorbed sample boundary[2..N-1]
  int quadrant = 1;            // quarter plane holding the interior: 1 or 2
  cplx auto_a{};               // Moebius parameter centering psi(0) = 0
  cplx auto_phase{1.0, 0.0};   // unit rotation making psi'(0) > 0
  double accuracy = 0.0;       // measured boundary deviation plus |psi(0)|
  double accuracy_target = 0.0;
  bool accuracy_met = true;

  // Image in the upper half plane, before closing and normalization.
  cplx half_plane_image(cplx z) const {
    cplx w = detail::zip_initial(z, z0, z1);
    for (const ZipStep& st : steps) w = detail::zip_apply(w, st);
    return w;
  }

  // Closing: the zipped boundary occupies the real axis, the interior one
  // quarter plane; w^2 opens the quarter to a half plane and a Cayley map
  // sends it to the unit disk.
  cplx closed_image(cplx z) const {
    cplx v = half_plane_image(z);
    v *= v;
    cplx i1(0.0, 1.0);
    return (quadrant == 1) ? (v - i1) / (v + i1) : (v + i1) / (v - i1);
  }

  cplx forward(cplx z) const {
    cplx u = closed_image(z);
    return auto_phase * (u - auto_a) / (1.0 - std::conj(auto_a) * u);
  }

  cplx inverse(cplx w) const {
    cplx u = w / auto_phase;
    u = (u + auto_a) / (1.0 + std::conj(auto_a) * u);
    cplx i1(0.0, 1.0);
    cplx v = (quadrant == 1) ? i1 * (1.0 + u) / (1.0 - u)
                             : -i1 * (1.0 + u) / (1.0 - u);
    cplx t = std::sqrt(v);  // principal root lands in quadrant 1
    if (quadrant == 2) t = -t;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it)
      t = detail::zip_unapply(t, *it);
    cplx r = t * t;  // equals -(z - z1)/(z - z0)
    return (z1 + r * z0) / (1.0 + r);
  }
};

namespace detail {

// Zip the whole polyline and resolve closing data.  Throws numeric_error if
// a sample's running image leaves the open half plane (degenerate geometry)
// or if the interior's quarter plane cannot be decided with a clear margin.
inline void assemble_zipper(RiemannMapNumeric& map,
                            const std::vector<cplx>& pts) {
  std::size_t n = pts.size();
  map.boundary = pts;
  map.z0 = pts[0];
  map.z1 = pts[1];
  map.steps.clear();
  map.steps.reserve(n - 2);

  std::vector<cplx> img(n - 2);
  for (std::size_t k = 2; k < n; ++k)
    img[k - 2] = zip_initial(pts[k], map.z0, map.z1);
  cplx w0 = zip_initial(cplx(0.0, 0.0), map.z0, map.z1);

  for (std::size_t k = 0; k < n - 2; ++k) {
    cplx zeta = img[k];
    if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag()) ||
        !(zeta.imag() > 0.0))
      throw numeric_error(
          "riemann_map: boundary sample " + std::to_string(k + 2) +
          " leaves the half plane while zipping (degenerate or self-touching "
          "boundary)");
    double n2 = std::norm(zeta);
    ZipStep st{n2 / zeta.real(), n2 / zeta.imag()};
    map.steps.push_back(st);
    for (std::size_t j = k + 1; j < n - 2; ++j) img[j] = zip_apply(img[j], st);
    w0 = zip_apply(w0, st);
  }

  if (!std::isfinite(w0.real()) || !std::isfinite(w0.imag()))
    throw numeric_error("riemann_map: interior base point lost during zipping");
  if (std::abs(w0.real()) < 1e-9 * std::abs(w0))
    throw numeric_error(
        "riemann_map: cannot decide which quarter plane holds the interior "
        "(base point too close to the closing seam)");
  map.quadrant = (w0.real() > 0.0) ? 1 : 2;

  map.auto_a = cplx(0.0, 0.0);
  map.auto_phase = cplx(1.0, 0.0);
  cplx a = map.closed_image(cplx(0.0, 0.0));
  if (!(std::abs(a) < 1.0))
    throw numeric_error("riemann_map: interior base point closed outside the disk");
  map.auto_a = a;

  double scale = 0.0;
  for (const cplx& p : pts) scale = std::max(scale, std::abs(p));
  double delta = 1e-6 * scale;
  cplx d = (map.forward(cplx(delta, 0.0)) - map.forward(cplx(-delta, 0.0))) /
           (2.0 * delta);
  if (!std::isfinite(d.real()) || !std::isfinite(d.imag()) || std::abs(d) == 0.0)
    throw numeric_error("riemann_map: derivative at the base point is degenerate");
  map.auto_phase = std::conj(d) / std::abs(d);
}

// Accuracy probe: worst distance of boundary samples and edge midpoints
// from the unit circle, plus |psi(0)|.  Probing is strided to at most ~2048
// points per family on very fine polylines; the curves in scope are smooth,
// so the stride does not hide spikes.
inline double measure_accuracy(const RiemannMapNumeric& map) {
  const std::vector<cplx>& b = map.boundary;
  std::size_t n = b.size();
  std::size_t stride = (n + 2047) / 2048;
  double worst = 0.0;
  auto probe = [&](cplx z) {
    double m = std::abs(map.forward(z));
    double dev = std::isfinite(m) ? std::abs(m - 1.0) : 1.0;
    worst = std::max(worst, dev);
  };
  for (std::size_t k = 1; k < n; k += stride) probe(b[k]);
  for (std::size_t k = 0; k < n; k += stride)
    probe(0.5 * (b[k] + b[(k + 1) % n]));
  return worst + std::abs(map.forward(cplx(0.0, 0.0)));
}

}  // namespace detail

// Conformal map of the Jordan domain bounded by the given closed polyline
// (vertex list, last edge implicit) onto the unit disk, sending 0 -> 0 with
// positive derivative.  0 must lie strictly inside; a clockwise polyline is
// reversed.  The polyline is midpoint-subdivided until the measured accuracy
// meets the target or the sample cap is reached; accuracy_met records which.
inline RiemannMapNumeric riemann_map(std::vector<cplx> boundary,
                                     double accuracy_target,
                                     int max_refinements = 4,
                                     std::size_t max_samples = 16384) {
  require(accuracy_target > 0.0, "riemann_map: accuracy target must be > 0");
  require(boundary.size() >= 8, "riemann_map: need at least 8 boundary samples");
  require(max_refinements >= 0 && max_samples >= boundary.size(),
          "riemann_map: invalid refinement limits");
  for (const cplx& p : boundary)
    require(std::isfinite(p.real()) && std::isfinite(p.imag()),
            "riemann_map: boundary samples must be finite");
  for (std::size_t k = 0; k < boundary.size(); ++k)
    require(std::abs(boundary[k] - boundary[(k + 1) % boundary.size()]) > 0.0,
            "riemann_map: consecutive boundary samples must be distinct");

  double wind = detail::polyline_winding_pts(boundary, cplx(0.0, 0.0));
  if (std::abs(wind + 1.0) < 0.1)
    std::reverse(boundary.begin(), boundary.end());
  else
    require(std::abs(wind - 1.0) < 0.1,
            "riemann_map: 0 must lie strictly inside the boundary polyline");
  require(detail::polyline_simple(boundary),
          "riemann_map: boundary polyline is not simple");

  RiemannMapNumeric map;
  map.accuracy_target = accuracy_target;
  for (int attempt = 0;; ++attempt) {
    detail::assemble_zipper(map, boundary);
    map.accuracy = detail::measure_accuracy(map);
    if (map.accuracy <= accuracy_target) break;
    if (attempt >= max_refinements || 2 * boundary.size() > max_samples) break;
    std::vector<cplx> finer;
    finer.reserve(2 * boundary.size());
    for (std::size_t k = 0; k < boundary.size(); ++k) {
      cplx a = boundary[k], b = boundary[(k + 1) % boundary.size()];
      finer.push_back(a);
      finer.push_back(0.5 * (a + b));
    }
    boundary = std::move(finer);
  }
  map.accuracy_met = map.accuracy <= accuracy_target;
  return map;
}

// 1 / psi'(0): the conformal radius of the domain seen from 0.  Richardson
// extrapolation of a central difference keeps the step error negligible
// against the map's own accuracy.
inline double conformal_radius(const RiemannMapNumeric& map) {
  double scale = 0.0;
  for (const cplx& p : map.boundary) scale = std::max(scale, std::abs(p));
  auto fd = [&](double h) {
    return (map.forward(cplx(h, 0.0)) - map.forward(cplx(-h, 0.0))) / (2.0 * h);
  };
  double h = 1e-4 * scale;
  cplx d = (4.0 * fd(0.5 * h) - fd(h)) / 3.0;
  require(std::isfinite(d.real()) && std::isfinite(d.imag()) &&
              std::abs(d) > 0.0,
          "conformal_radius: degenerate derivative at the base point");
  return 1.0 / std::abs(d);
}

// Hyperbolic distance of the domain, computed by pushing both points to the
// unit disk.  Points outside the domain (boundary winding != 1 around them)
// are rejected.  Images that land marginally outside the closed disk -- only
// possible within the map's measured accuracy of the boundary -- are pulled
// radially inside; anything worse is a hard error.
inline double hyperbolic_distance_in_domain(const RiemannMapNumeric& map,
                                            cplx z, cplx w) {
  auto inside = [&](cplx p) {
    return std::abs(detail::polyline_winding_pts(map.boundary, p) - 1.0) < 0.1;
  };
  require(inside(z) && inside(w),
          "hyperbolic_distance_in_domain: both points must lie inside the "
          "domain");
  auto push = [&](cplx p) {
    cplx u = map.forward(p);
    double m = std::abs(u);
    if (m >= 1.0) {
      if (m > 1.0 + map.accuracy + 1e-9)
        throw numeric_error(
            "hyperbolic_distance_in_domain: image left the disk by more than "
            "the map's accuracy");
      u *= (1.0 - 1e-12) / m;
    }
    return DiskPoint(u);
  };
  return hyp_dist(push(z), push(w));
}

// ---------------------------------------------------------------------------
// Band charts of doubly connected regions.

// Harmonic-measure fit  u = beta log|z| + Re(a_0 + sum_{k != 0} a_k (z/scale)^k)
// with u = 0 on the inner curve and u = 1 on the outer one.  The modulus is
// 1/(2 pi beta), and  z exp(h(z)/beta)  maps the region conformally onto the
// round annulus [1, e^(1/beta)].
struct AnnulusBandChart {
  double beta = 0.0;
  double modulus = 0.0;           // 1 / (2 pi beta)
  double boundary_residual = 0.0; // sup |fit - boundary condition| at samples
  double scale = 1.0;             // radial normalization of the Laurent basis
  int order = 0;                  // truncation K; coef holds k in [-K, K]
  std::vector<cplx> coef;         // a_k at index k + order; Im a_0 = 0
  double inner_rep = 0.0;         // representative radius of the inner curve
  double outer_rep = 0.0;         // representative radius of the outer curve
  double band_outer = 1.0;        // e^(1/beta), outer radius of the band

  cplx laurent(cplx z) const {
    cplx zeta = z / scale;
    cplx zp = 1.0, zm = 1.0, acc = coef[static_cast<std::size_t>(order)];
    for (int k = 1; k <= order; ++k) {
      zp *= zeta;
      zm /= zeta;
      acc += coef[static_cast<std::size_t>(order + k)] * zp +
             coef[static_cast<std::size_t>(order - k)] * zm;
    }
    return acc;
  }

  cplx laurent_deriv(cplx z) const {
    cplx zeta = z / scale;
    cplx zpk = 1.0;        // zeta^(k-1)
    cplx zmk = 1.0 / (zeta * zeta);  // zeta^(-k-1)
    cplx acc = 0.0;
    for (int k = 1; k <= order; ++k) {
      acc += coef[static_cast<std::size_t>(order + k)] *
             (static_cast<double>(k) * zpk / scale);
      acc -= coef[static_cast<std::size_t>(order - k)] *
             (static_cast<double>(k) * zmk / scale);
      zpk *= zeta;
      zmk /= zeta;
    }
    return acc;
  }

  cplx to_band(cplx z) const { return z * std::exp(laurent(z) / beta); }

  cplx to_band_deriv(cplx z) const {
    return to_band(z) * (1.0 / z + laurent_deriv(z) / beta);
  }

  cplx from_band(cplx w) const {
    double s = std::clamp(beta * std::log(std::abs(w)), -0.2, 1.2);
    cplx z = std::polar(
        std::exp((1.0 - s) * std::log(inner_rep) + s * std::log(outer_rep)),
        std::arg(w));
    double tol = 1e-13 * std::max(1.0, std::abs(w));
    for (int it = 0; it < 60; ++it) {
      cplx f = to_band(z) - w;
      if (std::abs(f) <= tol) return z;
      cplx dz = f / to_band_deriv(z);
      double cap = 0.2 * std::abs(z);
      if (std::abs(dz) > cap) dz *= cap / std::abs(dz);
      z -= dz;
    }
    throw numeric_error("AnnulusBandChart: inverse iteration did not converge");
  }
};

// Least-squares fit over the sampled curves.  The curves must wind once
// around 0 and be radially separated (max |inner| < min |outer|), which
// every annulus in scope here satisfies.
inline AnnulusBandChart annulus_band_chart(const std::vector<cplx>& inner,
                                           const std::vector<cplx>& outer,
                                           int order = 48) {
  require(inner.size() >= 16 && outer.size() >= 16,
          "annulus_band_chart: need at least 16 samples per curve");
  require(order >= 4, "annulus_band_chart: order must be >= 4");
  for (const std::vector<cplx>* curve : {&inner, &outer})
    for (const cplx& p : *curve)
      require(std::isfinite(p.real()) && std::isfinite(p.imag()) &&
                  std::abs(p) > 0.0,
              "annulus_band_chart: samples must be finite and nonzero");
  double max_in = 0.0, min_out = 1e300;
  for (const cplx& p : inner) max_in = std::max(max_in, std::abs(p));
  for (const cplx& p : outer) min_out = std::min(min_out, std::abs(p));
  require(max_in < min_out,
          "annulus_band_chart: inner curve must be strictly inside the outer "
          "curve (radially separated)");
  for (const std::vector<cplx>* curve : {&inner, &outer})
    require(std::abs(std::abs(detail::polyline_winding_pts(*curve,
                                                           cplx(0.0, 0.0))) -
                     1.0) < 0.1,
            "annulus_band_chart: each curve must wind once around 0");

  std::size_t rows = inner.size() + outer.size();
  int cols = 2 + 4 * order;
  require(rows >= static_cast<std::size_t>(cols) + 8,
          "annulus_band_chart: not enough samples for the requested order");

  auto log_mean = [](const std::vector<cplx>& pts) {
    double acc = 0.0;
    for (const cplx& p : pts) acc += std::log(std::abs(p));
    return std::exp(acc / static_cast<double>(pts.size()));
  };
  AnnulusBandChart chart;
  chart.inner_rep = log_mean(inner);
  chart.outer_rep = log_mean(outer);
  chart.scale = std::sqrt(chart.inner_rep * chart.outer_rep);
  chart.order = order;

  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows), cols);
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows));
  Eigen::Index row = 0;
  auto fill = [&](const std::vector<cplx>& pts, double bc) {
    for (const cplx& p : pts) {
      cplx zeta = p / chart.scale;
      A(row, 0) = std::log(std::abs(p));
      A(row, 1) = 1.0;
      cplx zp = 1.0, zm = 1.0;
      for (int k = 1; k <= order; ++k) {
        zp *= zeta;
        zm /= zeta;
        A(row, 2 + 4 * (k - 1) + 0) = zp.real();
        A(row, 2 + 4 * (k - 1) + 1) = -zp.imag();
        A(row, 2 + 4 * (k - 1) + 2) = zm.real();
        A(row, 2 + 4 * (k - 1) + 3) = -zm.imag();
      }
      b(row) = bc;
      ++row;
    }
  };
  fill(inner, 0.0);
  fill(outer, 1.0);

  Eigen::VectorXd colnorm(cols);
  for (int c = 0; c < cols; ++c) {
    double nrm = A.col(c).norm();
    colnorm(c) = (nrm > 0.0) ? nrm : 1.0;
    A.col(c) /= colnorm(c);
  }
  Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  chart.boundary_residual = (A * x - b).cwiseAbs().maxCoeff();
  for (int c = 0; c < cols; ++c) x(c) /= colnorm(c);

  chart.beta = x(0);
  require(std::isfinite(chart.beta),
          "annulus_band_chart: fit produced a non-finite modulus coefficient");
  if (!(chart.beta > 0.0))
    throw numeric_error(
        "annulus_band_chart: harmonic measure does not grow outward "
        "(degenerate region)");
  chart.modulus = 1.0 / (2.0 * pi * chart.beta);
  chart.band_outer = std::exp(1.0 / chart.beta);
  chart.coef.assign(static_cast<std::size_t>(2 * order + 1), cplx(0.0, 0.0));
  chart.coef[static_cast<std::size_t>(order)] = cplx(x(1), 0.0);
  for (int k = 1; k <= order; ++k) {
    chart.coef[static_cast<std::size_t>(order + k)] =
        cplx(x(2 + 4 * (k - 1) + 0), x(2 + 4 * (k - 1) + 1));
    chart.coef[static_cast<std::size_t>(order - k)] =
        cplx(x(2 + 4 * (k - 1) + 2), x(2 + 4 * (k - 1) + 3));
  }
  return chart;
}

// Adapter for the annulus interpolation hooks in the grid machinery.
inline BandChartFns band_chart_fns(const AnnulusBandChart& chart) {
  return BandChartFns{[chart](cplx z) { return chart.to_band(z); },
                      [chart](cplx w) { return chart.from_band(w); }};
}

}  // namespace wanderlab
