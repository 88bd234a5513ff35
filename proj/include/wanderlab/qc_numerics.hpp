#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wanderlab/grid_map.hpp"
#include "wanderlab/util.hpp"

namespace wanderlab {

// Samples of an orientation-preserving circle map: strictly increasing
// angles in [0, 2pi) paired with image points forming a closed curve that
// winds once around its centroid.
struct CircleMapSamples {
  double source_radius;
  std::vector<double> angles;
  std::vector<cplx> images;
  int orientation = 1;
};

namespace detail {

inline double polyline_winding_pts(const std::vector<cplx>& pts, cplx around) {
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cplx a = pts[i] - around;
    cplx b = pts[(i + 1) % pts.size()] - around;
    total += std::arg(b / a);
  }
  return total / (2.0 * pi);
}

// Continuous angle lift of a closed sample loop; lift[k+1] stays within pi
// of lift[k]. Returns lifted angles; total increase over the loop must be
// +2pi for an orientation-preserving Jordan parametrization.
inline std::vector<double> angle_lift(const std::vector<cplx>& images) {
  std::vector<double> lift(images.size());
  lift[0] = std::arg(images[0]);
  for (std::size_t k = 1; k < images.size(); ++k)
    lift[k] = unwrap_near(std::arg(images[k]), lift[k - 1]);
  return lift;
}

}  // namespace detail

inline CircleMapSamples make_circle_map_samples(double source_radius,
                                                std::vector<double> angles,
                                                std::vector<cplx> images) {
  require(source_radius > 0.0, "CircleMapSamples: radius must be positive");
  require(angles.size() == images.size() && angles.size() >= 8,
          "CircleMapSamples: need >= 8 matched samples");
  for (std::size_t k = 0; k < angles.size(); ++k) {
    require(angles[k] >= 0.0 && angles[k] < 2.0 * pi,
            "CircleMapSamples: angles must lie in [0, 2pi)");
    if (k > 0)
      require(angles[k] > angles[k - 1],
              "CircleMapSamples: angles must be strictly increasing");
    require(finite(images[k]), "CircleMapSamples: non-finite image");
  }
  // Pairwise distinct images, checked by sort rather than all pairs.
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (images[a].real() != images[b].real())
      return images[a].real() < images[b].real();
    return images[a].imag() < images[b].imag();
  });
  for (std::size_t k = 1; k < order.size(); ++k)
    require(images[order[k]] != images[order[k - 1]],
            "CircleMapSamples: images must be pairwise distinct");
  cplx centroid(0.0, 0.0);
  for (const cplx& w : images) centroid += w;
  centroid /= static_cast<double>(images.size());
  double winding = detail::polyline_winding_pts(images, centroid);
  require(std::abs(winding - 1.0) < 0.1,
          "CircleMapSamples: image polyline must wind once (orientation +1)");
  return CircleMapSamples{source_radius, std::move(angles), std::move(images),
                          1};
}

inline CircleMapSamples sample_circle_map(double source_radius, int n,
                                          const std::function<cplx(cplx)>& f) {
  require(n >= 8, "sample_circle_map: need n >= 8");
  std::vector<double> angles(static_cast<std::size_t>(n));
  std::vector<cplx> images(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double t = 2.0 * pi * k / n;
    angles[static_cast<std::size_t>(k)] = t;
    images[static_cast<std::size_t>(k)] = f(std::polar(source_radius, t));
  }
  return make_circle_map_samples(source_radius, std::move(angles),
                                 std::move(images));
}

// Largest image ratio over symmetric sampled triples t_j +- (arc k): a lower
// bound for the weak quasisymmetry constant. Source distances are arcs,
// image distances are moduli.
inline double quasisymmetry_constant(const CircleMapSamples& map) {
  const std::size_t n = map.angles.size();
  require(n >= 16, "quasisymmetry_constant: need >= 16 samples");
  double h_est = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 1; k <= n / 2; ++k) {
      std::size_t i1 = (j + n - k) % n;
      std::size_t i3 = (j + k) % n;
      if (i1 == i3) continue;
      double arc1 = map.angles[j] - map.angles[i1];
      if (arc1 < 0.0) arc1 += 2.0 * pi;
      double arc3 = map.angles[i3] - map.angles[j];
      if (arc3 < 0.0) arc3 += 2.0 * pi;
      double d1 = std::abs(map.images[i1] - map.images[j]);
      double d3 = std::abs(map.images[i3] - map.images[j]);
      // Arc ties within rounding admit both directions.
      if (arc1 <= arc3 + 1e-12 && d3 > 1e-15) h_est = std::max(h_est, d1 / d3);
      if (arc3 <= arc1 + 1e-12 && d1 > 1e-15) h_est = std::max(h_est, d3 / d1);
    }
  }
  return h_est;
}

// Monotone boundary data on a segment of the line, interpolated linearly
// between samples.
struct LineMapSamples {
  std::vector<double> x;
  std::vector<double> fx;
};

inline LineMapSamples make_line_map_samples(std::vector<double> x,
                                            std::vector<double> fx) {
  require(x.size() == fx.size() && x.size() >= 2,
          "LineMapSamples: need >= 2 matched samples");
  for (std::size_t k = 1; k < x.size(); ++k) {
    require(x[k] > x[k - 1], "LineMapSamples: x must be strictly increasing");
    require(fx[k] > fx[k - 1],
            "LineMapSamples: boundary data must be strictly increasing");
  }
  return LineMapSamples{std::move(x), std::move(fx)};
}

struct RectSpec {
  double x0, x1;
  double y_max;
  int nx, ny;
};

namespace detail {

inline double line_interp(const LineMapSamples& f, double x) {
  const std::vector<double>& xs = f.x;
  require(x >= xs.front() - 1e-12 && x <= xs.back() + 1e-12,
          "beurling_ahlfors_extend: boundary data does not cover the mesh");
  if (x <= xs.front()) return f.fx.front();
  if (x >= xs.back()) return f.fx.back();
  std::size_t hi =
      static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) -
                               xs.begin());
  std::size_t lo = hi - 1;
  double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return f.fx[lo] + t * (f.fx[hi] - f.fx[lo]);
}

}  // namespace detail

// The averaged-integral extension of monotone boundary data to the upper
// half-plane: with a(x,y) and b(x,y) the mean of f over [x, x+y] and
// [x-y, x], F = (a+b)/2 + i (a-b). The identity extends to the identity and
// affine data extends to a conformal affine map.
inline GridMap beurling_ahlfors_extend(const LineMapSamples& boundary,
                                       const RectSpec& spec,
                                       int quad_points = 64) {
  require(spec.nx >= 2 && spec.ny >= 2,
          "beurling_ahlfors_extend: mesh needs >= 2 nodes per axis");
  require(spec.y_max > 0.0, "beurling_ahlfors_extend: y_max must be positive");
  require(spec.x1 > spec.x0, "beurling_ahlfors_extend: empty x range");
  require(quad_points >= 8, "beurling_ahlfors_extend: too few quadrature points");
  require(spec.x0 - spec.y_max >= boundary.x.front() - 1e-12 &&
              spec.x1 + spec.y_max <= boundary.x.back() + 1e-12,
          "beurling_ahlfors_extend: boundary data must cover "
          "[x0 - y_max, x1 + y_max]");
  GridMap g = make_grid(GridKind::cartesian, 0.0, spec.y_max, spec.ny, spec.x0,
                        spec.x1, spec.nx, false,
                        "beurling-ahlfors extension of line boundary data");
  for (int i = 0; i < spec.ny; ++i) {
    double y = g.coord0(i);
    for (int j = 0; j < spec.nx; ++j) {
      double x = g.coord1(j);
      double alpha, beta;
      if (y == 0.0) {
        alpha = beta = detail::line_interp(boundary, x);
      } else {
        // Composite trapezoid over t in [0,1] for the two averages.
        double sa = 0.5 * (detail::line_interp(boundary, x) +
                           detail::line_interp(boundary, x + y));
        double sb = 0.5 * (detail::line_interp(boundary, x) +
                           detail::line_interp(boundary, x - y));
        for (int m = 1; m < quad_points; ++m) {
          double t = static_cast<double>(m) / quad_points;
          sa += detail::line_interp(boundary, x + t * y);
          sb += detail::line_interp(boundary, x - t * y);
        }
        alpha = sa / quad_points;
        beta = sb / quad_points;
      }
      std::size_t k = g.idx(i, j);
      g.values[k] = cplx(0.5 * (alpha + beta), alpha - beta);
      g.defined[k] = 1;
    }
  }
  return g;
}

// Circle variant: extends the 2pi-periodic lift of a circle homeomorphism
// over the strip [0, 2pi] x [0, y_max]. Values live in lift coordinates;
// the last column carries the first plus 2pi.
inline GridMap beurling_ahlfors_extend_circle(const CircleMapSamples& boundary,
                                              double y_max, int nx, int ny,
                                              int quad_points = 64) {
  require(y_max > 0.0 && y_max <= 2.0 * pi,
          "beurling_ahlfors_extend_circle: y_max must be in (0, 2pi]");
  for (const cplx& w : boundary.images)
    require(std::abs(std::abs(w) - 1.0) <= 1e-9,
            "beurling_ahlfors_extend_circle: images must lie on the circle");
  std::vector<double> lift = detail::angle_lift(boundary.images);
  require(std::abs((lift.front() + 2.0 * pi) -
                   unwrap_near(std::arg(boundary.images.front()),
                               lift.back())) < 1e-9,
          "beurling_ahlfors_extend_circle: lift must close up to 2pi");
  for (std::size_t k = 1; k < lift.size(); ++k)
    require(lift[k] > lift[k - 1],
            "beurling_ahlfors_extend_circle: lift must be increasing");
  // Periodic extension of the samples to cover [-2pi, 4pi].
  std::vector<double> xs, fs;
  for (int copy = -1; copy <= 1; ++copy) {
    for (std::size_t k = 0; k < boundary.angles.size(); ++k) {
      xs.push_back(boundary.angles[k] + 2.0 * pi * copy);
      fs.push_back(lift[k] + 2.0 * pi * copy);
    }
  }
  xs.push_back(boundary.angles.front() + 4.0 * pi);
  fs.push_back(lift.front() + 4.0 * pi);
  LineMapSamples line = make_line_map_samples(std::move(xs), std::move(fs));
  RectSpec spec{0.0, 2.0 * pi, y_max, nx, ny};
  GridMap g = beurling_ahlfors_extend(line, spec, quad_points);
  g.provenance = "beurling-ahlfors extension of circle boundary lift";
  return g;
}

struct DilatationReport {
  GridMap mu;  // same chart as the input; defined at measured interior nodes
  double K_max = 1.0;
  bool K_unbounded = false;
  std::vector<double> K_quantiles;  // p50, p90, p99, max over measured nodes
  long orientation_violations = 0;
  long excluded_nodes = 0;
  long measured_nodes = 0;
};

// Central-difference Beltrami coefficient on the grid's own chart. The
// modulus of mu is chart-invariant under the holomorphic chart change
// z = exp(w), so K statistics transfer directly to the plane map.
inline DilatationReport estimate_dilatation(const GridMap& g) {
  require(g.n0 >= 3 && g.n1 >= 3, "estimate_dilatation: grid smaller than 3x3");
  validate_grid(g);
  DilatationReport rep;
  rep.mu = make_grid(g.kind, g.a0_min, g.a0_max, g.n0, g.a1_min, g.a1_max,
                     g.n1, g.periodic1, "beltrami field of: " + g.provenance);
  std::vector<double> ks;
  double mu_sup = 0.0;
  for (int i = 1; i + 1 < g.n0; ++i) {
    for (int j = 0; j < g.n1; ++j) {
      bool has_lr = g.periodic1 || (j >= 1 && j + 1 < g.n1);
      if (!has_lr) continue;
      int jl = g.periodic1 ? (j + g.n1 - 1) % g.n1 : j - 1;
      int jr = g.periodic1 ? (j + 1) % g.n1 : j + 1;
      if (!(g.defined[g.idx(i, j)] && g.defined[g.idx(i - 1, j)] &&
            g.defined[g.idx(i + 1, j)] && g.defined[g.idx(i, jl)] &&
            g.defined[g.idx(i, jr)]))
        continue;
      cplx d0 = (g.values[g.idx(i + 1, j)] - g.values[g.idx(i - 1, j)]) /
                (2.0 * g.h0());
      cplx d1 = (g.values[g.idx(i, jr)] - g.values[g.idx(i, jl)]) /
                (2.0 * g.h1());
      // Chart variable: x + iy for rectangles (axis 1 is the real part),
      // u + it for log-polar grids (axis 0 is the real part).
      cplx f_re = (g.kind == GridKind::cartesian) ? d1 : d0;
      cplx f_im = (g.kind == GridKind::cartesian) ? d0 : d1;
      cplx fw = 0.5 * (f_re - cplx(0.0, 1.0) * f_im);
      cplx fwb = 0.5 * (f_re + cplx(0.0, 1.0) * f_im);
      if (std::abs(fw) < 1e-12) {
        ++rep.excluded_nodes;
        continue;
      }
      cplx mu = fwb / fw;
      double m = std::abs(mu);
      if (std::norm(fw) - std::norm(fwb) <= 0.0) ++rep.orientation_violations;
      std::size_t k = rep.mu.idx(i, j);
      rep.mu.values[k] = mu;
      rep.mu.defined[k] = 1;
      ++rep.measured_nodes;
      mu_sup = std::max(mu_sup, m);
      if (m < 1.0 - 1e-13) ks.push_back((1.0 + m) / (1.0 - m));
    }
  }
  require(rep.measured_nodes > 0,
          "estimate_dilatation: no measurable interior nodes");
  if (mu_sup >= 1.0 - 1e-13) {
    rep.K_unbounded = true;
    rep.K_max = 1e12;
  } else {
    rep.K_max = (1.0 + mu_sup) / (1.0 - mu_sup);
  }
  std::sort(ks.begin(), ks.end());
  auto quantile = [&ks](double p) {
    if (ks.empty()) return 1e12;
    std::size_t i = static_cast<std::size_t>(p * (ks.size() - 1));
    return ks[i];
  };
  rep.K_quantiles = {quantile(0.5), quantile(0.9), quantile(0.99),
                     ks.empty() ? 1e12 : ks.back()};
  return rep;
}

// Conformal chart of a (possibly non-round) target ring onto a round
// annulus, used to run the interpolation in band coordinates.
struct BandChartFns {
  std::function<cplx(cplx)> to_band;
  std::function<cplx(cplx)> from_band;
};

struct AnnulusSpec {
  double r_in, r_out;
  int n_radial, n_angular;
};

namespace detail {

inline bool segments_properly_intersect(cplx a1, cplx a2, cplx b1, cplx b2) {
  auto cross_sign = [](cplx o, cplx p, cplx q) {
    double c = (p.real() - o.real()) * (q.imag() - o.imag()) -
               (p.imag() - o.imag()) * (q.real() - o.real());
    if (c > 1e-18) return 1;
    if (c < -1e-18) return -1;
    return 0;
  };
  int d1 = cross_sign(b1, b2, a1), d2 = cross_sign(b1, b2, a2);
  int d3 = cross_sign(a1, a2, b1), d4 = cross_sign(a1, a2, b2);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

inline void require_disjoint_nested(const std::vector<cplx>& inner,
                                    const std::vector<cplx>& outer) {
  double max_in = 0.0, min_out = 1e300;
  for (const cplx& w : inner) max_in = std::max(max_in, std::abs(w));
  for (const cplx& w : outer) min_out = std::min(min_out, std::abs(w));
  if (min_out > max_in) return;  // concentric fast path
  for (std::size_t i = 0; i < inner.size(); ++i) {
    cplx a1 = inner[i], a2 = inner[(i + 1) % inner.size()];
    for (std::size_t j = 0; j < outer.size(); ++j) {
      if (segments_properly_intersect(a1, a2, outer[j],
                                      outer[(j + 1) % outer.size()]))
        throw precondition_error(
            "annulus_interpolate: boundary curves intersect");
    }
  }
  // Nesting: the outer curve must wind once around an inner vertex.
  if (std::abs(polyline_winding_pts(outer, inner[0]) - 1.0) > 0.1)
    throw precondition_error(
        "annulus_interpolate: inner curve is not inside the outer curve");
}

}  // namespace detail

// Radial interpolation between two boundary maps of a round annulus: the
// angular lift and the log-radius of the image are each interpolated
// linearly along the radial coordinate. With a band chart the interpolation
// runs in the chart's round coordinates. Boundary rows store the given
// samples verbatim.
inline GridMap annulus_interpolate(const CircleMapSamples& inner,
                                   const CircleMapSamples& outer,
                                   const AnnulusSpec& spec,
                                   const BandChartFns* chart = nullptr) {
  require(spec.r_in > 0.0 && spec.r_out > spec.r_in,
          "annulus_interpolate: invalid domain annulus");
  require(spec.n_radial >= 2 && spec.n_angular >= 8,
          "annulus_interpolate: grid too small");
  require(std::abs(inner.source_radius - spec.r_in) < 1e-12 &&
              std::abs(outer.source_radius - spec.r_out) < 1e-12,
          "annulus_interpolate: sample radii must match the domain");
  const std::size_t n = static_cast<std::size_t>(spec.n_angular);
  require(inner.angles.size() == n && outer.angles.size() == n,
          "annulus_interpolate: sample counts must match n_angular");
  for (std::size_t j = 0; j < n; ++j) {
    double t = 2.0 * pi * static_cast<double>(j) / static_cast<double>(n);
    require(std::abs(inner.angles[j] - t) < 1e-12 &&
                std::abs(outer.angles[j] - t) < 1e-12,
            "annulus_interpolate: samples must sit on the uniform angle grid");
  }

  std::vector<cplx> in_pts = inner.images, out_pts = outer.images;
  if (chart) {
    require(static_cast<bool>(chart->to_band) &&
                static_cast<bool>(chart->from_band),
            "annulus_interpolate: incomplete band chart");
    for (cplx& w : in_pts) w = chart->to_band(w);
    for (cplx& w : out_pts) w = chart->to_band(w);
  }
  detail::require_disjoint_nested(in_pts, out_pts);

  std::vector<double> th_in = detail::angle_lift(in_pts);
  std::vector<double> th_out = detail::angle_lift(out_pts);
  // Align the outer lift branch with the inner one: radial fibers take the
  // shortest angular route.
  double shift =
      2.0 * pi * std::round((th_out[0] - th_in[0]) / (2.0 * pi));
  for (double& t : th_out) t -= shift;

  GridMap g = make_grid(GridKind::log_polar, std::log(spec.r_in),
                        std::log(spec.r_out), spec.n_radial, 0.0, 2.0 * pi,
                        spec.n_angular, true,
                        "radial interpolation between annulus boundary maps");
  for (int i = 0; i < spec.n_radial; ++i) {
    double s = static_cast<double>(i) / (spec.n_radial - 1);
    for (int j = 0; j < spec.n_angular; ++j) {
      std::size_t js = static_cast<std::size_t>(j);
      std::size_t k = g.idx(i, j);
      if (i == 0) {
        g.values[k] = inner.images[js];
      } else if (i == spec.n_radial - 1) {
        g.values[k] = outer.images[js];
      } else {
        double L = (1.0 - s) * std::log(std::abs(in_pts[js])) +
                   s * std::log(std::abs(out_pts[js]));
        double th = (1.0 - s) * th_in[js] + s * th_out[js];
        cplx w = std::polar(std::exp(L), th);
        g.values[k] = chart ? chart->from_band(w) : w;
      }
      g.defined[k] = 1;
    }
  }
  return g;
}

}  // namespace wanderlab
