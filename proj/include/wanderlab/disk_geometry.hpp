#pragma once

#include <algorithm>
#include <vector>

#include "wanderlab/util.hpp"

namespace wanderlab {

// A point of the open unit disk. Construction rejects |value| >= 1 outright:
// clamping would silently corrupt hyperbolic distances near the boundary.
struct DiskPoint {
  cplx value;

  explicit DiskPoint(cplx v) : value(v) {
    if (!(std::abs(v) < 1.0))
      throw precondition_error("DiskPoint: modulus must be < 1");
  }
  DiskPoint(double re, double im) : DiskPoint(cplx(re, im)) {}
};

// z -> phase * (z - a) / (1 - conj(a) z); a disk automorphism sending a to 0.
struct MoebiusDiskAuto {
  cplx a;
  cplx phase;

  MoebiusDiskAuto(DiskPoint a_, cplx phase_) : a(a_.value), phase(phase_) {
    if (std::abs(std::abs(phase) - 1.0) > 1e-14)
      throw precondition_error("MoebiusDiskAuto: |phase| must be 1");
  }

  cplx operator()(cplx z) const {
    return phase * (z - a) / (1.0 - std::conj(a) * z);
  }
};

// Metric normalization used throughout: density 2/(1-|z|^2), so that
// dist(0, z) = log((1+|z|)/(1-|z|)). Single source of truth for the repo.
inline double hyp_dist(DiskPoint z, DiskPoint w) {
  cplx num = z.value - w.value;
  cplx den = 1.0 - std::conj(z.value) * w.value;
  double t = std::abs(num) / std::abs(den);
  return std::log1p(t) - std::log1p(-t);
}

// c = (rho + r) / (1 + r rho): any analytic self-map of the disk fixing 0
// with |g'(0)| = rho satisfies |g(z)| <= c |z| on |z| <= r. rho = 0 is the
// plain Schwarz-lemma case and is admitted.
inline double uniform_schwarz_bound(double rho, double r) {
  require(rho >= 0.0 && rho < 1.0, "uniform_schwarz_bound: rho must be in [0,1)");
  require(r > 0.0 && r < 1.0, "uniform_schwarz_bound: r must be in (0,1)");
  return (rho + r) / (1.0 + r * rho);
}

// R = sqrt(r / (2 - r)): the preimage of the disk of radius r under any
// normalized Blaschke product with zeros inside it contains the closed disk
// of radius R; always r < R < 1.
inline double schwarz_preimage_radius(double r) {
  require(r > 0.0 && r < 1.0, "schwarz_preimage_radius: r must be in (0,1)");
  return std::sqrt(r / (2.0 - r));
}

namespace detail {

// Klein coordinates: geodesics become straight chords, so the hyperbolic
// convex hull is the Euclidean hull of the mapped points.
inline cplx to_klein(cplx p) { return 2.0 * p / (1.0 + std::norm(p)); }

inline cplx from_klein(cplx k) {
  double n = std::norm(k);
  // |k| < 1 for images of disk points; guard the sqrt against float spill.
  double s = std::sqrt(std::max(0.0, 1.0 - n));
  return k / (1.0 + s);
}

inline double cross(cplx o, cplx a, cplx b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

// Andrew monotone chain; returns hull vertices in counterclockwise order.
// Degenerate inputs (single point, collinear set) come back as the reduced
// chain, which the containment walk below handles uniformly.
inline std::vector<cplx> convex_hull(std::vector<cplx> pts) {
  std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](cplx a, cplx b) { return a == b; }),
            pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<cplx> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline cplx closest_on_segment(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double n = std::norm(ab);
  if (n == 0.0) return a;
  double t = ((p.real() - a.real()) * ab.real() +
              (p.imag() - a.imag()) * ab.imag()) / n;
  t = std::clamp(t, 0.0, 1.0);
  return a + t * ab;
}

}  // namespace detail

// True iff the query lies in the hyperbolic convex hull of the points or
// within hyperbolic distance tol of it. Exact for finite sets: in the Klein
// model the hull is a Euclidean polygon, so membership is a half-plane walk
// and the near-miss case projects back and measures a genuine distance.
inline bool hyp_convex_hull_contains(const std::vector<DiskPoint>& hull_points,
                                     DiskPoint query, double tol) {
  require(!hull_points.empty(), "hyp_convex_hull_contains: empty hull");
  std::vector<cplx> klein;
  klein.reserve(hull_points.size());
  for (const DiskPoint& p : hull_points)
    klein.push_back(detail::to_klein(p.value));
  cplx q = detail::to_klein(query.value);

  std::vector<cplx> hull = detail::convex_hull(klein);
  bool inside = false;
  if (hull.size() >= 3) {
    inside = true;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      cplx a = hull[i], b = hull[(i + 1) % hull.size()];
      if (detail::cross(a, b, q) < 0.0) {
        inside = false;
        break;
      }
    }
  } else if (hull.size() == 1) {
    inside = (q == hull[0]);
  }
  if (inside) return true;

  double best = std::numeric_limits<double>::infinity();
  cplx nearest = hull[0];
  if (hull.size() == 1) {
    nearest = hull[0];
  } else {
    for (std::size_t i = 0; i < hull.size(); ++i) {
      cplx a = hull[i], b = hull[(i + 1) % hull.size()];
      cplx c = detail::closest_on_segment(q, a, b);
      double d = std::abs(q - c);
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
  }
  DiskPoint proj(detail::from_klein(nearest));
  return hyp_dist(query, proj) <= tol;
}

}  // namespace wanderlab
