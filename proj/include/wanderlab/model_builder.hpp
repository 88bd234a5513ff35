#pragma once

// Polynomial-to-Blaschke models.  A polynomial fixing the origin acts on the
// nested equipotential disks D_n = {G < d^n log R}; uniformizing each disk
// and reading the action through the charts produces a sequence of genuine
// degree-d Blaschke products whose zeros are the uniformized roots of P.
// The composition psi_{n+1} . P . psi_n^{-1} is kept only as the residual
// oracle; downstream consumers get exact Blaschke structure.
//
// Also here: the explicit template maps q, G, g (a superattracting model
// with the doubling relation g(z_k) = z_{2k} on the odd-multiple-of-pi-i
// lattice and the semiconjugacy exp . g = G . exp), and the two-probe
// coexistence experiment that runs the grand-orbit discreteness diagnostic
// at a basin probe and an escaping probe of lambda z + z^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wanderlab/blaschke.hpp"
#include "wanderlab/disk_geometry.hpp"
#include "wanderlab/poly_dynamics.hpp"
#include "wanderlab/riemann.hpp"
#include "wanderlab/util.hpp"

namespace wanderlab {

// One uniformized equipotential disk.  Deep levels have boundary moduli far
// beyond what the mapping numerics can square, so the traced curve is
// rescaled to unit size before uniformization and the scale is kept here;
// to_disk/from_disk compose it back in (conformal maps absorb scalings).
struct ModelLayer {
  EquipotentialDomain domain;
  double scale = 1.0;
  RiemannMapNumeric map;

  cplx to_disk(cplx z) const { return map.forward(scale * z); }
  cplx from_disk(cplx w) const { return map.inverse(w) / scale; }
};

struct PolynomialModel {
  Polynomial P;
  double R = 0.0;
  std::vector<ModelLayer> layers;   // uniformizations of D_0 .. D_{n_max}
  std::vector<BlaschkeProduct> bs;  // b_0 .. b_{n_max-1}
  std::vector<double> residuals;    // sup conjugacy residual per n
  bool accuracy_warning = false;    // some map missed its accuracy target

  int depth() const { return static_cast<int>(bs.size()); }
};

namespace detail {

// 64 deterministic test points in the 0.9-disk: two rings, offset phases.
inline std::vector<cplx> model_test_points() {
  std::vector<cplx> pts;
  pts.reserve(64);
  for (int j = 0; j < 32; ++j)
    pts.push_back(std::polar(0.9, 2.0 * pi * j / 32.0));
  for (int j = 0; j < 32; ++j)
    pts.push_back(std::polar(0.45, 2.0 * pi * (j + 0.5) / 32.0));
  return pts;
}

}  // namespace detail

inline PolynomialModel build_model(const Polynomial& p, double R, int n_max,
                                   double accuracy, int n_samples = 512) {
  require(p.fixes_zero,
          "build_model: P must fix the origin; conjugate the fixed point to 0 "
          "first (this is not done silently)");
  require(n_max >= 1, "build_model: n_max must be >= 1");
  require(accuracy > 0.0 && std::isfinite(accuracy),
          "build_model: accuracy must be positive");
  require(R > 1.0, "build_model: R must be > 1");
  for (const cplx& c : critical_points(p))
    require(green_value(p, c) < std::log(R),
            "build_model: R is not admissible, a critical point sits at or "
            "above the base level");

  PolynomialModel model;
  model.P = p;
  model.R = R;

  for (int n = 0; n <= n_max; ++n) {
    ModelLayer layer;
    layer.domain = equipotential_curve(p, R, n, n_samples);
    double top = 0.0;
    for (const cplx& z : layer.domain.boundary) top = std::max(top, std::abs(z));
    layer.scale = 1.0 / top;
    std::vector<cplx> scaled;
    scaled.reserve(layer.domain.boundary.size());
    for (const cplx& z : layer.domain.boundary) scaled.push_back(layer.scale * z);
    layer.map = riemann_map(scaled, accuracy);
    model.accuracy_warning = model.accuracy_warning || !layer.map.accuracy_met;
    model.layers.push_back(std::move(layer));
  }

  // all d roots of P lie in D_0 and hence in every D_n
  std::vector<cplx> roots = preimages(p, cplx(0.0, 0.0));
  const std::vector<cplx> test_pts = detail::model_test_points();

  for (int n = 0; n < n_max; ++n) {
    const ModelLayer& cur = model.layers[static_cast<std::size_t>(n)];
    const ModelLayer& nxt = model.layers[static_cast<std::size_t>(n + 1)];

    std::vector<cplx> zeros;
    zeros.reserve(roots.size());
    bool origin_snapped = false;
    for (const cplx& r : roots) {
      cplx w = cur.to_disk(r);
      require(std::abs(w) < 1.0,
              "build_model: uniformized root left the disk, the level curve "
              "numerics are inconsistent");
      // the origin root maps to the chart origin by normalization; snap the
      // first one so the product is exactly origin-fixing
      if (!origin_snapped && std::abs(w) < 1e-9) {
        w = cplx(0.0, 0.0);
        origin_snapped = true;
      }
      zeros.push_back(w);
    }
    require(origin_snapped,
            "build_model: no uniformized root landed at the chart origin");
    std::stable_sort(zeros.begin(), zeros.end(), [](cplx a, cplx b) {
      return std::abs(a) < std::abs(b);
    });

    auto prod_part = [&zeros](cplx z) {
      cplx acc(1.0, 0.0);
      for (const cplx& a : zeros) acc *= (z - a) / (1.0 - std::conj(a) * z);
      return acc;
    };
    auto conj_value = [&](cplx z) {
      return nxt.to_disk(eval(p, cur.from_disk(z)));
    };

    // fit the rotation at one well-conditioned test point
    cplx phase(0.0, 0.0);
    bool fitted = false;
    for (cplx zs : {cplx(0.5, 0.0), cplx(-0.5, 0.0), cplx(0.0, 0.5),
                    cplx(0.35, 0.35)}) {
      cplx denom = prod_part(zs);
      if (std::abs(denom) < 0.05) continue;
      cplx raw = conj_value(zs) / denom;
      if (std::abs(raw) < 0.2 || std::abs(raw) > 5.0)
        throw numeric_error(
            "build_model: conjugacy breakdown while fitting the rotation at "
            "level " +
            std::to_string(n));
      phase = raw / std::abs(raw);
      fitted = true;
      break;
    }
    require(fitted, "build_model: no usable phase-fit point");

    BlaschkeProduct b = make_blaschke(phase, zeros);

    double residual = 0.0;
    for (const cplx& z : test_pts)
      residual = std::max(residual, std::abs(conj_value(z) - eval(b, z)));
    if (residual > 10.0 * accuracy)
      throw numeric_error("build_model: conjugacy residual " +
                          std::to_string(residual) + " at level " +
                          std::to_string(n) + " exceeds 10x the accuracy " +
                          std::to_string(accuracy));

    model.bs.push_back(std::move(b));
    model.residuals.push_back(residual);
  }
  return model;
}

// Hyperbolic distance from the chart origin to the uniformized critical
// points of P, per level.  Strict domain nesting makes this nonincreasing
// (the disks grow, so the points sink toward the origin in their charts).
inline std::vector<double> critical_distance_profile(
    const PolynomialModel& model) {
  require(!model.layers.empty(), "critical_distance_profile: model not built");
  std::vector<double> profile;
  profile.reserve(model.layers.size());
  const DiskPoint origin(0.0, 0.0);
  for (const ModelLayer& layer : model.layers) {
    double worst = 0.0;
    for (const cplx& c : critical_points(model.P)) {
      cplx w = layer.to_disk(c);
      require(std::abs(w) < 1.0,
              "critical_distance_profile: critical point left the chart disk");
      worst = std::max(worst, hyp_dist(origin, DiskPoint(w)));
    }
    profile.push_back(worst);
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Template maps.  q is the degree-(d-1) polynomial 2 sum C(d-1,j) z^j / j;
// G(z) = -z^2 exp(q(z) - c) with c = q(-1) has superattracting fixed points
// at 0 and -1; g(w) = 2w + q(exp(w)) - c + pi*i is its logarithmic lift and
// doubles the lattice z_k = (2k-1) pi i: g(z_k) = z_{2k} with g'(z_k) = 0.

inline cplx template_q(cplx z, int d) {
  require(d >= 2, "template_q: degree must be >= 2");
  cplx sum(0.0, 0.0);
  cplx zj(1.0, 0.0);
  double binom = 1.0;  // running C(d-1, j)
  for (int j = 1; j <= d - 1; ++j) {
    binom *= static_cast<double>(d - j) / static_cast<double>(j);
    zj *= z;
    sum += binom * zj / static_cast<double>(j);
  }
  return 2.0 * sum;
}

inline cplx template_G(cplx z, int d) {
  const cplx c = template_q(cplx(-1.0, 0.0), d);
  return -z * z * std::exp(template_q(z, d) - c);
}

inline cplx template_g(cplx w, int d) {
  const cplx c = template_q(cplx(-1.0, 0.0), d);
  return 2.0 * w + template_q(std::exp(w), d) - c + cplx(0.0, pi);
}

struct TemplateOrbitTrace {
  std::vector<cplx> points;  // g-iterates after the start value
  bool overflowed = false;
  bool toward_superattractor = false;  // exp of the tail near G's point -1
};

inline TemplateOrbitTrace template_orbit_probe(int d, cplx w0, int n) {
  require(d >= 2, "template_orbit_probe: degree must be >= 2");
  require(n >= 1, "template_orbit_probe: need at least one step");
  TemplateOrbitTrace trace;
  cplx w = w0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(w) > 1e6) {
      trace.overflowed = true;
      break;
    }
    w = template_g(w, d);
    trace.points.push_back(w);
  }
  if (!trace.points.empty()) {
    cplx e = std::exp(trace.points.back());
    trace.toward_superattractor = std::abs(e + 1.0) < 0.5;
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Coexistence experiment: discrete and indiscrete grand-orbit behaviour for
// the same map lambda z + z^2, read off at two probes.

struct CoexistenceReport {
  cplx lambda;
  double R = 0.0;
  int depth = 0;
  bool figure_only = false;

  cplx basin_probe;     // on the ray of lambda, inside the attracting basin
  cplx escaping_probe;  // on the half-level curve G = (log R)/2, angle 0
  DiscretenessReport basin_report;
  DiscretenessReport escaping_report;

  // figure data
  std::vector<cplx> d0_boundary, d1_boundary;
  FieldRaster julia;
  GrandOrbitSample basin_scatter, escaping_scatter;
  std::vector<std::vector<cplx>> model_zeros;  // per b_n
  std::vector<std::vector<cplx>> model_crits;  // per b_n
  std::vector<double> model_residuals;
};

inline CoexistenceReport coexistence_experiment(
    cplx lambda, int depth, double accuracy = 1e-3, bool figure_only = false,
    std::optional<cplx> escaping_probe_override = std::nullopt) {
  require(std::abs(lambda) > 0.0, "coexistence_experiment: lambda must be nonzero");
  if (!figure_only)
    require(std::abs(lambda) < 1.0,
            "coexistence_experiment: need an attracting fixed point, "
            "|lambda| < 1 (figure-only mode lifts this)");
  require(depth >= 2, "coexistence_experiment: depth must be >= 2");

  Polynomial p = make_polynomial({cplx(0.0, 0.0), lambda, cplx(1.0, 0.0)});

  CoexistenceReport rep;
  rep.lambda = lambda;
  rep.R = 4.0;
  rep.depth = depth;
  rep.figure_only = figure_only;

  PolynomialModel model = build_model(p, rep.R, 4, accuracy);
  rep.d0_boundary = model.layers[0].domain.boundary;
  rep.d1_boundary = model.layers[1].domain.boundary;
  rep.model_residuals = model.residuals;
  for (const BlaschkeProduct& b : model.bs) {
    rep.model_zeros.push_back(b.zeros);
    std::vector<cplx> crits;
    for (const DiskPoint& c : critical_points(b)) crits.push_back(c.value);
    rep.model_crits.push_back(std::move(crits));
  }
  rep.julia = julia_field(p, -2.0, 2.0, -2.0, 2.0, 256, 256, 256);

  if (figure_only) {
    // no verdict claims; scatter shows the critical grand orbit instead
    cplx crit = -lambda / 2.0;
    rep.basin_scatter = grand_orbit_sample(p, crit, std::min(depth, 6),
                                           std::min(depth, 6),
                                           ClipRegion{cplx(0.0, 0.0), 2.0});
    return rep;
  }

  // basin probe: hyperbolic distance 1 from the origin inside the inner
  // invariant disk |z| <= rho0 (|lambda| + rho0 < 1 makes it contracting,
  // so it sits inside the attracting basin), along the ray of lambda
  const double rho0 = 0.95 * (1.0 - std::abs(lambda));
  rep.basin_probe = std::tanh(0.5) * rho0 * lambda / std::abs(lambda);
  ClipRegion basin_region{cplx(0.0, 0.0), 0.99 * rho0 / 0.8};

  // escaping probe: half of the base level, external angle 0
  rep.escaping_probe =
      escaping_probe_override.has_value()
          ? *escaping_probe_override
          : equipotential_curve(p, std::sqrt(rep.R), 0, 64).boundary[0];
  require(green_value(p, rep.escaping_probe) > 0.0,
          "coexistence_experiment: escaping probe must have positive "
          "potential");
  ClipRegion escaping_region{cplx(0.0, 0.0),
                             0.95 * std::abs(rep.escaping_probe)};

  rep.basin_report = discreteness_diagnostic(p, rep.basin_probe, basin_region,
                                             depth);
  rep.escaping_report =
      discreteness_diagnostic(p, rep.escaping_probe, escaping_region, depth);

  rep.basin_scatter = grand_orbit_sample(p, rep.basin_probe, depth, depth,
                                         basin_region);
  rep.escaping_scatter = grand_orbit_sample(p, rep.escaping_probe, depth,
                                            depth, escaping_region);
  return rep;
}

}  // namespace wanderlab
