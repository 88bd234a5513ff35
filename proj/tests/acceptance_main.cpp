// Acceptance gate: one self-contained check per shipped guarantee, each
// printing exactly one [PASS]/[FAIL] line.  Run with no arguments for the
// whole battery or with a single criterion number (1..16).  Tolerances and
// runtime budgets are part of the contract and are enforced here, not in the
// unit suites.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wanderlab/blaschke.hpp"
#include "wanderlab/blaschke_seq.hpp"
#include "wanderlab/disk_geometry.hpp"
#include "wanderlab/gluing.hpp"
#include "wanderlab/io_json.hpp"
#include "wanderlab/model_builder.hpp"
#include "wanderlab/poly.hpp"
#include "wanderlab/poly_dynamics.hpp"
#include "wanderlab/qc_numerics.hpp"
#include "wanderlab/riemann.hpp"
#include "wanderlab/util.hpp"

using namespace wanderlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  std::ostringstream os;
  os.setf(std::ios::scientific);
  os.precision(2);
  os << x;
  return os.str();
}

std::vector<cplx> circle_samples(double radius, int n) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    pts.push_back(std::polar(radius, 2.0 * pi * k / double(n)));
  return pts;
}

GridMap sample_cartesian(double lo, double hi, int n,
                         const std::function<cplx(cplx)>& f) {
  GridMap g = make_grid(GridKind::cartesian, lo, hi, n, lo, hi, n, false,
                        "acceptance fixture");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::size_t k = g.idx(i, j);
      g.values[k] = f(g.node_point(i, j));
      g.defined[k] = 1;
    }
  return g;
}

GridMap sample_log_polar(double r_in, double r_out, int n0, int n1,
                         const std::function<cplx(cplx)>& f) {
  GridMap g = make_grid(GridKind::log_polar, std::log(r_in), std::log(r_out),
                        n0, 0.0, 2.0 * pi, n1, true, "acceptance fixture");
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      std::size_t k = g.idx(i, j);
      g.values[k] = f(g.node_point(i, j));
      g.defined[k] = 1;
    }
  return g;
}

// Shared corpus for the Blaschke-product criteria: normalized products of
// degree 2..5 with one zero pinned at the origin and the rest drawn from the
// disk of the trial radius r in {0.3, 0.6, 0.9}.  Index-pure: item(t) depends
// only on (seed, t).
struct CorpusItem {
  BlaschkeProduct b;
  double r = 0.0;
  double rho = 0.0;  // max zero modulus
};

constexpr std::uint64_t kCorpusSeed = 20260822u;

CorpusItem corpus_item(std::uint64_t seed, int trial) {
  RngStream rng(RngStream::derive(seed, static_cast<std::uint64_t>(trial)));
  const double radii[3] = {0.3, 0.6, 0.9};
  int d = 2 + static_cast<int>(rng.integer() % 4);
  double r = radii[rng.integer() % 3];
  std::vector<cplx> zeros{cplx(0.0, 0.0)};
  for (int k = 1; k < d; ++k) zeros.push_back(rng.disk(r));
  CorpusItem item;
  item.b = make_blaschke(cplx(1.0, 0.0), zeros);
  item.r = r;
  item.rho = 0.0;
  for (const cplx& a : zeros) item.rho = std::max(item.rho, std::abs(a));
  return item;
}

// ---------------------------------------------------------------- criterion 1
// Contracted Schwarz bound: |b(z)| <= c|z| with c = (rho + r)/(1 + r rho) for
// every z in the closed disk of radius r.
Outcome criterion_1() {
  const int trials = 1000;
  const int draws = 100;
  int violations = 0;
  double worst_slack = -1.0;
  for (int t = 0; t < trials; ++t) {
    CorpusItem item = corpus_item(kCorpusSeed, t);
    double c = uniform_schwarz_bound(item.rho, item.r);
    RngStream rng(RngStream::derive(kCorpusSeed ^ 0xa5a5a5a5ULL,
                                    static_cast<std::uint64_t>(t)));
    for (int j = 0; j < draws; ++j) {
      cplx z = rng.disk(item.r);
      double slack = std::abs(eval(item.b, z)) - c * std::abs(z);
      worst_slack = std::max(worst_slack, slack);
      if (slack > 1e-12) ++violations;
    }
  }
  Outcome o;
  o.pass = (violations == 0);
  o.detail = std::to_string(trials) + " products x " + std::to_string(draws) +
             " samples, violations " + std::to_string(violations) +
             ", worst slack " + sci(worst_slack);
  return o;
}

// ---------------------------------------------------------------- criterion 2
// The preimage of the disk of radius r contains the disk of radius
// sqrt(r/(2-r)): traced boundary min modulus stays above that bound.
Outcome criterion_2() {
  const int trials = 1000;
  int violations = 0;
  double worst_margin = 1e300;
  for (int t = 0; t < trials; ++t) {
    CorpusItem item = corpus_item(kCorpusSeed, t);
    PreimageDomain dom = preimage_domain(item.b, item.r, 384);
    double min_mod = 1e300;
    for (const cplx& z : dom.boundary) min_mod = std::min(min_mod, std::abs(z));
    double bound = schwarz_preimage_radius(item.r);
    worst_margin = std::min(worst_margin, min_mod - bound);
    if (min_mod < bound - 1e-6) ++violations;
  }
  Outcome o;
  o.pass = (violations == 0);
  o.detail = std::to_string(trials) + " traced boundaries, violations " +
             std::to_string(violations) + ", worst margin above bound " +
             sci(worst_margin);
  return o;
}

// ---------------------------------------------------------------- criterion 3
// Annulus modulus: the power-map annulus hits the closed form
// ((d-1)/(2 pi d)) log(1/r) to 1e-9, and random products stay inside the
// [lo, hi] bounds up to the band-chart estimation slack 0.02.
Outcome criterion_3() {
  double worst_power = -1.0;
  for (int d : {2, 3, 5}) {
    for (double r : {0.3, 0.6}) {
      BlaschkeProduct b = blaschke_power(d);
      PreimageDomain dom = preimage_domain(b, r, 384);
      std::vector<cplx> inner = circle_samples(r, 192);
      AnnulusBandChart chart = annulus_band_chart(inner, dom.boundary, 16);
      double want = (d - 1.0) / (2.0 * pi * d) * std::log(1.0 / r);
      worst_power = std::max(worst_power, std::abs(chart.modulus - want));
    }
  }
  bool power_ok = worst_power < 1e-9;

  const int trials = 100;
  int outside = 0;
  double worst_low = 1e300, worst_high = -1e300;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(RngStream::derive(kCorpusSeed ^ 0x33cc33ccULL,
                                    static_cast<std::uint64_t>(t)));
    int d = 2 + static_cast<int>(rng.integer() % 4);
    double r = 0.6;
    std::vector<cplx> zeros{cplx(0.0, 0.0)};
    for (int k = 1; k < d; ++k) zeros.push_back(rng.disk(0.5 * r));
    BlaschkeProduct b = make_blaschke(cplx(1.0, 0.0), zeros);
    PreimageDomain dom = preimage_domain(b, r, 512);
    AnnulusBandChart chart =
        annulus_band_chart(circle_samples(r, 256), dom.boundary, 32);
    auto [lo, hi] = annulus_modulus_bounds(b, r);
    worst_low = std::min(worst_low, chart.modulus - lo);
    worst_high = std::max(worst_high, chart.modulus - hi);
    if (chart.modulus < lo - 0.02 || chart.modulus > hi + 0.02) ++outside;
  }
  Outcome o;
  o.pass = power_ok && outside == 0;
  o.detail = "power-map closed-form gap " + sci(worst_power) + ", " +
             std::to_string(trials) + " random products outside bounds " +
             std::to_string(outside) + " (min over lo " + sci(worst_low) +
             ", max over hi " + sci(worst_high) + ")";
  return o;
}

// ---------------------------------------------------------------- criterion 4
// Multiplier: matches a high-order finite difference of b at 0 and obeys the
// strict bound |b'(0)| < r^(d-1) when all zeros lie in the disk of radius r.
Outcome criterion_4() {
  const int trials = 1000;
  const double h = 1e-4;
  double worst_fd = -1.0;
  int bound_violations = 0;
  double worst_bound_margin = 1e300;
  for (int t = 0; t < trials; ++t) {
    CorpusItem item = corpus_item(kCorpusSeed, t);
    cplx fd = (-eval(item.b, cplx(2 * h, 0.0)) +
               8.0 * eval(item.b, cplx(h, 0.0)) -
               8.0 * eval(item.b, cplx(-h, 0.0)) +
               eval(item.b, cplx(-2 * h, 0.0))) /
              (12.0 * h);
    cplx mult = multiplier(item.b);
    worst_fd = std::max(worst_fd, std::abs(mult - fd));
    double cap = std::pow(item.r, item.b.degree() - 1);
    worst_bound_margin = std::min(worst_bound_margin, cap - std::abs(mult));
    if (!(std::abs(mult) < cap)) ++bound_violations;
  }
  Outcome o;
  o.pass = worst_fd < 1e-10 && bound_violations == 0;
  o.detail = "worst |multiplier - FD| " + sci(worst_fd) +
             ", derivative-cap violations " + std::to_string(bound_violations) +
             ", worst cap margin " + sci(worst_bound_margin);
  return o;
}

// ---------------------------------------------------------------- criterion 5
// Critical points of a Blaschke product lie in the hyperbolic convex hull of
// its zeros.
Outcome criterion_5() {
  const int trials = 500;
  int violations = 0;
  int checked = 0;
  for (int t = 0; t < trials; ++t) {
    CorpusItem item = corpus_item(kCorpusSeed ^ 0x77ee77eeULL, t);
    std::vector<DiskPoint> zero_pts;
    zero_pts.reserve(item.b.zeros.size());
    for (const cplx& a : item.b.zeros) zero_pts.emplace_back(a);
    for (const DiskPoint& c : critical_points(item.b)) {
      ++checked;
      if (!hyp_convex_hull_contains(zero_pts, c, 1e-6)) ++violations;
    }
  }
  Outcome o;
  o.pass = (violations == 0);
  o.detail = std::to_string(trials) + " products, " + std::to_string(checked) +
             " critical points, hull violations " + std::to_string(violations);
  return o;
}

// ---------------------------------------------------------------- criterion 6
// Along a uniformly hyperbolic sequence an orbit enters the outer annulus
// {r <= |z| < 1} at most once within the horizon.
Outcome criterion_6() {
  const int trials = 1000;
  const int horizon = 50;
  const double r = 0.6;
  int violations = 0;
  int certified = 0;
  std::size_t longest = 0;
  for (int t = 0; t < trials; ++t) {
    std::uint64_t trial_seed =
        RngStream::derive(kCorpusSeed ^ 0x1b1b1b1bULL,
                          static_cast<std::uint64_t>(t));
    BlaschkeSequence seq;
    seq.degree_bound = 3;
    seq.declared_radius = 0.3;
    seq.provider = [trial_seed](int n) {
      RngStream rng(RngStream::derive(trial_seed,
                                      static_cast<std::uint64_t>(n)));
      int d = 2 + static_cast<int>(rng.integer() % 2);
      std::vector<cplx> zeros{cplx(0.0, 0.0)};
      for (int k = 1; k < d; ++k) zeros.push_back(rng.disk(0.3));
      return make_blaschke(cplx(1.0, 0.0), zeros);
    };
    HyperbolicityCertificate cert =
        certify_uniform_hyperbolicity(seq, horizon);
    if (cert.uniformly_hyperbolic) ++certified;
    RngStream start_rng(RngStream::derive(trial_seed, 0xfefeULL));
    DiskPoint start(start_rng.disk(0.95));
    std::vector<int> entries = annulus_entry_indices(seq, start, r, horizon);
    longest = std::max(longest, entries.size());
    if (entries.size() > 1) ++violations;
  }
  Outcome o;
  o.pass = (violations == 0 && certified == trials);
  o.detail = std::to_string(trials) + " certified sequences (" +
             std::to_string(certified) + " uniformly hyperbolic), horizon " +
             std::to_string(horizon) + ", longest entry list " +
             std::to_string(longest) + ", violations " +
             std::to_string(violations);
  return o;
}

// ---------------------------------------------------------------- criterion 7
// The alternating fixture is strongly contracting on average while its
// critical points drift to the boundary, so the finite-horizon
// uniform-hyperbolicity verdict must be negative.
Outcome criterion_7() {
  BlaschkeSequence seq = prop54_fixture(prop54_default_schedule);
  const int horizon = 200;
  double avg = contraction_average(seq, horizon);
  double max_crit_dist = 0.0;
  DiskPoint origin(0.0, 0.0);
  for (int n = 0; n <= horizon; ++n) {
    BlaschkeProduct b = seq_member(seq, n);
    for (const DiskPoint& c : critical_points(b))
      max_crit_dist = std::max(max_crit_dist, hyp_dist(origin, c));
  }
  HyperbolicityCertificate cert = certify_uniform_hyperbolicity(seq, horizon);
  Outcome o;
  o.pass = (avg < 0.6) && (max_crit_dist > 5.0) && !cert.uniformly_hyperbolic;
  o.detail = "contraction average " + sci(avg) +
             " (< 0.6), max critical hyperbolic distance " +
             sci(max_crit_dist) + " (> 5), verdict \"" + cert.verdict + "\"";
  return o;
}

// ---------------------------------------------------------------- criterion 8
// Boundary gluing of z(z-0.3)/(1-0.3z) against the squaring map: functional
// equation and identity zone hold on every chart, and the dilatation stays
// uniform as the depth grows.
Outcome criterion_8() {
  BlaschkeSequence seq;
  seq.degree_bound = 2;
  seq.provider = [](int) {
    return make_blaschke(cplx(1.0, 0.0), {cplx(0.0, 0.0), cplx(0.3, 0.0)});
  };
  GluingMaps gm = build_gluing_maps(seq, 0.6, 6, 3);
  double worst_eq = -1.0;
  for (double res : gm.equation_residual) worst_eq = std::max(worst_eq, res);
  double k_all = 0.0, k_head = 0.0;
  for (int n = 0; n <= 6; ++n) {
    k_all = std::max(k_all, gm.dilatation[static_cast<std::size_t>(n)].K_max);
    if (n <= 3)
      k_head =
          std::max(k_head, gm.dilatation[static_cast<std::size_t>(n)].K_max);
  }
  Outcome o;
  o.pass = worst_eq < 1e-6 && gm.identity_zone_deviation < 1e-12 &&
           k_all <= 1.1 * k_head;
  o.detail = "worst functional-equation residual " + sci(worst_eq) +
             ", identity zone deviation " + sci(gm.identity_zone_deviation) +
             ", K_max depth 0..6 " + sci(k_all) + " vs depth 0..3 " +
             sci(k_head);
  return o;
}

// ---------------------------------------------------------------- criterion 9
// Dilatation estimator fixtures: conformal maps read K = 1, the affine shear
// z + 0.5 conj(z) reads K = 3.
Outcome criterion_9() {
  GridMap ident = sample_cartesian(-0.5, 0.5, 33, [](cplx z) { return z; });
  double k_id = estimate_dilatation(ident).K_max;
  GridMap shear = sample_cartesian(
      -0.5, 0.5, 33, [](cplx z) { return z + 0.5 * std::conj(z); });
  double k_shear = estimate_dilatation(shear).K_max;
  GridMap square =
      sample_log_polar(0.5, 1.0, 64, 256, [](cplx z) { return z * z; });
  double k_square = estimate_dilatation(square).K_max;
  Outcome o;
  o.pass = std::abs(k_id - 1.0) < 1e-6 && std::abs(k_shear - 3.0) < 1e-2 &&
           std::abs(k_square - 1.0) < 1e-3;
  o.detail = "identity K " + sci(k_id) + ", shear K " + sci(k_shear) +
             ", annulus squaring K " + sci(k_square);
  return o;
}

// --------------------------------------------------------------- criterion 10
// Escape potential: G(P(z)) = d G(z) on escaping samples, and traced
// equipotential boundaries sit on their level.
Outcome criterion_10() {
  const std::vector<std::vector<cplx>> coeff_sets = {
      {cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)},
      {cplx(0.25, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)},
      {cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(1.0, 0.0)}};
  double worst_fun = -1.0;
  double worst_level = -1.0;
  for (const auto& coeffs : coeff_sets) {
    Polynomial p = make_polynomial(coeffs);
    RngStream rng(RngStream::derive(kCorpusSeed ^ 0x0f0f0f0fULL,
                                    static_cast<std::uint64_t>(coeffs.size()) +
                                        static_cast<std::uint64_t>(
                                            std::llround(
                                                std::abs(coeffs[0]) * 100 +
                                                std::abs(coeffs[1]) * 10))));
    for (int j = 0; j < 1000; ++j) {
      cplx z = std::polar(3.0 + 5.0 * rng.unit(), 2.0 * pi * rng.unit());
      double g = green_value(p, z);
      double gp = green_value(p, poly_eval(p.c, z));
      worst_fun = std::max(worst_fun, std::abs(gp - 2.0 * g));
    }
    for (int n = 0; n <= 2; ++n) {
      EquipotentialDomain dom = equipotential_curve(p, 2.0, n, 256);
      worst_level = std::max(worst_level, dom.level_residual);
    }
  }
  Outcome o;
  o.pass = worst_fun < 1e-8 && worst_level < 1e-6;
  o.detail = "3 polynomials x 1000 escaping samples, worst |G(P(z)) - 2 G(z)| " +
             sci(worst_fun) + ", worst equipotential level residual " +
             sci(worst_level);
  return o;
}

// --------------------------------------------------------------- criterion 11
// Squaring-map model: every recovered product is the squaring map up to
// rotation and the conjugacy residuals are small.
Outcome criterion_11() {
  Polynomial p = make_polynomial(
      {cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)});
  PolynomialModel model = build_model(p, 2.0, 4, 1e-3, 512);
  double worst_zero = -1.0;
  for (const BlaschkeProduct& b : model.bs) {
    if (b.degree() != 2) {
      Outcome bad;
      bad.detail = "recovered product has degree " +
                   std::to_string(b.degree()) + ", expected 2";
      return bad;
    }
    for (const cplx& a : b.zeros) worst_zero = std::max(worst_zero, std::abs(a));
  }
  double worst_res = -1.0;
  for (double r : model.residuals) worst_res = std::max(worst_res, r);
  Outcome o;
  o.pass = worst_zero < 1e-3 && worst_res < 1e-3;
  o.detail = std::to_string(model.bs.size()) +
             " recovered products, max zero modulus " + sci(worst_zero) +
             " (rotation of squaring), max conjugacy residual " +
             sci(worst_res);
  return o;
}

// --------------------------------------------------------------- criterion 12
// Affine-quadratic model: conjugacy residuals within 1e-2, critical distance
// profile nonincreasing (within 0.02) and dominated by its first entry, and
// the recovered sequence certifies uniformly hyperbolic.
Outcome criterion_12() {
  Polynomial p = make_polynomial(
      {cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(1.0, 0.0)});
  PolynomialModel model = build_model(p, 4.0, 8, 1e-3, 512);
  double worst_res = -1.0;
  for (double r : model.residuals) worst_res = std::max(worst_res, r);
  std::vector<double> prof = critical_distance_profile(model);
  bool profile_ok = !prof.empty();
  double worst_rise = -1e300;
  for (std::size_t k = 0; k + 1 < prof.size(); ++k)
    worst_rise = std::max(worst_rise, prof[k + 1] - prof[k]);
  for (std::size_t k = 0; k < prof.size(); ++k)
    if (prof[k] > prof[0] + 1e-9) profile_ok = false;
  if (worst_rise > 0.02) profile_ok = false;

  std::vector<BlaschkeProduct> bs = model.bs;
  BlaschkeSequence seq;
  seq.degree_bound = 2;
  seq.provider = [bs](int n) {
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n),
                                          bs.size() - 1);
    return bs[k];
  };
  HyperbolicityCertificate cert = certify_uniform_hyperbolicity(
      seq, static_cast<int>(bs.size()) - 1);
  Outcome o;
  o.pass = worst_res < 1e-2 && profile_ok && cert.uniformly_hyperbolic;
  o.detail = "max conjugacy residual " + sci(worst_res) +
             ", profile head " + sci(prof.empty() ? 0.0 : prof[0]) +
             ", worst profile rise " + sci(worst_rise) + ", verdict \"" +
             cert.verdict + "\"";
  return o;
}

// --------------------------------------------------------------- criterion 13
// Coexistence experiment at lambda = 1/2, depth 8: the attracting-basin probe
// reads discrete (pairwise separation stabilizes) while the escaping probe
// reads indiscrete (nearest-neighbour spacing collapses).
Outcome criterion_13() {
  CoexistenceReport rep = coexistence_experiment(cplx(0.5, 0.0), 8);
  const DiscretenessReport& basin = rep.basin_report;
  const DiscretenessReport& esc = rep.escaping_report;
  bool shape_ok = basin.min_pairwise.size() == 3 && esc.nn_median.size() == 3;
  double stabil = 0.0, shrink = 0.0;
  if (shape_ok) {
    stabil = basin.min_pairwise[2] - 0.5 * basin.min_pairwise[1];
    shrink = esc.nn_median[1] - 4.0 * esc.nn_median[2];
  }
  Outcome o;
  o.pass = shape_ok && basin.verdict == "discrete-evidence" &&
           esc.verdict == "indiscrete-evidence" && stabil >= 0.0 &&
           shrink >= 0.0;
  o.detail = "basin verdict \"" + basin.verdict + "\", escaping verdict \"" +
             esc.verdict + "\", stabilization margin " + sci(stabil) +
             ", shrink margin " + sci(shrink);
  return o;
}

// --------------------------------------------------------------- criterion 14
// Superattracting template: the odd lattice points double under g with
// vanishing derivative, and exp semiconjugates g to G on the left half-disk
// of radius 10 (the right half overflows double range by design).
Outcome criterion_14() {
  auto q_prime = [](cplx z, int d) {
    return 2.0 * (std::pow(1.0 + z, d - 1) - 1.0) / z;
  };
  double worst_lattice = -1.0, worst_deriv = -1.0, worst_semi = -1.0;
  for (int d : {2, 3}) {
    for (int k : {1, 2, 4}) {
      cplx zk(0.0, (2.0 * k - 1.0) * pi);
      cplx z2k(0.0, (4.0 * k - 1.0) * pi);
      worst_lattice =
          std::max(worst_lattice, std::abs(template_g(zk, d) - z2k));
      cplx ew = std::exp(zk);
      cplx gp = 2.0 + q_prime(ew, d) * ew;
      worst_deriv = std::max(worst_deriv, std::abs(gp));
    }
    RngStream rng(RngStream::derive(kCorpusSeed ^ 0x5e5e5e5eULL,
                                    static_cast<std::uint64_t>(d)));
    for (int j = 0; j < 100; ++j) {
      double angle = pi / 2.0 + pi * rng.unit();
      double radius = 10.0 * std::sqrt(rng.unit());
      cplx w = std::polar(radius, angle);
      cplx lhs = std::exp(template_g(w, d));
      cplx rhs = template_G(std::exp(w), d);
      worst_semi = std::max(worst_semi, std::abs(lhs - rhs));
    }
  }
  Outcome o;
  o.pass = worst_lattice < 1e-12 && worst_deriv < 1e-10 && worst_semi < 1e-10;
  o.detail = "worst lattice doubling gap " + sci(worst_lattice) +
             ", worst |g'| at lattice " + sci(worst_deriv) +
             ", worst semiconjugacy gap " + sci(worst_semi);
  return o;
}

// --------------------------------------------------------------- criterion 15
// Marked-point transport: the real-segment motion lands on the closed form,
// and closed loops well away from the critical markers return the marked
// point to its start.
Outcome criterion_15() {
  Polynomial sq = make_polynomial(
      {cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)});
  std::vector<cplx> segment;
  const int steps = 32;
  for (int j = 0; j <= steps; ++j) {
    double t = double(j) / steps;
    segment.push_back(cplx(0.25 + (1.0 / 9.0 - 0.25) * t, 0.0));
  }
  cplx moved = holomorphic_motion_transport(sq, cplx(0.25, 0.0), segment,
                                            cplx(-0.5, 0.0), 1, 0);
  double segment_err = std::abs(moved - cplx(-1.0 / 3.0, 0.0));

  Polynomial aq = make_polynomial(
      {cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(1.0, 0.0)});
  const int loops = 50;
  const int segs = 16;
  double worst_loop = -1.0;
  for (int t = 0; t < loops; ++t) {
    RngStream rng(RngStream::derive(kCorpusSeed ^ 0x2d2d2d2dULL,
                                    static_cast<std::uint64_t>(t)));
    cplx lam0 = std::polar(1.7 + 0.6 * rng.unit(), 2.0 * pi * rng.unit());
    double psi = 2.0 * pi * rng.unit();
    cplx centre = lam0 + std::polar(0.05, psi);
    std::vector<cplx> loop;
    for (int j = 0; j <= segs; ++j)
      loop.push_back(centre +
                     std::polar(0.05, psi + pi + 2.0 * pi * j / segs));
    loop.front() = lam0;
    loop.back() = lam0;
    // P(z) = lam0 exactly: the + branch of the quadratic formula.
    cplx z = (-0.5 + std::sqrt(cplx(0.25, 0.0) + 4.0 * lam0)) / 2.0;
    cplx back = holomorphic_motion_transport(aq, lam0, loop, z, 1, 0);
    worst_loop = std::max(worst_loop, std::abs(back - z));
  }
  Outcome o;
  o.pass = segment_err < 1e-8 && worst_loop < 1e-6;
  o.detail = "segment endpoint error " + sci(segment_err) + ", worst of " +
             std::to_string(loops) + " loop monodromy residuals " +
             sci(worst_loop);
  return o;
}

// --------------------------------------------------------------- criterion 16
// Determinism: rebuilding the two models and the coexistence experiment from
// scratch yields byte-identical JSON reports.
Outcome criterion_16() {
  auto model_report = [](const std::vector<cplx>& coeffs, double R,
                         int n_max) {
    Polynomial p = make_polynomial(coeffs);
    PolynomialModel model = build_model(p, R, n_max, 1e-3, 512);
    std::vector<std::string> files;
    for (const ModelLayer& layer : model.layers)
      files.push_back(
          "maps/" +
          riemann_cache_key(layer.map.boundary, layer.map.accuracy_target) +
          ".wlrm");
    return model_manifest_json(model, files).dump(2);
  };
  const std::vector<cplx> sq = {cplx(0.0, 0.0), cplx(0.0, 0.0),
                                cplx(1.0, 0.0)};
  const std::vector<cplx> aq = {cplx(0.0, 0.0), cplx(0.5, 0.0),
                                cplx(1.0, 0.0)};
  std::string sq_a = model_report(sq, 2.0, 4);
  std::string sq_b = model_report(sq, 2.0, 4);
  std::string aq_a = model_report(aq, 4.0, 8);
  std::string aq_b = model_report(aq, 4.0, 8);
  auto coex_report = [] {
    return coexistence_report_json(coexistence_experiment(cplx(0.5, 0.0), 8))
        .dump(2);
  };
  std::string cx_a = coex_report();
  std::string cx_b = coex_report();
  Outcome o;
  o.pass = sq_a == sq_b && aq_a == aq_b && cx_a == cx_b;
  o.detail = "squaring model manifest " + std::to_string(sq_a.size()) +
             " bytes " + (sq_a == sq_b ? "identical" : "DIFFER") +
             ", affine-quadratic manifest " + std::to_string(aq_a.size()) +
             " bytes " + (aq_a == aq_b ? "identical" : "DIFFER") +
             ", coexistence report " + std::to_string(cx_a.size()) +
             " bytes " + (cx_a == cx_b ? "identical" : "DIFFER");
  return o;
}

struct Criterion {
  std::string label;
  std::function<Outcome()> run;
  double budget_seconds;  // 0 = no budget
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> table = {
      {"uniform Schwarz bound on the random product corpus", criterion_1, 5.0},
      {"preimage disk containment on the random product corpus", criterion_2,
       30.0},
      {"annulus modulus closed form and band-chart bounds", criterion_3, 0.0},
      {"multiplier finite-difference match and derivative cap", criterion_4,
       0.0},
      {"critical points inside the hyperbolic hull of zeros", criterion_5,
       0.0},
      {"single annulus visit along uniformly hyperbolic sequences",
       criterion_6, 0.0},
      {"contracting fixture with escaping critical points", criterion_7, 0.0},
      {"boundary gluing functional equation and uniform dilatation",
       criterion_8, 120.0},
      {"dilatation estimator fixtures", criterion_9, 0.0},
      {"escape potential functional equation and equipotential levels",
       criterion_10, 0.0},
      {"squaring-map model recovery", criterion_11, 0.0},
      {"affine-quadratic model certification", criterion_12, 0.0},
      {"coexistence verdicts at lambda one-half", criterion_13, 300.0},
      {"superattracting template lattice and semiconjugacy", criterion_14,
       0.0},
      {"marked-point transport segment and loop monodromy", criterion_15,
       0.0},
      {"byte-identical reports on rebuild", criterion_16, 0.0},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  if (argc <= 1) {
    for (int k = 1; k <= 16; ++k) selected.push_back(k);
  } else {
    for (int i = 1; i < argc; ++i) {
      int k = 0;
      try {
        k = std::stoi(argv[i]);
      } catch (const std::exception&) {
        std::cerr << "usage: acceptance [criterion 1..16]...\n";
        return 2;
      }
      if (k < 1 || k > 16) {
        std::cerr << "usage: acceptance [criterion 1..16]...\n";
        return 2;
      }
      selected.push_back(k);
    }
  }

  bool all_pass = true;
  for (int k : selected) {
    const Criterion& c = criteria()[static_cast<std::size_t>(k - 1)];
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    bool within_budget = c.budget_seconds <= 0.0 || secs < c.budget_seconds;
    bool pass = o.pass && within_budget;
    std::ostringstream line;
    line << (pass ? "[PASS]" : "[FAIL]") << " criterion " << k << ": "
         << c.label << " — " << o.detail;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << " (" << secs << " s";
    if (c.budget_seconds > 0.0) {
      line << ", budget " << c.budget_seconds << " s";
      if (!within_budget) line << " EXCEEDED";
    }
    line << ")";
    std::cout << line.str() << "\n";
    if (!pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
