#pragma once

// Quasiconformal gluing between a Blaschke sequence and its power-map
// reference sequence. Each map h_n is the identity on |z| <= r, follows the
// continued inverse-branch correspondence on the circle |z| = r^(1/d_n),
// interpolates radially between the two, and extends outward by solving the
// functional equation btilde_n(h_n(z)) = h_{n+1}(z^(d_n)) one preimage
// annulus at a time. A finite lift depth leaves the outermost annulus
// uncovered; the covered area fraction is reported, never extrapolated.
//
// h_n is quasiconformal but only C^0 across the collar top and across each
// lift-generation circle, so every smooth annular piece is kept as its own
// chart and evaluation never lets an interpolation stencil straddle a seam.
// The per-map assembled chart exists for reporting and serialization.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <wanderlab/blaschke.hpp>
#include <wanderlab/blaschke_seq.hpp>
#include <wanderlab/grid_map.hpp>
#include <wanderlab/qc_numerics.hpp>
#include <wanderlab/util.hpp>

namespace wanderlab {

struct GluingOptions {
  // Angular nodes per chart; radial spacing is set to about half the angular
  // step so central-difference dilatation noise stays balanced.
  int n_angular = 1024;
  // Off-node sample lattice for the functional-equation residual sweep.
  int residual_radial = 24;
  int residual_angular = 96;
  // Every stride-th lifted node is audited against the full preimage set.
  int uniqueness_stride = 97;
};

struct GluingMaps {
  double r = 0.0;
  int n_max = 0;
  int lift_depth = 0;
  std::vector<int> degrees;              // degree of each sequence member
  std::vector<double> outer_radius;      // outermost covered radius per map
  std::vector<double> coverage_fraction;  // covered fraction of disk area
  // Smooth annular pieces per map: collar first, then one per lift
  // generation. seam_log_radii[n] holds the piece boundaries in log radius,
  // ascending, starting at log r.
  std::vector<std::vector<GridMap>> pieces;
  std::vector<std::vector<double>> seam_log_radii;
  // Assembled uniform chart per map, resampled from the pieces.
  std::vector<GridMap> maps;
  std::vector<DilatationReport> dilatation;  // per assembled chart
  // Per n < n_max: sup over off-node samples of
  // |btilde_n(h_n(z)) - h_{n+1}(z^{d_n})| on the lifted region |z| >= r^{1/d_n}.
  std::vector<double> equation_residual;
  double identity_zone_deviation = 0.0;  // sup over chart base rows
};

namespace detail {

inline cplx eval_glued_pieces(const std::vector<GridMap>& pieces,
                              const std::vector<double>& seams, double r,
                              cplx z) {
  if (std::abs(z) <= r * (1.0 + 1e-12)) return z;
  double u = std::log(std::abs(z));
  int g = 0;
  while (g + 1 < static_cast<int>(pieces.size()) && u > seams[g + 1]) ++g;
  return grid_eval(pieces[g], z);
}

// Newton step for btilde(w) = target from a seed on the known branch. The
// step cap keeps the iteration from tunneling to another preimage sheet.
inline cplx gluing_newton(const BlaschkeProduct& bt, cplx target, cplx seed,
                          const char* where) {
  cplx w = seed;
  double scale = std::max(1.0, std::abs(target));
  for (int it = 0; it < 40; ++it) {
    cplx f = eval(bt, w) - target;
    if (std::abs(f) < 1e-13 * scale) return w;
    cplx df = derivative_value(bt, w);
    if (!(std::abs(df) > 1e-14)) {
      std::ostringstream msg;
      msg << where << ": derivative vanished during branch tracking near w=("
          << w.real() << "," << w.imag() << ")";
      throw numeric_error(msg.str());
    }
    cplx step = f / df;
    double mod = std::abs(step);
    if (mod > 0.1) step *= 0.1 / mod;
    w -= step;
    double wm = std::abs(w);
    if (wm >= 1.0) w *= (1.0 - 1e-15) / wm;
  }
  std::ostringstream msg;
  msg << where << ": branch tracking failed to converge near seed=("
      << seed.real() << "," << seed.imag() << ")";
  throw numeric_error(msg.str());
}

// Audit a lifted node: among all preimages of target, the branch nearest to
// the seed must be the accepted one, and the runner-up must be clearly
// farther. Two near-equidistant candidates mean the continuation step was
// too coarse to name a branch, which is a hard error, not a guess.
inline void audit_branch(const BlaschkeProduct& bt, cplx target, cplx seed,
                         cplx accepted, int n, double u, double t) {
  std::vector<DiskPoint> all = preimages(bt, target);
  double best = 1e300, second = 1e300;
  cplx best_pt(0.0, 0.0);
  for (const DiskPoint& p : all) {
    double d = std::abs(p.value - seed);
    if (d < best) {
      second = best;
      best = d;
      best_pt = p.value;
    } else if (d < second) {
      second = d;
    }
  }
  bool nearest_is_accepted = std::abs(best_pt - accepted) < 1e-8;
  bool separated = second >= 1.2 * std::max(best, 1e-12);
  if (!nearest_is_accepted || !separated) {
    std::ostringstream msg;
    msg << "build_gluing_maps: branch ambiguity at n=" << n << ", log|z|=" << u
        << ", arg z=" << t << " (nearest " << best << ", runner-up " << second
        << ")";
    throw numeric_error(msg.str());
  }
}

struct BoundaryBranch {
  std::vector<double> log_mod;   // log|psi| at each angular node
  std::vector<double> arg_lift;  // continuous argument lift of psi
};

// The circle correspondence psi_n = btilde^{-1} o z^d on |z| = r^{1/d},
// continued from the preimage of r nearest the positive real axis. One loop
// of the base angle wraps the target d times around |w| = r and traverses
// the full preimage curve of that circle exactly once.
inline BoundaryBranch boundary_branch(const BlaschkeProduct& bt, int d,
                                      double r, int n1, int n) {
  std::vector<DiskPoint> seeds = preimages(bt, cplx(r, 0.0));
  cplx w0 = seeds.front().value;
  double best_arg = std::abs(std::arg(w0));
  for (const DiskPoint& p : seeds) {
    double a = std::abs(std::arg(p.value));
    if (a < best_arg - 1e-12 ||
        (std::abs(a - best_arg) <= 1e-12 && p.value.real() > w0.real())) {
      best_arg = a;
      w0 = p.value;
    }
  }
  BoundaryBranch out;
  out.log_mod.reserve(n1);
  out.arg_lift.reserve(n1);
  cplx w = w0;
  double lift = std::arg(w0);
  double h1 = 2.0 * pi / n1;
  for (int j = 0; j < n1; ++j) {
    if (j > 0) {
      cplx target = std::polar(r, d * h1 * j);
      cplx seed = w;
      w = gluing_newton(bt, target, seed, "build_gluing_maps[boundary]");
      if (j % 64 == 0)
        audit_branch(bt, target, seed, w, n, std::log(r) / d, h1 * j);
      lift = unwrap_near(std::arg(w), lift);
    }
    out.log_mod.push_back(std::log(std::abs(w)));
    out.arg_lift.push_back(lift);
  }
  cplx w_close =
      gluing_newton(bt, cplx(r, 0.0), w, "build_gluing_maps[boundary]");
  require(std::abs(w_close - w0) < 1e-9,
          "build_gluing_maps: boundary correspondence fails to close up");
  double lift_close = unwrap_near(std::arg(w_close), lift);
  require(std::abs(lift_close - (out.arg_lift.front() + 2.0 * pi)) < 1e-6,
          "build_gluing_maps: boundary correspondence winding is not 1");
  return out;
}

inline GridMap make_piece(double u_lo, double u_hi, int n1, double h0_target,
                          int n, const char* role) {
  int n0 = std::max(
      4, static_cast<int>(std::ceil((u_hi - u_lo) / h0_target)) + 1);
  std::ostringstream prov;
  prov << "gluing h_" << n << " " << role;
  return make_grid(GridKind::log_polar, u_lo, u_hi, n0, 0.0, 2.0 * pi, n1,
                   true, prov.str());
}

}  // namespace detail

// h_n as a disk map: exact identity on |z| <= r, piecewise chart values
// outside, refusing queries beyond the covered radius.
inline cplx gluing_eval(const GluingMaps& gm, int n, cplx z) {
  require(n >= 0 && n <= gm.n_max, "gluing_eval: map index out of range");
  return detail::eval_glued_pieces(gm.pieces[n], gm.seam_log_radii[n], gm.r,
                                   z);
}

// Glue the sequence btilde_n of seq to the reference maps z^{d_n}. Pieces
// are built in two passes: interpolation collars for every n independently,
// then functional-equation lifts top-down, since the lift for h_n consumes
// the finished h_{n+1}.
inline GluingMaps build_gluing_maps(const BlaschkeSequence& seq, double r,
                                    int n_max, int lift_depth,
                                    const GluingOptions& opt = {}) {
  require(r > 0.0 && r < 1.0, "build_gluing_maps: r must lie in (0,1)");
  require(n_max >= 0, "build_gluing_maps: n_max must be >= 0");
  require(lift_depth >= 0, "build_gluing_maps: lift_depth must be >= 0");
  require(opt.n_angular >= 64,
          "build_gluing_maps: need at least 64 angular nodes");
  require(opt.residual_radial >= 1 && opt.residual_angular >= 1,
          "build_gluing_maps: residual sample counts must be positive");

  double r2 = r * r;
  std::vector<BlaschkeProduct> members;
  members.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    BlaschkeProduct bt = seq_member(seq, n);
    for (const cplx& a : bt.zeros)
      require(std::abs(a) < r2,
              "build_gluing_maps: a zero lies outside |z| < r^2");
    for (const DiskPoint& c : critical_points(bt)) {
      require(std::abs(c.value) < r2,
              "build_gluing_maps: a critical point lies outside |z| < r^2");
      require(std::abs(eval(bt, c.value)) < r2,
              "build_gluing_maps: a critical value lies outside |z| < r^2");
    }
    members.push_back(std::move(bt));
  }

  GluingMaps out;
  out.r = r;
  out.n_max = n_max;
  out.lift_depth = lift_depth;
  for (const BlaschkeProduct& bt : members)
    out.degrees.push_back(bt.degree());

  double log_r = std::log(r);
  double h1 = 2.0 * pi / opt.n_angular;
  double h0_target = 0.5 * h1;

  // Piece boundaries: lift generation g of map n reaches
  // r^{1/(d_n d_{n+1} ... d_{n+g})}, capped at lift_depth generations and at
  // the end of the computed horizon.
  out.pieces.resize(n_max + 1);
  out.seam_log_radii.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    int g_n = std::min(lift_depth, n_max - n);
    std::vector<double>& seams = out.seam_log_radii[n];
    seams.push_back(log_r);
    double prod = 1.0;
    for (int g = 0; g <= g_n; ++g) {
      prod *= out.degrees[n + g];
      seams.push_back(log_r / prod);
    }
    out.outer_radius.push_back(std::exp(seams.back()));
    out.coverage_fraction.push_back(std::exp(2.0 * seams.back()));
  }

  // Pass 1 per map: base identity row, circle correspondence, interpolation
  // collar on log r <= u <= (log r)/d_n. These stages are independent across
  // n; only the lift pass below has cross-n data flow.
  for (int n = 0; n <= n_max; ++n) {
    int d = out.degrees[n];
    const std::vector<double>& seams = out.seam_log_radii[n];
    GridMap g = detail::make_piece(seams[0], seams[1], opt.n_angular,
                                   h0_target, n, "collar");
    detail::BoundaryBranch psi =
        detail::boundary_branch(members[n], d, r, opt.n_angular, n);
    double collar = seams[1] - seams[0];
    for (int i = 0; i < g.n0; ++i) {
      double u = g.coord0(i);
      double s = std::min(1.0, std::max(0.0, (u - log_r) / collar));
      for (int j = 0; j < opt.n_angular; ++j) {
        double t = g.coord1(j);
        cplx v =
            (i == 0)
                ? g.node_point(0, j)
                : std::polar(std::exp((1.0 - s) * log_r + s * psi.log_mod[j]),
                             (1.0 - s) * t + s * psi.arg_lift[j]);
        g.values[g.idx(i, j)] = v;
        g.defined[g.idx(i, j)] = 1;
      }
    }
    out.pieces[n].push_back(std::move(g));
  }

  // Pass 2, top-down: lift pieces for h_n solve btilde_n(w) = h_{n+1}(z^{d_n})
  // with the seed extrapolated from the rows below, keeping each column on
  // its branch. Each piece shares its base row with the piece beneath it.
  for (int n = n_max - 1; n >= 0; --n) {
    const BlaschkeProduct& bt = members[n];
    int d = out.degrees[n];
    const std::vector<double>& seams = out.seam_log_radii[n];
    int g_n = static_cast<int>(seams.size()) - 2;
    for (int g = 1; g <= g_n; ++g) {
      GridMap piece = detail::make_piece(seams[g], seams[g + 1], opt.n_angular,
                                         h0_target, n, "lift");
      const GridMap& below_piece = out.pieces[n][g - 1];
      for (int j = 0; j < piece.n1; ++j) {
        piece.values[piece.idx(0, j)] =
            below_piece.values[below_piece.idx(below_piece.n0 - 1, j)];
        piece.defined[piece.idx(0, j)] = 1;
      }
      for (int i = 1; i < piece.n0; ++i) {
        double u = piece.coord0(i);
        for (int j = 0; j < piece.n1; ++j) {
          double t = piece.coord1(j);
          cplx zd = std::polar(std::exp(d * u), d * t);
          cplx target = detail::eval_glued_pieces(
              out.pieces[n + 1], out.seam_log_radii[n + 1], r, zd);
          cplx below = piece.values[piece.idx(i - 1, j)];
          cplx seed = below;
          if (i >= 2) {
            cplx pred = 2.0 * below - piece.values[piece.idx(i - 2, j)];
            if (std::abs(pred) < 1.0) seed = pred;
          }
          cplx w = detail::gluing_newton(bt, target, seed,
                                         "build_gluing_maps[lift]");
          if (std::abs(w - below) > 0.2) {
            std::ostringstream msg;
            msg << "build_gluing_maps: branch ambiguity at n=" << n
                << ", log|z|=" << u << ", arg z=" << t
                << " (lifted point jumped off its column)";
            throw numeric_error(msg.str());
          }
          if ((static_cast<long>(i) * 131 + j) % opt.uniqueness_stride == 0)
            detail::audit_branch(bt, target, seed, w, n, u, t);
          piece.values[piece.idx(i, j)] = w;
          piece.defined[piece.idx(i, j)] = 1;
        }
      }
      out.pieces[n].push_back(std::move(piece));
    }
  }

  // Assembled uniform chart per map, resampled from the pieces; its base row
  // is the exact identity circle. Seam rows of the assembled chart smear the
  // one-sided radial derivatives, which is the price of a single chart; the
  // pieces remain the precise evaluator.
  for (int n = 0; n <= n_max; ++n) {
    const std::vector<double>& seams = out.seam_log_radii[n];
    double span = seams.back() - seams.front();
    int n0 = std::max(9, static_cast<int>(std::ceil(span / h0_target)) + 1);
    std::ostringstream prov;
    prov << "gluing h_" << n << " assembled r=" << r
         << " degree=" << out.degrees[n]
         << " lift_generations=" << seams.size() - 2;
    GridMap g = make_grid(GridKind::log_polar, seams.front(), seams.back(), n0,
                          0.0, 2.0 * pi, opt.n_angular, true, prov.str());
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < g.n1; ++j) {
        g.values[g.idx(i, j)] = detail::eval_glued_pieces(
            out.pieces[n], seams, r, g.node_point(i, j));
        g.defined[g.idx(i, j)] = 1;
      }
    for (int j = 0; j < g.n1; ++j)
      out.identity_zone_deviation =
          std::max(out.identity_zone_deviation,
                   std::abs(g.values[g.idx(0, j)] - g.node_point(0, j)));
    out.dilatation.push_back(estimate_dilatation(g));
    out.maps.push_back(std::move(g));
  }

  // Off-node residual sweep of the functional equation over the lifted
  // region r^{1/d_n} <= |z| <= rho_n. Inside the collar the equation is not
  // claimed: there h_n is interpolation, not a lift.
  for (int n = 0; n < n_max; ++n) {
    int d = out.degrees[n];
    const std::vector<double>& seams = out.seam_log_radii[n];
    double lo = seams[1];
    double span = seams.back() - lo;
    double worst = 0.0;
    for (int k = 0; k < opt.residual_radial; ++k) {
      double u = lo + span * (k + 0.37) / opt.residual_radial;
      for (int m = 0; m < opt.residual_angular; ++m) {
        double t = 2.0 * pi * (m + 0.61) / opt.residual_angular;
        cplx z = std::polar(std::exp(u), t);
        cplx lhs = eval(members[n],
                        detail::eval_glued_pieces(out.pieces[n], seams, r, z));
        cplx rhs = detail::eval_glued_pieces(
            out.pieces[n + 1], out.seam_log_radii[n + 1], r,
            std::polar(std::exp(d * u), d * t));
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    out.equation_residual.push_back(worst);
  }
  return out;
}

}  // namespace wanderlab
