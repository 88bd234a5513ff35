#include <catch2/catch_amalgamated.hpp>

#include "wanderlab/qc_numerics.hpp"
#include "wanderlab/util.hpp"

using namespace wanderlab;

namespace {

// Independent symmetric-triple sweep, written directly against the angle
// arrays rather than through the library's loop.
double qs_oracle(const CircleMapSamples& m) {
  std::size_t n = m.angles.size();
  double h = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const cplx& f1 = m.images[(j + n - k) % n];
      const cplx& f2 = m.images[j];
      const cplx& f3 = m.images[(j + k) % n];
      double num = std::abs(f1 - f2), den = std::abs(f2 - f3);
      if (den > 1e-15) h = std::max(h, num / den);
      if (num > 1e-15) h = std::max(h, den / num);
    }
  }
  return h;
}

GridMap sample_cartesian(double lo, double hi, int n,
                         const std::function<cplx(cplx)>& f) {
  GridMap g = make_grid(GridKind::cartesian, lo, hi, n, lo, hi, n, false,
                        "sampled test map");
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
                        n0, 0.0, 2.0 * pi, n1, true, "sampled test map");
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j) {
      std::size_t k = g.idx(i, j);
      g.values[k] = f(g.node_point(i, j));
      g.defined[k] = 1;
    }
  return g;
}

}  // namespace

TEST_CASE("quasisymmetry of isometries is one") {
  CircleMapSamples ident =
      sample_circle_map(1.0, 64, [](cplx z) { return z; });
  REQUIRE(quasisymmetry_constant(ident) <= 1.0 + 1e-9);
  CircleMapSamples rot = sample_circle_map(
      1.0, 64, [](cplx z) { return z * std::polar(1.0, 0.7); });
  REQUIRE(quasisymmetry_constant(rot) <= 1.0 + 1e-9);
}

TEST_CASE("quasisymmetry of an affine stretch restricted to the circle") {
  auto stretch = [](cplx z) { return z + 0.3 * std::conj(z); };
  CircleMapSamples coarse = sample_circle_map(1.0, 512, stretch);
  CircleMapSamples fine = sample_circle_map(1.0, 1024, stretch);
  double h_coarse = quasisymmetry_constant(coarse);
  double h_fine = quasisymmetry_constant(fine);
  REQUIRE(h_fine >= 1.5);
  REQUIRE(h_fine <= 1.9);
  REQUIRE(std::abs(h_fine - h_coarse) < 0.02 * h_fine);
  REQUIRE(std::abs(h_fine - qs_oracle(fine)) < 1e-12);
}

TEST_CASE("quasisymmetry rejects tiny sample sets") {
  CircleMapSamples s = sample_circle_map(1.0, 8, [](cplx z) { return z; });
  REQUIRE_THROWS_AS(quasisymmetry_constant(s), precondition_error);
}

TEST_CASE("identity boundary data extends to the identity") {
  std::vector<double> xs, fs;
  for (int k = -40; k <= 40; ++k) {
    xs.push_back(0.25 * k);
    fs.push_back(0.25 * k);
  }
  LineMapSamples f = make_line_map_samples(xs, fs);
  GridMap g = beurling_ahlfors_extend(f, RectSpec{-2.0, 2.0, 2.0, 33, 33});
  for (int i = 0; i < g.n0; ++i)
    for (int j = 0; j < g.n1; ++j)
      REQUIRE(std::abs(g.values[g.idx(i, j)] -
                       cplx(g.coord1(j), g.coord0(i))) < 1e-12);
  DilatationReport rep = estimate_dilatation(g);
  REQUIRE(rep.K_max < 1.0 + 1e-6);
  REQUIRE(rep.orientation_violations == 0);
}

TEST_CASE("affine boundary data extends conformally") {
  std::vector<double> xs, fs;
  for (int k = -40; k <= 40; ++k) {
    xs.push_back(0.25 * k);
    fs.push_back(0.5 * k);  // f(x) = 2x
  }
  GridMap g = beurling_ahlfors_extend(make_line_map_samples(xs, fs),
                                      RectSpec{-2.0, 2.0, 2.0, 33, 33});
  for (int i = 0; i < g.n0; ++i)
    for (int j = 0; j < g.n1; ++j) {
      cplx z(g.coord1(j), g.coord0(i));
      REQUIRE(std::abs(g.values[g.idx(i, j)] - 2.0 * z) < 1e-12);
    }
  REQUIRE(estimate_dilatation(g).K_max < 1.0 + 1e-6);
}

TEST_CASE("oscillating boundary data extends with stable finite dilatation") {
  std::vector<double> xs, fs;
  for (int k = -800; k <= 800; ++k) {
    double x = 0.01 * k;
    xs.push_back(x);
    fs.push_back(x + 0.2 * std::sin(x));
  }
  LineMapSamples f = make_line_map_samples(xs, fs);
  GridMap coarse =
      beurling_ahlfors_extend(f, RectSpec{-2.0, 2.0, 2.0, 41, 41});
  GridMap fine =
      beurling_ahlfors_extend(f, RectSpec{-2.0, 2.0, 2.0, 81, 81});
  DilatationReport rc = estimate_dilatation(coarse);
  DilatationReport rf = estimate_dilatation(fine);
  REQUIRE(rc.K_max < 10.0);
  REQUIRE(rc.orientation_violations == 0);
  REQUIRE(rf.orientation_violations == 0);
  REQUIRE(std::abs(rf.K_max - rc.K_max) < 0.05 * rc.K_max);
}

TEST_CASE("non-monotone boundary data is rejected") {
  REQUIRE_THROWS_AS(
      make_line_map_samples({0.0, 1.0, 2.0}, {0.0, 1.0, 0.5}),
      precondition_error);
}

TEST_CASE("circle rotation extends along the strip lift") {
  CircleMapSamples rot = sample_circle_map(
      1.0, 64, [](cplx z) { return z * std::polar(1.0, 0.4); });
  GridMap g = beurling_ahlfors_extend_circle(rot, 1.0, 65, 17);
  for (int i = 0; i < g.n0; ++i)
    for (int j = 0; j < g.n1; ++j) {
      cplx expect(g.coord1(j) + 0.4, g.coord0(i));
      REQUIRE(std::abs(g.values[g.idx(i, j)] - expect) < 1e-10);
    }
  REQUIRE(estimate_dilatation(g).K_max < 1.0 + 1e-6);
}

TEST_CASE("circle map with oscillation extends to finite dilatation") {
  CircleMapSamples m = sample_circle_map(1.0, 256, [](cplx z) {
    double t = std::arg(z);
    return std::polar(1.0, t + 0.2 * std::sin(t));
  });
  GridMap g = beurling_ahlfors_extend_circle(m, 2.0, 129, 33);
  DilatationReport rep = estimate_dilatation(g);
  REQUIRE(rep.K_max < 3.0);
  REQUIRE(rep.orientation_violations == 0);
}

TEST_CASE("dilatation of the identity and of an affine shear") {
  GridMap ident =
      sample_cartesian(-0.5, 0.5, 33, [](cplx z) { return z; });
  DilatationReport r1 = estimate_dilatation(ident);
  REQUIRE(std::abs(r1.K_max - 1.0) < 1e-6);

  GridMap shear = sample_cartesian(
      -0.5, 0.5, 33, [](cplx z) { return z + 0.5 * std::conj(z); });
  DilatationReport r2 = estimate_dilatation(shear);
  REQUIRE(std::abs(r2.K_max - 3.0) < 1e-2);
  // Central differences are exact on affine maps, so the discrete Beltrami
  // coefficient is exact too.
  REQUIRE(std::abs(r2.K_max - 3.0) < 1e-10);
  for (std::size_t k = 0; k < r2.mu.values.size(); ++k)
    if (r2.mu.defined[k])
      REQUIRE(std::abs(r2.mu.values[k] - cplx(0.5, 0.0)) < 1e-12);
}

TEST_CASE("dilatation of a holomorphic map on an annulus chart") {
  GridMap sq = sample_log_polar(0.5, 1.0, 64, 256,
                                [](cplx z) { return z * z; });
  DilatationReport rep = estimate_dilatation(sq);
  REQUIRE(std::abs(rep.K_max - 1.0) < 1e-3);
  REQUIRE(rep.orientation_violations == 0);
}

TEST_CASE("dilatation estimate converges at second order") {
  auto f = [](cplx z) {
    cplx zb = std::conj(z);
    return z + 0.1 * zb * zb * zb;
  };
  auto mu_true = [](cplx z) {
    cplx zb = std::conj(z);
    return cplx(0.3, 0.0) * zb * zb;
  };
  GridMap coarse = sample_cartesian(-0.5, 0.5, 17, f);
  GridMap fine = sample_cartesian(-0.5, 0.5, 33, f);
  DilatationReport rc = estimate_dilatation(coarse);
  DilatationReport rf = estimate_dilatation(fine);
  // Compare the discrete field against the analytic coefficient on the
  // shared interior nodes (every second fine node is a coarse node).
  double errc = 0.0, errf = 0.0;
  for (int i = 1; i + 1 < coarse.n0; ++i)
    for (int j = 1; j + 1 < coarse.n1; ++j) {
      cplx z = coarse.node_point(i, j);
      errc = std::max(errc,
                      std::abs(rc.mu.values[rc.mu.idx(i, j)] - mu_true(z)));
      errf = std::max(
          errf,
          std::abs(rf.mu.values[rf.mu.idx(2 * i, 2 * j)] - mu_true(z)));
    }
  REQUIRE(errf <= errc / 3.0);
}

TEST_CASE("small grids are rejected") {
  GridMap tiny = sample_cartesian(-0.5, 0.5, 2, [](cplx z) { return z; });
  REQUIRE_THROWS_AS(estimate_dilatation(tiny), precondition_error);
}

TEST_CASE("interpolating identity boundary maps yields the identity") {
  // The dilatation estimate carries an (h0^2 + h1^2)/6 discretization floor
  // even on the exact identity, so the 1e-6 target fixes the resolution.
  CircleMapSamples inner =
      sample_circle_map(0.9, 4096, [](cplx z) { return z; });
  CircleMapSamples outer =
      sample_circle_map(1.0, 4096, [](cplx z) { return z; });
  GridMap g =
      annulus_interpolate(inner, outer, AnnulusSpec{0.9, 1.0, 129, 4096});
  double worst = 0.0;
  for (int i = 0; i < g.n0; ++i)
    for (int j = 0; j < g.n1; ++j)
      worst = std::max(worst,
                       std::abs(g.values[g.idx(i, j)] - g.node_point(i, j)));
  REQUIRE(worst < 1e-12);
  REQUIRE(estimate_dilatation(g).K_max < 1.0 + 1e-6);
}

TEST_CASE("boundary rows reproduce the samples verbatim") {
  auto wobble = [](cplx z) {
    double t = std::arg(z);
    return std::polar(std::abs(z) * (1.0 + 0.05 * std::cos(3.0 * t)),
                      t + 0.1 * std::sin(2.0 * t));
  };
  CircleMapSamples inner = sample_circle_map(0.5, 64, wobble);
  CircleMapSamples outer = sample_circle_map(1.0, 64, [](cplx z) { return z; });
  GridMap g = annulus_interpolate(inner, outer, AnnulusSpec{0.5, 1.0, 17, 64});
  for (int j = 0; j < 64; ++j) {
    REQUIRE(g.values[g.idx(0, j)] ==
            inner.images[static_cast<std::size_t>(j)]);
    REQUIRE(g.values[g.idx(16, j)] ==
            outer.images[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("twist interpolation matches the closed-form dilatation") {
  double alpha = 0.5;
  CircleMapSamples inner = sample_circle_map(
      0.5, 256, [alpha](cplx z) { return z * std::polar(1.0, alpha); });
  CircleMapSamples outer =
      sample_circle_map(1.0, 256, [](cplx z) { return z; });
  GridMap g =
      annulus_interpolate(inner, outer, AnnulusSpec{0.5, 1.0, 65, 256});
  double du = std::log(2.0);
  double beta = alpha / (2.0 * du);
  double mu = beta / std::sqrt(1.0 + beta * beta);
  double k_true = (1.0 + mu) / (1.0 - mu);
  double k_est = estimate_dilatation(g).K_max;
  REQUIRE(std::abs(k_est - k_true) < 0.02 * k_true);
}

TEST_CASE("intersecting boundary curves are rejected") {
  // A wildly wobbling inner curve pokes through the outer circle.
  auto big_wobble = [](cplx z) {
    double t = std::arg(z);
    return std::polar(std::abs(z) * (1.0 + 1.3 * std::cos(2.0 * t) *
                                               std::cos(2.0 * t)),
                      t);
  };
  CircleMapSamples inner = sample_circle_map(0.5, 64, big_wobble);
  CircleMapSamples outer = sample_circle_map(1.0, 64, [](cplx z) { return z; });
  REQUIRE_THROWS_AS(
      annulus_interpolate(inner, outer, AnnulusSpec{0.5, 1.0, 17, 64}),
      precondition_error);
}
