#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wanderlab/util.hpp"

namespace wanderlab {

enum class GridKind { cartesian, log_polar };

// Structured grid of complex values over a rectangle (axis 0 = y, axis 1 = x)
// or an annulus in log-polar coordinates (axis 0 = u = log radius, axis 1 =
// angle t). Spacing is uniform per axis; a periodic angular axis covers
// [a1_min, a1_min + 2pi) without a duplicated seam column.
struct GridMap {
  GridKind kind = GridKind::cartesian;
  double a0_min = 0.0, a0_max = 1.0;
  int n0 = 0;
  double a1_min = 0.0, a1_max = 1.0;
  int n1 = 0;
  bool periodic1 = false;
  std::vector<cplx> values;           // row-major, n0 * n1
  std::vector<std::uint8_t> defined;  // 1 where values holds data
  std::string provenance;

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n1) +
           static_cast<std::size_t>(j);
  }
  double h0() const { return (a0_max - a0_min) / (n0 - 1); }
  double h1() const {
    return periodic1 ? (a1_max - a1_min) / n1 : (a1_max - a1_min) / (n1 - 1);
  }
  double coord0(int i) const { return a0_min + h0() * i; }
  double coord1(int j) const { return a1_min + h1() * j; }

  // Location of a node in the complex plane.
  cplx node_point(int i, int j) const {
    if (kind == GridKind::cartesian) return cplx(coord1(j), coord0(i));
    return std::polar(std::exp(coord0(i)), coord1(j));
  }
};

inline GridMap make_grid(GridKind kind, double a0_min, double a0_max, int n0,
                         double a1_min, double a1_max, int n1, bool periodic1,
                         std::string provenance) {
  require(n0 >= 2 && n1 >= 2, "make_grid: need at least 2 nodes per axis");
  require(a0_max > a0_min, "make_grid: empty axis 0 range");
  require(periodic1 || a1_max > a1_min, "make_grid: empty axis 1 range");
  if (periodic1)
    require(std::abs((a1_max - a1_min) - 2.0 * pi) < 1e-12,
            "make_grid: periodic axis must span exactly 2pi");
  GridMap g;
  g.kind = kind;
  g.a0_min = a0_min;
  g.a0_max = a0_max;
  g.n0 = n0;
  g.a1_min = a1_min;
  g.a1_max = a1_max;
  g.n1 = n1;
  g.periodic1 = periodic1;
  g.values.assign(static_cast<std::size_t>(n0) * n1, cplx(0.0, 0.0));
  g.defined.assign(static_cast<std::size_t>(n0) * n1, 0);
  g.provenance = std::move(provenance);
  return g;
}

inline void validate_grid(const GridMap& g) {
  require(g.n0 >= 2 && g.n1 >= 2, "GridMap: need at least 2 nodes per axis");
  require(g.values.size() == static_cast<std::size_t>(g.n0) * g.n1 &&
              g.defined.size() == g.values.size(),
          "GridMap: value/mask storage does not match dimensions");
  for (std::size_t k = 0; k < g.values.size(); ++k)
    if (g.defined[k])
      require(finite(g.values[k]), "GridMap: non-finite value at defined node");
}

namespace detail {

inline cplx catmull_rom(cplx p0, cplx p1, cplx p2, cplx p3, double t) {
  return 0.5 * (2.0 * p1 + (-p0 + p2) * t +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (t * t) +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * (t * t * t));
}

}  // namespace detail

// Bicubic interpolation in chart coordinates (c0 along axis 0, c1 along
// axis 1). Queries must land in the covered region: every real node the
// stencil touches must be defined. At a non-periodic edge the missing
// stencil line is synthesized by quadratic extrapolation, which keeps the
// edge-cell tangent second-order accurate (a duplicated edge line would
// halve it, an O(h) defect).
inline cplx grid_eval_chart(const GridMap& g, double c0, double c1) {
  const double h_0 = g.h0(), h_1 = g.h1();
  double s0 = (c0 - g.a0_min) / h_0;
  const double edge_tol = 1e-9;
  require(s0 >= -edge_tol && s0 <= g.n0 - 1 + edge_tol,
          "grid_eval: query outside axis-0 range");
  if (s0 < 0.0) s0 = 0.0;
  if (s0 > g.n0 - 1) s0 = g.n0 - 1;
  double s1;
  if (g.periodic1) {
    double span = g.a1_max - g.a1_min;
    double tt = std::fmod(c1 - g.a1_min, span);
    if (tt < 0.0) tt += span;
    s1 = tt / h_1;
  } else {
    s1 = (c1 - g.a1_min) / h_1;
    require(s1 >= -edge_tol && s1 <= g.n1 - 1 + edge_tol,
            "grid_eval: query outside axis-1 range");
    if (s1 < 0.0) s1 = 0.0;
    if (s1 > g.n1 - 1) s1 = g.n1 - 1;
  }
  int i1 = static_cast<int>(std::floor(s0));
  if (i1 > g.n0 - 2) i1 = g.n0 - 2;
  int j1 = static_cast<int>(std::floor(s1));
  int j_cap = g.periodic1 ? g.n1 - 1 : g.n1 - 2;
  if (j1 > j_cap) j1 = j_cap;
  double t0 = s0 - i1, t1 = s1 - j1;

  auto node = [&g](int i, int j) -> cplx {
    std::size_t k = g.idx(i, j);
    require(g.defined[k] != 0, "grid_eval: query touches undefined nodes");
    return g.values[k];
  };
  auto node_j = [&g, &node](int i, int j) -> cplx {
    if (g.periodic1) return node(i, ((j % g.n1) + g.n1) % g.n1);
    if (j < 0)
      return g.n1 >= 3 ? 3.0 * node(i, 0) - 3.0 * node(i, 1) + node(i, 2)
                       : node(i, 0);
    if (j >= g.n1)
      return g.n1 >= 3 ? 3.0 * node(i, g.n1 - 1) - 3.0 * node(i, g.n1 - 2) +
                             node(i, g.n1 - 3)
                       : node(i, g.n1 - 1);
    return node(i, j);
  };
  auto stencil = [&g, &node_j](int i, int j) -> cplx {
    if (i < 0)
      return g.n0 >= 3 ? 3.0 * node_j(0, j) - 3.0 * node_j(1, j) + node_j(2, j)
                       : node_j(0, j);
    if (i >= g.n0)
      return g.n0 >= 3 ? 3.0 * node_j(g.n0 - 1, j) - 3.0 * node_j(g.n0 - 2, j) +
                             node_j(g.n0 - 3, j)
                       : node_j(g.n0 - 1, j);
    return node_j(i, j);
  };

  cplx col[4];
  for (int a = 0; a < 4; ++a) {
    int i = i1 - 1 + a;
    cplx row[4];
    for (int b = 0; b < 4; ++b) row[b] = stencil(i, j1 - 1 + b);
    col[a] = detail::catmull_rom(row[0], row[1], row[2], row[3], t1);
  }
  return detail::catmull_rom(col[0], col[1], col[2], col[3], t0);
}

// Interpolates the map at a point of its domain (complex plane coordinates).
inline cplx grid_eval(const GridMap& g, cplx z) {
  if (g.kind == GridKind::cartesian)
    return grid_eval_chart(g, z.imag(), z.real());
  double m = std::abs(z);
  require(m > 0.0, "grid_eval: log-polar grid cannot be queried at 0");
  return grid_eval_chart(g, std::log(m), std::arg(z));
}

}  // namespace wanderlab
