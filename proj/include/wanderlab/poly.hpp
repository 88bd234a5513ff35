#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "wanderlab/util.hpp"

namespace wanderlab {

// Coefficients are ascending: c[0] + c[1] z + ... + c[d] z^d.
using coeffs = std::vector<cplx>;

inline cplx poly_eval(const coeffs& c, cplx z) {
  cplx v(0.0, 0.0);
  for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
  return v;
}

inline coeffs poly_derivative(const coeffs& c) {
  if (c.size() <= 1) return {cplx(0.0, 0.0)};
  coeffs d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i)
    d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

inline coeffs poly_mul(const coeffs& a, const coeffs& b) {
  coeffs r(a.size() + b.size() - 1, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

// Drops trailing coefficients that are negligible against the largest one.
inline coeffs poly_trim(coeffs a) {
  double mx = 0.0;
  for (const cplx& v : a) mx = std::max(mx, std::abs(v));
  double tol = mx * 1e-14;
  while (a.size() > 1 && std::abs(a.back()) <= tol) a.pop_back();
  return a;
}

inline coeffs poly_sub(coeffs a, const coeffs& b) {
  if (a.size() < b.size()) a.resize(b.size(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  return poly_trim(std::move(a));
}

inline void poly_sort_roots(std::vector<cplx>& roots) {
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

// All complex roots via the companion matrix, then two Newton polish steps.
// Robust for the degrees this library meets (d <= ~20).
inline std::vector<cplx> poly_roots(coeffs c) {
  require(!c.empty(), "poly_roots: empty coefficient vector");
  c = poly_trim(std::move(c));
  if (c.size() == 1) {
    if (c[0] == cplx(0.0, 0.0))
      throw numeric_error("poly_roots: zero polynomial");
    return {};
  }
  // Deflate exact zero roots so the companion matrix stays well scaled.
  std::vector<cplx> roots;
  std::size_t low = 0;
  while (low + 1 < c.size() && c[low] == cplx(0.0, 0.0)) ++low;
  for (std::size_t i = 0; i < low; ++i) roots.push_back(cplx(0.0, 0.0));
  if (low > 0) c.erase(c.begin(), c.begin() + low);

  const std::size_t n = c.size() - 1;
  if (n >= 1) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(
        static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i + 1 < n; ++i)
      companion(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) =
          -c[i] / c[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success)
      throw numeric_error("poly_roots: eigensolver failed to converge");
    coeffs deriv = poly_derivative(c);
    for (std::size_t i = 0; i < n; ++i) {
      cplx r = solver.eigenvalues()(static_cast<Eigen::Index>(i));
      for (int step = 0; step < 2; ++step) {
        cplx f = poly_eval(c, r);
        cplx df = poly_eval(deriv, r);
        if (std::abs(df) < 1e-300) break;
        cplx next = r - f / df;
        if (!finite(next)) break;
        if (std::abs(poly_eval(c, next)) <= std::abs(f)) r = next;
      }
      roots.push_back(r);
    }
  }
  poly_sort_roots(roots);
  return roots;
}

}  // namespace wanderlab
