#pragma once

// Named Blaschke-sequence presets, addressable from the command line and
// config files:
//
//   power:<d>                      every member is z^d
//   constant-zero-list:<z1,z2,..>  constant member with the given zeros
//                                  (first zero must be 0; entries like
//                                  0.5, -0.3+0.1i, 0.2i)
//   prop54:default                 alternating power/rotation-like fixture
//                                  with schedule a_n = 1 - 1/n
//   model:<c0,c1,..>[;R=..][;n=..][;acc=..]
//                                  conjugacy products of the polynomial with
//                                  ascending coefficients c0..cd (defaults
//                                  R=4, n=8, acc=1e-3); indices past the last
//                                  built product repeat it

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "wanderlab/blaschke.hpp"
#include "wanderlab/blaschke_seq.hpp"
#include "wanderlab/model_builder.hpp"
#include "wanderlab/util.hpp"

namespace wanderlab {

namespace detail {

inline std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t') out.push_back(c);
  return out;
}

inline double parse_real_token(const std::string& tok, const std::string& what) {
  require(!tok.empty(), "parse: empty number in " + what);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw precondition_error("parse: bad number '" + tok + "' in " + what);
  }
  require(pos == tok.size(), "parse: trailing junk in number '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    if (p == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

}  // namespace detail

// Accepts "a", "bi", "a+bi", "a-bi" with decimal or scientific parts.
inline cplx parse_complex(const std::string& text) {
  std::string s = detail::strip_spaces(text);
  require(!s.empty(), "parse_complex: empty input");
  if (s.back() != 'i' && s.back() != 'I')
    return cplx(detail::parse_real_token(s, "complex literal"), 0.0);

  std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that neither leads the string nor follows an
  // exponent marker; everything before it is the real part.
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') &&
        body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  double re = 0.0;
  std::string imag = body;
  if (split != std::string::npos) {
    re = detail::parse_real_token(body.substr(0, split), "complex literal");
    imag = body.substr(split);
  }
  double im;
  if (imag.empty() || imag == "+")
    im = 1.0;
  else if (imag == "-")
    im = -1.0;
  else
    im = detail::parse_real_token(imag, "complex literal");
  return cplx(re, im);
}

inline std::vector<cplx> parse_complex_list(const std::string& text) {
  std::vector<cplx> out;
  for (const std::string& tok : detail::split_on(text, ','))
    out.push_back(parse_complex(tok));
  return out;
}

inline std::vector<std::string> sequence_preset_names() {
  return {"power:<d>", "constant-zero-list:<z1,z2,..>", "prop54:default",
          "model:<c0,c1,..>[;R=..][;n=..][;acc=..]"};
}

inline BlaschkeSequence make_sequence_preset(const std::string& spec) {
  std::string s = detail::strip_spaces(spec);
  std::size_t colon = s.find(':');
  std::string name = s.substr(0, colon == std::string::npos ? s.size() : colon);
  std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);

  if (name == "power") {
    double dv = detail::parse_real_token(arg, "power preset degree");
    int d = static_cast<int>(dv);
    require(dv == d && d >= 2 && d <= 64,
            "sequence preset: power degree must be an integer in [2, 64]");
    BlaschkeProduct b = blaschke_power(d);
    BlaschkeSequence seq;
    seq.provider = [b](int) { return b; };
    seq.degree_bound = d;
    return seq;
  }

  if (name == "constant-zero-list") {
    std::vector<cplx> zeros = parse_complex_list(arg);
    require(zeros.size() >= 2,
            "sequence preset: constant-zero-list needs at least two zeros");
    require(zeros[0] == cplx(0.0, 0.0),
            "sequence preset: first zero must be 0 (members fix the origin)");
    BlaschkeProduct b = make_blaschke(cplx(1.0, 0.0), zeros);
    BlaschkeSequence seq;
    seq.provider = [b](int) { return b; };
    seq.degree_bound = b.degree();
    double r = 0.0;
    for (const cplx& a : zeros) r = std::max(r, std::abs(a));
    if (r > 0.0) seq.declared_radius = std::min(0.95, r + 0.25 * (1.0 - r));
    return seq;
  }

  if (name == "prop54") {
    require(arg.empty() || arg == "default",
            "sequence preset: unknown prop54 schedule '" + arg +
                "' (available: default)");
    return prop54_fixture([](int n) { return 1.0 - 1.0 / n; });
  }

  if (name == "model") {
    std::vector<std::string> parts = detail::split_on(arg, ';');
    require(!parts.empty() && !parts[0].empty(),
            "sequence preset: model needs a coefficient list");
    std::vector<cplx> coeffs = parse_complex_list(parts[0]);
    double R = 4.0, acc = 1e-3;
    int n_max = 8;
    for (std::size_t k = 1; k < parts.size(); ++k) {
      std::size_t eq = parts[k].find('=');
      require(eq != std::string::npos,
              "sequence preset: model option '" + parts[k] +
                  "' is not key=value");
      std::string key = parts[k].substr(0, eq);
      std::string val = parts[k].substr(eq + 1);
      if (key == "R")
        R = detail::parse_real_token(val, "model preset R");
      else if (key == "n") {
        double nv = detail::parse_real_token(val, "model preset n");
        n_max = static_cast<int>(nv);
        require(nv == n_max, "sequence preset: model n must be an integer");
      } else if (key == "acc")
        acc = detail::parse_real_token(val, "model preset acc");
      else
        throw precondition_error("sequence preset: unknown model option '" +
                                 key + "' (available: R, n, acc)");
    }
    PolynomialModel model = build_model(make_polynomial(coeffs), R, n_max, acc);
    std::vector<BlaschkeProduct> bs = model.bs;
    int bound = 2;
    for (const BlaschkeProduct& b : bs) bound = std::max(bound, b.degree());
    BlaschkeSequence seq;
    seq.provider = [bs](int n) {
      std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n),
                                            bs.size() - 1);
      return bs[k];
    };
    seq.degree_bound = bound;
    return seq;
  }

  throw precondition_error(
      "sequence preset: unknown name '" + name +
      "' (available: power, constant-zero-list, prop54, model)");
}

}  // namespace wanderlab
