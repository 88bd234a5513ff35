#pragma once

// Serialization for the library's data types:
//   - BlaschkeProduct        <-> JSON {phase_re, phase_im, zeros:[[re,im],..]}
//   - GridMap                <-> binary raster "WLGM" (lattice + two float64
//                                planes + defined mask), and CSV for plotting
//   - DilatationReport        -> JSON
//   - GrandOrbitSample        -> JSON lines {re, im, n, m}, and CSV
//   - RiemannMapNumeric      <-> binary "WLRM", cache-keyed by a content hash
//                                of the boundary polyline and accuracy target
//   - PolynomialModel        <-> JSON manifest referencing cached map binaries
//   - CoexistenceReport       -> JSON report
//   - FieldRaster             -> binary P6 pixmap
//
// All JSON documents carry a top-level "schema": "wandering-lab/v1" and use
// insertion-ordered objects, so identical inputs give byte-identical output.
// Binary formats store raw little-endian IEEE doubles; round-trips are exact.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wanderlab/grid_map.hpp"
#include "wanderlab/blaschke.hpp"
#include "wanderlab/model_builder.hpp"
#include "wanderlab/poly_dynamics.hpp"
#include "wanderlab/qc_numerics.hpp"
#include "wanderlab/riemann.hpp"
#include "wanderlab/util.hpp"

namespace wanderlab {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "wandering-lab/v1";

namespace detail {

// Shortest round-trip decimal form; deterministic across runs.
inline std::string fmt_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  require(static_cast<std::size_t>(is.gcount()) == n,
          "binary read: truncated stream");
}

inline void put_f64(std::ostream& os, double v) { put_bytes(os, &v, 8); }
inline void put_i32(std::ostream& os, std::int32_t v) { put_bytes(os, &v, 4); }
inline void put_u64(std::ostream& os, std::uint64_t v) { put_bytes(os, &v, 8); }
inline void put_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

inline double get_f64(std::istream& is) {
  double v;
  get_bytes(is, &v, 8);
  return v;
}
inline std::int32_t get_i32(std::istream& is) {
  std::int32_t v;
  get_bytes(is, &v, 4);
  return v;
}
inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v;
  get_bytes(is, &v, 8);
  return v;
}
inline std::uint8_t get_u8(std::istream& is) {
  std::uint8_t v;
  get_bytes(is, &v, 1);
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  put_bytes(os, s.data(), s.size());
}

inline std::string get_string(std::istream& is) {
  std::uint64_t n = get_u64(is);
  require(n <= (1ull << 32), "binary read: unreasonable string length");
  std::string s(static_cast<std::size_t>(n), '\0');
  if (n) get_bytes(is, s.data(), static_cast<std::size_t>(n));
  return s;
}

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  get_bytes(is, got, 4);
  require(std::memcmp(got, magic, 4) == 0,
          std::string("binary read: bad magic, expected ") + magic);
}

// FNV-1a over raw bytes; stable fingerprint for cache file names.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline ordered_json complex_json(cplx z) {
  return ordered_json::array({z.real(), z.imag()});
}

inline cplx complex_from_json(const ordered_json& j) {
  require(j.is_array() && j.size() == 2, "json read: complex must be [re, im]");
  return cplx(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

// --------------------------------------------------------------------------
// Blaschke products.

inline ordered_json blaschke_to_json(const BlaschkeProduct& b) {
  ordered_json j;
  j["phase_re"] = b.phase.real();
  j["phase_im"] = b.phase.imag();
  ordered_json zeros = ordered_json::array();
  for (const cplx& a : b.zeros) zeros.push_back(detail::complex_json(a));
  j["zeros"] = std::move(zeros);
  return j;
}

inline BlaschkeProduct blaschke_from_json(const ordered_json& j) {
  require(j.contains("phase_re") && j.contains("phase_im") &&
              j.contains("zeros"),
          "blaschke_from_json: need phase_re, phase_im, zeros");
  cplx phase(j["phase_re"].get<double>(), j["phase_im"].get<double>());
  std::vector<cplx> zeros;
  for (const ordered_json& z : j["zeros"])
    zeros.push_back(detail::complex_from_json(z));
  return make_blaschke(phase, zeros);
}

// --------------------------------------------------------------------------
// GridMap: binary raster and CSV.

inline void write_grid_map(std::ostream& os, const GridMap& g) {
  detail::put_bytes(os, "WLGM", 4);
  detail::put_i32(os, 1);  // format version
  detail::put_i32(os, static_cast<std::int32_t>(g.kind));
  detail::put_i32(os, g.n0);
  detail::put_i32(os, g.n1);
  detail::put_f64(os, g.a0_min);
  detail::put_f64(os, g.a0_max);
  detail::put_f64(os, g.a1_min);
  detail::put_f64(os, g.a1_max);
  detail::put_u8(os, g.periodic1 ? 1 : 0);
  const std::size_t n = g.values.size();
  require(n == static_cast<std::size_t>(g.n0) * static_cast<std::size_t>(g.n1),
          "write_grid_map: values size does not match the lattice");
  require(g.defined.size() == n,
          "write_grid_map: defined mask size does not match the lattice");
  for (const cplx& v : g.values) detail::put_f64(os, v.real());
  for (const cplx& v : g.values) detail::put_f64(os, v.imag());
  detail::put_bytes(os, g.defined.data(), n);
  detail::put_string(os, g.provenance);
}

inline GridMap read_grid_map(std::istream& is) {
  detail::expect_magic(is, "WLGM");
  std::int32_t version = detail::get_i32(is);
  require(version == 1, "read_grid_map: unsupported version");
  GridMap g;
  std::int32_t kind = detail::get_i32(is);
  require(kind == 0 || kind == 1, "read_grid_map: unknown grid kind");
  g.kind = static_cast<GridKind>(kind);
  g.n0 = detail::get_i32(is);
  g.n1 = detail::get_i32(is);
  require(g.n0 >= 1 && g.n1 >= 1 && g.n0 < (1 << 20) && g.n1 < (1 << 20),
          "read_grid_map: unreasonable lattice size");
  g.a0_min = detail::get_f64(is);
  g.a0_max = detail::get_f64(is);
  g.a1_min = detail::get_f64(is);
  g.a1_max = detail::get_f64(is);
  g.periodic1 = detail::get_u8(is) != 0;
  const std::size_t n =
      static_cast<std::size_t>(g.n0) * static_cast<std::size_t>(g.n1);
  std::vector<double> re(n), im(n);
  for (std::size_t k = 0; k < n; ++k) re[k] = detail::get_f64(is);
  for (std::size_t k = 0; k < n; ++k) im[k] = detail::get_f64(is);
  g.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) g.values[k] = cplx(re[k], im[k]);
  g.defined.resize(n);
  detail::get_bytes(is, g.defined.data(), n);
  g.provenance = detail::get_string(is);
  return g;
}

inline void write_grid_map_csv(std::ostream& os, const GridMap& g) {
  os << "a0,a1,re,im,defined\n";
  for (int i = 0; i < g.n0; ++i) {
    for (int j = 0; j < g.n1; ++j) {
      const std::size_t k = g.idx(i, j);
      os << detail::fmt_double(g.a0_min + i * g.h0()) << ','
         << detail::fmt_double(g.a1_min + j * g.h1()) << ','
         << detail::fmt_double(g.values[k].real()) << ','
         << detail::fmt_double(g.values[k].imag()) << ','
         << int(g.defined[k]) << '\n';
    }
  }
}

// --------------------------------------------------------------------------
// Dilatation reports.

inline ordered_json dilatation_report_to_json(const DilatationReport& rep) {
  ordered_json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "dilatation-report";
  j["K_max"] = rep.K_max;
  j["K_unbounded"] = rep.K_unbounded;
  j["K_quantiles"] = rep.K_quantiles;
  j["orientation_violations"] = rep.orientation_violations;
  j["excluded_nodes"] = rep.excluded_nodes;
  j["measured_nodes"] = rep.measured_nodes;
  ordered_json mu;
  mu["n0"] = rep.mu.n0;
  mu["n1"] = rep.mu.n1;
  mu["kind"] = rep.mu.kind == GridKind::cartesian ? "cartesian" : "log_polar";
  j["mu_grid"] = std::move(mu);
  return j;
}

// --------------------------------------------------------------------------
// Grand orbit samples.

inline void write_grand_orbit_jsonl(std::ostream& os,
                                    const GrandOrbitSample& sample) {
  for (const GrandOrbitPoint& p : sample.points) {
    ordered_json j;
    j["re"] = p.value.real();
    j["im"] = p.value.imag();
    j["n"] = p.n;
    j["m"] = p.m;
    os << j.dump() << '\n';
  }
}

inline void write_points_csv(std::ostream& os,
                             const std::vector<GrandOrbitPoint>& points) {
  os << "re,im,n,m\n";
  for (const GrandOrbitPoint& p : points)
    os << detail::fmt_double(p.value.real()) << ','
       << detail::fmt_double(p.value.imag()) << ',' << p.n << ',' << p.m
       << '\n';
}

inline void write_polyline_csv(std::ostream& os,
                               const std::vector<cplx>& points) {
  os << "re,im\n";
  for (const cplx& z : points)
    os << detail::fmt_double(z.real()) << ',' << detail::fmt_double(z.imag())
       << '\n';
}

// --------------------------------------------------------------------------
// Riemann map caches.

// Cache key: content hash of the boundary polyline and the accuracy target.
inline std::string riemann_cache_key(const std::vector<cplx>& boundary,
                                     double accuracy_target) {
  std::uint64_t h = detail::fnv1a(&accuracy_target, sizeof(double));
  for (const cplx& z : boundary) {
    double re = z.real(), im = z.imag();
    h = detail::fnv1a(&re, 8, h);
    h = detail::fnv1a(&im, 8, h);
  }
  std::array<char, 17> buf{};
  static const char* hex = "0123456789abcdef";
  for (int k = 0; k < 16; ++k)
    buf[k] = hex[(h >> (60 - 4 * k)) & 0xF];
  return std::string(buf.data(), 16);
}

inline void write_riemann_map(std::ostream& os, const RiemannMapNumeric& m) {
  detail::put_bytes(os, "WLRM", 4);
  detail::put_i32(os, 1);  // format version
  detail::put_u64(os, m.boundary.size());
  for (const cplx& z : m.boundary) {
    detail::put_f64(os, z.real());
    detail::put_f64(os, z.imag());
  }
  detail::put_f64(os, m.z0.real());
  detail::put_f64(os, m.z0.imag());
  detail::put_f64(os, m.z1.real());
  detail::put_f64(os, m.z1.imag());
  detail::put_u64(os, m.steps.size());
  for (const ZipStep& st : m.steps) {
    detail::put_f64(os, st.c);
    detail::put_f64(os, st.s);
  }
  detail::put_i32(os, m.quadrant);
  detail::put_f64(os, m.auto_a.real());
  detail::put_f64(os, m.auto_a.imag());
  detail::put_f64(os, m.auto_phase.real());
  detail::put_f64(os, m.auto_phase.imag());
  detail::put_f64(os, m.accuracy);
  detail::put_f64(os, m.accuracy_target);
  detail::put_u8(os, m.accuracy_met ? 1 : 0);
}

inline RiemannMapNumeric read_riemann_map(std::istream& is) {
  detail::expect_magic(is, "WLRM");
  std::int32_t version = detail::get_i32(is);
  require(version == 1, "read_riemann_map: unsupported version");
  RiemannMapNumeric m;
  std::uint64_t nb = detail::get_u64(is);
  require(nb >= 3 && nb <= (1ull << 24),
          "read_riemann_map: unreasonable boundary size");
  m.boundary.resize(static_cast<std::size_t>(nb));
  for (cplx& z : m.boundary) {
    double re = detail::get_f64(is), im = detail::get_f64(is);
    z = cplx(re, im);
  }
  {
    double re = detail::get_f64(is), im = detail::get_f64(is);
    m.z0 = cplx(re, im);
    re = detail::get_f64(is);
    im = detail::get_f64(is);
    m.z1 = cplx(re, im);
  }
  std::uint64_t ns = detail::get_u64(is);
  require(ns <= (1ull << 24), "read_riemann_map: unreasonable step count");
  m.steps.resize(static_cast<std::size_t>(ns));
  for (ZipStep& st : m.steps) {
    st.c = detail::get_f64(is);
    st.s = detail::get_f64(is);
  }
  m.quadrant = detail::get_i32(is);
  require(m.quadrant == 1 || m.quadrant == 2,
          "read_riemann_map: quadrant must be 1 or 2");
  {
    double re = detail::get_f64(is), im = detail::get_f64(is);
    m.auto_a = cplx(re, im);
    re = detail::get_f64(is);
    im = detail::get_f64(is);
    m.auto_phase = cplx(re, im);
  }
  m.accuracy = detail::get_f64(is);
  m.accuracy_target = detail::get_f64(is);
  m.accuracy_met = detail::get_u8(is) != 0;
  return m;
}

// --------------------------------------------------------------------------
// Polynomial models: JSON manifest + per-layer map caches in maps/.

inline ordered_json model_manifest_json(
    const PolynomialModel& model, const std::vector<std::string>& map_files) {
  require(map_files.size() == model.layers.size(),
          "model_manifest_json: one map file per layer");
  ordered_json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "polynomial-model";
  ordered_json coeffs = ordered_json::array();
  for (const cplx& c : model.P.c) coeffs.push_back(detail::complex_json(c));
  j["polynomial"] = std::move(coeffs);
  j["R"] = model.R;
  j["depth"] = model.depth();
  j["accuracy_warning"] = model.accuracy_warning;
  ordered_json layers = ordered_json::array();
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const ModelLayer& layer = model.layers[k];
    ordered_json lj;
    lj["level_index"] = static_cast<int>(k);
    lj["scale"] = layer.scale;
    lj["level"] = layer.domain.level;
    lj["level_residual"] = layer.domain.level_residual;
    lj["map_file"] = map_files[k];
    lj["accuracy"] = layer.map.accuracy;
    lj["accuracy_met"] = layer.map.accuracy_met;
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  ordered_json products = ordered_json::array();
  for (const BlaschkeProduct& b : model.bs)
    products.push_back(blaschke_to_json(b));
  j["products"] = std::move(products);
  j["residuals"] = model.residuals;
  return j;
}

// Writes dir/model.json and dir/maps/<hash>.wlrm; returns the manifest.
inline ordered_json save_model(const PolynomialModel& model,
                               const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "maps");
  std::vector<std::string> files;
  for (const ModelLayer& layer : model.layers) {
    std::string key =
        riemann_cache_key(layer.map.boundary, layer.map.accuracy_target);
    std::string rel = "maps/" + key + ".wlrm";
    std::ofstream os(dir / rel, std::ios::binary);
    require(os.good(), "save_model: cannot open " + (dir / rel).string());
    write_riemann_map(os, layer.map);
    require(os.good(), "save_model: write failed for " + rel);
    files.push_back(rel);
  }
  ordered_json manifest = model_manifest_json(model, files);
  std::ofstream os(dir / "model.json");
  require(os.good(), "save_model: cannot open model.json");
  os << manifest.dump(2) << '\n';
  require(os.good(), "save_model: manifest write failed");
  return manifest;
}

// Rebuilds a PolynomialModel from save_model output. Domains are re-traced
// from the polynomial (cheap); maps come back bit-exact from the caches.
inline PolynomialModel load_model(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream ms(dir / "model.json");
  require(ms.good(), "load_model: cannot open model.json");
  ordered_json manifest = ordered_json::parse(ms);
  require(manifest.value("kind", "") == std::string("polynomial-model"),
          "load_model: not a model manifest");

  PolynomialModel model;
  std::vector<cplx> coeffs;
  for (const ordered_json& c : manifest.at("polynomial"))
    coeffs.push_back(detail::complex_from_json(c));
  model.P = make_polynomial(coeffs);
  model.R = manifest.at("R").get<double>();
  model.accuracy_warning = manifest.at("accuracy_warning").get<bool>();
  for (const ordered_json& lj : manifest.at("layers")) {
    ModelLayer layer;
    int n = lj.at("level_index").get<int>();
    layer.scale = lj.at("scale").get<double>();
    std::ifstream is(dir / lj.at("map_file").get<std::string>(),
                     std::ios::binary);
    require(is.good(), "load_model: missing map cache " +
                           lj.at("map_file").get<std::string>());
    layer.map = read_riemann_map(is);
    layer.domain = equipotential_curve(
        model.P, model.R, n, static_cast<int>(layer.map.boundary.size()));
    model.layers.push_back(std::move(layer));
  }
  for (const ordered_json& bj : manifest.at("products"))
    model.bs.push_back(blaschke_from_json(bj));
  model.residuals = manifest.at("residuals").get<std::vector<double>>();
  require(model.bs.size() + 1 == model.layers.size(),
          "load_model: layer/product count mismatch");
  return model;
}

// --------------------------------------------------------------------------
// Coexistence reports.

inline ordered_json discreteness_report_json(const DiscretenessReport& rep) {
  ordered_json j;
  j["depths"] = rep.depths;
  j["min_pairwise"] = rep.min_pairwise;
  j["nn_median"] = rep.nn_median;
  j["level_alignment"] = rep.level_alignment;
  j["sample_size_full"] = rep.sample_size_full;
  j["verdict"] = rep.verdict;
  return j;
}

inline ordered_json coexistence_report_json(const CoexistenceReport& rep) {
  ordered_json j;
  j["schema"] = kSchemaTag;
  j["kind"] = "coexistence-report";
  j["lambda"] = detail::complex_json(rep.lambda);
  j["R"] = rep.R;
  j["depth"] = rep.depth;
  j["figure_only"] = rep.figure_only;
  j["basin_probe"] = detail::complex_json(rep.basin_probe);
  j["escaping_probe"] = detail::complex_json(rep.escaping_probe);
  j["basin"] = discreteness_report_json(rep.basin_report);
  j["escaping"] = discreteness_report_json(rep.escaping_report);
  j["model_residuals"] = rep.model_residuals;
  ordered_json zeros = ordered_json::array();
  for (const std::vector<cplx>& zs : rep.model_zeros) {
    ordered_json row = ordered_json::array();
    for (const cplx& z : zs) row.push_back(detail::complex_json(z));
    zeros.push_back(std::move(row));
  }
  j["model_zeros"] = std::move(zeros);
  j["basin_scatter_size"] = rep.basin_scatter.points.size();
  j["escaping_scatter_size"] = rep.escaping_scatter.points.size();
  return j;
}

// --------------------------------------------------------------------------
// Field rasters: binary P6 pixmap.

// Deterministic shading: bounded pixels in near-black blue, escaping pixels
// on a warm ramp by normalized Green value with a mild gamma.
inline void write_field_raster_p6(std::ostream& os, const FieldRaster& f) {
  require(f.nx >= 1 && f.ny >= 1, "write_field_raster_p6: empty raster");
  require(f.green.size() ==
              static_cast<std::size_t>(f.nx) * static_cast<std::size_t>(f.ny),
          "write_field_raster_p6: green plane size mismatch");
  double g_max = 0.0;
  for (double g : f.green) g_max = std::max(g_max, g);
  if (g_max <= 0.0) g_max = 1.0;
  os << "P6\n" << f.nx << ' ' << f.ny << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(f.nx) * 3);
  for (int j = f.ny - 1; j >= 0; --j) {  // top row first in the image
    for (int i = 0; i < f.nx; ++i) {
      const std::size_t k =
          static_cast<std::size_t>(j) * static_cast<std::size_t>(f.nx) +
          static_cast<std::size_t>(i);
      unsigned char r, g, b;
      if (f.iterations[k] < 0) {
        r = 12;
        g = 12;
        b = 38;
      } else {
        double t = std::pow(f.green[k] / g_max, 0.35);
        r = static_cast<unsigned char>(40.0 + 215.0 * t);
        g = static_cast<unsigned char>(30.0 + 170.0 * t);
        b = static_cast<unsigned char>(60.0 + 60.0 * (1.0 - t));
      }
      row[3 * static_cast<std::size_t>(i)] = r;
      row[3 * static_cast<std::size_t>(i) + 1] = g;
      row[3 * static_cast<std::size_t>(i) + 2] = b;
    }
    detail::put_bytes(os, row.data(), row.size());
  }
}

}  // namespace wanderlab
