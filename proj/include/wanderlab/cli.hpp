#pragma once

// Command-line front door. Each subcommand drives exactly one library
// pipeline and reports as JSON (schema "wandering-lab/v1") to --out or
// standard output; figure subcommands write P6 pixmaps and CSV point clouds.
//
// Exit codes: 0 success, 2 precondition/validation failure (diagnostic on the
// error stream), 64 unknown flags / bad usage.
//
// Config files: --config FILE reads a flat key=value file (# comments);
// explicit command-line flags override config values.  The environment
// variable WANDERLAB_OUT_DIR, when set, prefixes every relative output path.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "wanderlab/blaschke.hpp"
#include "wanderlab/blaschke_seq.hpp"
#include "wanderlab/disk_geometry.hpp"
#include "wanderlab/gluing.hpp"
#include "wanderlab/io_json.hpp"
#include "wanderlab/model_builder.hpp"
#include "wanderlab/poly_dynamics.hpp"
#include "wanderlab/riemann.hpp"
#include "wanderlab/sequence_presets.hpp"
#include "wanderlab/util.hpp"

namespace wanderlab {

namespace cli_detail {

namespace fs = std::filesystem;

// WANDERLAB_OUT_DIR prefixes relative output paths; "-" stays standard out.
inline fs::path resolve_out(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  const char* base = std::getenv("WANDERLAB_OUT_DIR");
  if (base == nullptr || *base == '\0') return p;
  return fs::path(base) / p;
}

inline void write_text(const std::string& out_spec, const std::string& text,
                       std::ostream& stdout_stream) {
  if (out_spec == "-") {
    stdout_stream << text;
    return;
  }
  fs::path p = resolve_out(out_spec);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  require(os.good(), "cannot open output file " + p.string());
  os << text;
  require(os.good(), "write failed for " + p.string());
}

inline void emit_json(const std::string& out_spec, const ordered_json& j,
                      std::ostream& stdout_stream) {
  write_text(out_spec, j.dump(2) + "\n", stdout_stream);
}

inline Polynomial parse_poly(const std::string& spec) {
  return make_polynomial(parse_complex_list(spec));
}

inline std::vector<cplx> read_points_csv(const fs::path& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open point file " + path.string());
  std::vector<cplx> pts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.find_first_of("0123456789") == std::string::npos) continue;
    std::size_t comma = line.find(',');
    require(comma != std::string::npos,
            "point file " + path.string() + ": rows must be re,im");
    pts.push_back(cplx(detail::parse_real_token(line.substr(0, comma), "csv"),
                       detail::parse_real_token(line.substr(comma + 1), "csv")));
  }
  require(pts.size() >= 3, "point file " + path.string() + ": too few rows");
  return pts;
}

// Deterministic worker pool: the body writes to index-addressed slots, so
// results do not depend on the thread count or schedule.
inline void parallel_for(int threads, long count,
                         const std::function<void(long)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&next, count, &body] {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  for (std::thread& th : pool) th.join();
}

// Flat key=value config reader.
inline std::vector<std::pair<std::string, std::string>> read_config(
    const fs::path& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  while (std::getline(is, line)) {
    std::string s = detail::strip_spaces(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    require(eq != std::string::npos && eq > 0,
            "config file: line '" + line + "' is not key=value");
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return kv;
}

inline ordered_json region_json(const ClipRegion& region) {
  ordered_json j;
  j["center"] = detail::complex_json(region.center);
  j["radius"] = region.radius;
  return j;
}

inline cplx iterate_poly(const Polynomial& p, cplx z, int n) {
  for (int k = 0; k < n; ++k) z = poly_eval(p.c, z);
  return z;
}

}  // namespace cli_detail

inline int cli_run(std::vector<std::string> args,
                   std::ostream& out_stream = std::cout,
                   std::ostream& err_stream = std::cerr) {
  namespace cd = cli_detail;

  // Peel off --config before CLI11 sees the line, so config values can be
  // injected as defaults with command-line flags keeping precedence.
  std::string config_path;
  for (std::size_t k = 0; k < args.size();) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) {
        err_stream << "error: --config needs a file path\n";
        return 64;
      }
      config_path = args[k + 1];
      args.erase(args.begin() + static_cast<long>(k),
                 args.begin() + static_cast<long>(k) + 2);
    } else if (args[k].rfind("--config=", 0) == 0) {
      config_path = args[k].substr(9);
      args.erase(args.begin() + static_cast<long>(k));
    } else {
      ++k;
    }
  }

  CLI::App app{"wandering-domain laboratory: disk dynamics pipelines"};
  app.require_subcommand(0, 1);

  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--threads", threads,
                 "worker pool size (results are thread-count independent)");

  // ---- schwarz-check ----
  auto* sc = app.add_subcommand(
      "schwarz-check", "randomized uniform-Schwarz audit on Blaschke products");
  long sc_trials = 1000;
  std::uint64_t sc_seed = 7;
  std::string sc_out = "-";
  sc->add_option("--trials", sc_trials, "number of random products");
  sc->add_option("--seed", sc_seed, "RNG seed");
  sc->add_option("--out", sc_out, "report path or - for stdout");

  // ---- blaschke-info ----
  auto* bi = app.add_subcommand("blaschke-info",
                                "inspect one Blaschke product from its data");
  std::string bi_zeros, bi_phase = "1", bi_out = "-";
  bi->add_option("--zeros", bi_zeros,
                 "comma list of zeros (a leading 0 marks a normalized product)")
      ->required();
  bi->add_option("--phase", bi_phase, "unimodular phase factor");
  bi->add_option("--out", bi_out, "report path or - for stdout");

  // ---- seq-certify ----
  auto* cert = app.add_subcommand(
      "seq-certify", "finite-horizon uniform-hyperbolicity certificate");
  std::string cert_seq, cert_out = "-";
  int cert_n_max = 50;
  double cert_margin = 0.05;
  cert->add_option("--seq", cert_seq, "sequence preset")->required();
  cert->add_option("--n-max", cert_n_max, "certification horizon");
  cert->add_option("--margin", cert_margin, "radius margin in (0,1)");
  cert->add_option("--out", cert_out, "report path or - for stdout");

  // ---- seq-rate ----
  auto* rate = app.add_subcommand(
      "seq-rate", "contraction rate fit and multiplier average");
  std::string rate_seq, rate_z = "0.5", rate_z2 = "0.25+0.25i",
              rate_out = "-";
  int rate_n_max = 40;
  rate->add_option("--seq", rate_seq, "sequence preset")->required();
  rate->add_option("--z", rate_z, "first start point (inside the disk)");
  rate->add_option("--z2", rate_z2, "second start point");
  rate->add_option("--n-max", rate_n_max, "trace length");
  rate->add_option("--out", rate_out, "report path or - for stdout");

  // ---- glue ----
  auto* gl = app.add_subcommand(
      "glue", "interpolating gluing maps with uniform-K measurement");
  std::string gl_seq, gl_out = "-", gl_maps_dir;
  double gl_r = 0.6;
  int gl_n_max = 2, gl_lift = 1, gl_angular = 256;
  gl->add_option("--seq", gl_seq, "sequence preset")->required();
  gl->add_option("--r", gl_r, "identity-zone radius in (0,1)");
  gl->add_option("--n-max", gl_n_max, "last sequence index to glue");
  gl->add_option("--lift-depth", gl_lift, "preimage generations per map");
  gl->add_option("--angular", gl_angular, "angular chart nodes (>= 64)");
  gl->add_option("--maps-dir", gl_maps_dir, "write assembled charts here");
  gl->add_option("--out", gl_out, "report path or - for stdout");

  // ---- bottcher ----
  auto* bo = app.add_subcommand("bottcher",
                                "escape potential and conjugacy coordinate");
  std::string bo_poly, bo_z, bo_out = "-";
  bo->add_option("--poly", bo_poly, "ascending coefficients c0,c1,..")
      ->required();
  bo->add_option("--z", bo_z, "evaluation point")->required();
  bo->add_option("--out", bo_out, "report path or - for stdout");

  // ---- equipotential ----
  auto* eq = app.add_subcommand("equipotential",
                                "trace one equipotential level curve");
  std::string eq_poly, eq_out = "-", eq_csv;
  double eq_R = 2.0;
  int eq_n = 0, eq_samples = 512;
  eq->add_option("--poly", eq_poly, "ascending coefficients")->required();
  eq->add_option("--R", eq_R, "base level radius (> 1)");
  eq->add_option("--n", eq_n, "level index (level = d^n log R)");
  eq->add_option("--samples", eq_samples, "boundary sample count");
  eq->add_option("--boundary-csv", eq_csv, "write the polyline here");
  eq->add_option("--out", eq_out, "report path or - for stdout");

  // ---- riemann-map ----
  auto* rm = app.add_subcommand("riemann-map",
                                "uniformize a Jordan boundary polyline");
  std::string rm_csv, rm_out = "-", rm_cache;
  double rm_accuracy = 1e-3;
  rm->add_option("--boundary-csv", rm_csv, "input polyline re,im rows")
      ->required();
  rm->add_option("--accuracy", rm_accuracy, "boundary accuracy target");
  rm->add_option("--cache-dir", rm_cache, "write the map cache here");
  rm->add_option("--out", rm_out, "report path or - for stdout");

  // ---- model-build ----
  auto* mb = app.add_subcommand(
      "model-build", "conjugate a polynomial to a Blaschke family");
  std::string mb_poly, mb_out = "model-out";
  double mb_R = 4.0, mb_accuracy = 1e-3;
  int mb_n_max = 8, mb_samples = 512;
  mb->add_option("--poly", mb_poly, "ascending coefficients, P(0) = 0")
      ->required();
  mb->add_option("--R", mb_R, "base equipotential radius (> 1)");
  mb->add_option("--n-max", mb_n_max, "model depth");
  mb->add_option("--accuracy", mb_accuracy, "chart accuracy target");
  mb->add_option("--samples", mb_samples, "boundary samples per level");
  mb->add_option("--out", mb_out, "output directory");

  // ---- grand-orbit ----
  auto* go = app.add_subcommand("grand-orbit",
                                "clipped grand-orbit sample as JSON lines");
  std::string go_poly, go_base, go_center = "0", go_out = "-", go_csv,
              go_meta;
  int go_n = 4, go_m = 4;
  double go_radius = 2.0;
  std::size_t go_cap = 1000000;
  go->add_option("--poly", go_poly, "ascending coefficients")->required();
  go->add_option("--base", go_base, "base point")->required();
  go->add_option("--n", go_n, "forward depth");
  go->add_option("--m", go_m, "backward depth");
  go->add_option("--center", go_center, "clip region center");
  go->add_option("--radius", go_radius, "clip region radius");
  go->add_option("--node-cap", go_cap, "backward tree node budget");
  go->add_option("--csv", go_csv, "also write points as CSV here");
  go->add_option("--meta", go_meta, "also write sample metadata JSON here");
  go->add_option("--out", go_out, "JSON-lines path or - for stdout");

  // ---- discreteness ----
  auto* di = app.add_subcommand(
      "discreteness", "grand-orbit discreteness diagnostic at a base point");
  std::string di_poly, di_base, di_center = "0", di_out = "-";
  int di_depth = 8;
  double di_radius = 2.0, di_exclusion = -1.0;
  std::size_t di_cap = 1000000;
  di->add_option("--poly", di_poly, "ascending coefficients")->required();
  di->add_option("--base", di_base, "probe point")->required();
  di->add_option("--depth", di_depth, "full probe depth (>= 2)");
  di->add_option("--center", di_center, "analysis region center");
  di->add_option("--radius", di_radius, "analysis region radius");
  di->add_option("--marker-exclusion", di_exclusion,
                 "marker exclusion distance; negative = 2% of radius");
  di->add_option("--node-cap", di_cap, "backward tree node budget");
  di->add_option("--out", di_out, "report path or - for stdout");

  // ---- transport ----
  auto* tr = app.add_subcommand(
      "transport", "carry a grand-orbit relation along a parameter path");
  std::string tr_poly, tr_l0, tr_l1, tr_path, tr_z, tr_out = "-";
  int tr_n = 0, tr_m = 0, tr_steps = 16;
  tr->add_option("--poly", tr_poly, "ascending coefficients")->required();
  tr->add_option("--lambda0", tr_l0, "start parameter")->required();
  tr->add_option("--z", tr_z, "transported point at lambda0")->required();
  tr->add_option("--n", tr_n, "forward depth of z");
  tr->add_option("--m", tr_m, "forward depth of lambda");
  tr->add_option("--lambda1", tr_l1, "end parameter (straight segment)");
  tr->add_option("--steps", tr_steps, "segment subdivisions (>= 1)");
  tr->add_option("--path", tr_path, "explicit comma list overriding lambda1");
  tr->add_option("--out", tr_out, "report path or - for stdout");

  // ---- template-check ----
  auto* tc = app.add_subcommand(
      "template-check", "lattice and semiconjugacy identities of the models");
  std::string tc_out = "-";
  int tc_d = 2;
  long tc_trials = 100;
  std::uint64_t tc_seed = 7;
  tc->add_option("--d", tc_d, "degree parameter (>= 2)");
  tc->add_option("--trials", tc_trials, "random semiconjugacy samples");
  tc->add_option("--seed", tc_seed, "RNG seed");
  tc->add_option("--out", tc_out, "report path or - for stdout");

  // ---- coexistence ----
  auto* co = app.add_subcommand(
      "coexistence",
      "discrete and indiscrete grand orbits for the same quadratic");
  std::string co_lambda, co_out = "coexistence-out";
  int co_depth = 8;
  double co_accuracy = 1e-3;
  bool co_figure_only = false;
  co->add_option("--lambda", co_lambda, "multiplier at the origin")
      ->required();
  co->add_option("--depth", co_depth, "probe depth (>= 2)");
  co->add_option("--accuracy", co_accuracy, "model chart accuracy");
  co->add_flag("--figure-only", co_figure_only,
               "render figures without verdict claims");
  co->add_option("--out", co_out, "output directory");

  // ---- render-julia ----
  auto* rj = app.add_subcommand("render-julia",
                                "escape-time raster of the filled set");
  std::string rj_poly, rj_out = "julia.ppm", rj_csv, rj_json = "-";
  double rj_x0 = -2.0, rj_x1 = 2.0, rj_y0 = -2.0, rj_y1 = 2.0;
  int rj_nx = 512, rj_ny = 512, rj_iter = 256;
  rj->add_option("--poly", rj_poly, "ascending coefficients")->required();
  rj->add_option("--xmin", rj_x0, "left edge");
  rj->add_option("--xmax", rj_x1, "right edge");
  rj->add_option("--ymin", rj_y0, "bottom edge");
  rj->add_option("--ymax", rj_y1, "top edge");
  rj->add_option("--nx", rj_nx, "horizontal pixels");
  rj->add_option("--ny", rj_ny, "vertical pixels");
  rj->add_option("--max-iter", rj_iter, "escape iteration budget");
  rj->add_option("--green-csv", rj_csv, "write per-pixel potential CSV here");
  rj->add_option("--out", rj_out, "P6 image path");
  rj->add_option("--json", rj_json, "summary path or - for stdout");

  // Command-line flags override config values: config tokens are injected
  // before the user's flags and every option keeps only its last value.
  for (CLI::App* sub : app.get_subcommands({}))
    for (CLI::Option* opt : sub->get_options())
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  for (CLI::Option* opt : app.get_options())
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  if (!config_path.empty()) {
    std::string sub_name;
    for (const std::string& a : args)
      if (!a.empty() && a[0] != '-') {
        sub_name = a;
        break;
      }
    if (sub_name.empty()) {
      err_stream << "error: --config requires a subcommand\n";
      return 64;
    }
    CLI::App* sub = nullptr;
    try {
      sub = app.get_subcommand(sub_name);
    } catch (const CLI::OptionNotFound&) {
      err_stream << "error: unknown subcommand '" << sub_name << "'\n";
      return 64;
    }
    std::vector<std::pair<std::string, std::string>> kv;
    try {
      kv = cd::read_config(cd::fs::path(config_path));
    } catch (const precondition_error& e) {
      err_stream << "error: " << e.what() << '\n';
      return 2;
    }
    std::set<std::string> known;
    for (CLI::Option* opt : sub->get_options())
      for (const std::string& name : opt->get_lnames()) known.insert(name);
    for (CLI::Option* opt : app.get_options())
      for (const std::string& name : opt->get_lnames()) known.insert(name);
    std::vector<std::string> injected;
    for (const auto& [key, value] : kv) {
      if (known.find(key) == known.end()) {
        err_stream << "error: config key '" << key << "' is not an option of "
                   << sub_name << '\n';
        return 2;
      }
      injected.push_back("--" + key + "=" + value);
    }
    // Place right after the subcommand token.
    std::vector<std::string> merged;
    bool placed = false;
    for (const std::string& a : args) {
      merged.push_back(a);
      if (!placed && a == sub_name) {
        merged.insert(merged.end(), injected.begin(), injected.end());
        placed = true;
      }
    }
    args = std::move(merged);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out_stream << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err_stream << "error: " << e.what() << '\n' << app.help();
    return 64;
  }

  try {
    require(threads >= 1, "--threads must be >= 1");

    if (sc->parsed()) {
      // Random normalized products with zeros in the r-disk; the uniform
      // Schwarz bound must hold sample by sample.
      const double radii[3] = {0.3, 0.6, 0.9};
      std::vector<double> slack(static_cast<std::size_t>(sc_trials), 0.0);
      cd::parallel_for(threads, sc_trials, [&](long t) {
        RngStream rng(RngStream::derive(sc_seed, static_cast<std::uint64_t>(t)));
        int d = 2 + static_cast<int>(rng.integer() % 4);
        double r = radii[rng.integer() % 3];
        std::vector<cplx> zeros = {cplx(0.0, 0.0)};
        for (int k = 1; k < d; ++k) zeros.push_back(rng.disk(r));
        BlaschkeProduct b =
            make_blaschke(std::polar(1.0, 2.0 * pi * rng.unit()), zeros);
        double rho = 0.0;
        for (const cplx& a : zeros) rho = std::max(rho, std::abs(a));
        cplx z = rng.disk(r);
        double c = uniform_schwarz_bound(rho, r);
        slack[static_cast<std::size_t>(t)] =
            std::abs(eval(b, z)) - c * std::abs(z);
      });
      long violations = 0;
      double worst = -1e300;
      for (double s : slack) {
        if (s > 1e-12) ++violations;
        worst = std::max(worst, s);
      }
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "schwarz-check";
      j["trials"] = sc_trials;
      j["seed"] = sc_seed;
      j["radii"] = {0.3, 0.6, 0.9};
      j["violations"] = violations;
      j["worst_slack"] = worst;
      cd::emit_json(sc_out, j, out_stream);
      return 0;
    }

    if (bi->parsed()) {
      BlaschkeProduct b =
          make_blaschke(parse_complex(bi_phase), parse_complex_list(bi_zeros));
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "blaschke-info";
      j["degree"] = b.degree();
      j["normalized"] = b.normalized;
      j["phase"] = detail::complex_json(b.phase);
      ordered_json zeros = ordered_json::array();
      for (const cplx& a : b.zeros) zeros.push_back(detail::complex_json(a));
      j["zeros"] = std::move(zeros);
      std::vector<double> moduli;
      for (const cplx& a : b.zeros) moduli.push_back(std::abs(a));
      std::sort(moduli.begin(), moduli.end());
      j["zero_moduli_sorted"] = moduli;
      if (b.normalized)
        j["multiplier"] = detail::complex_json(multiplier(b));
      ordered_json crit = ordered_json::array();
      for (const DiskPoint& c : critical_points(b))
        crit.push_back(detail::complex_json(c.value));
      j["critical_points"] = std::move(crit);
      cd::emit_json(bi_out, j, out_stream);
      return 0;
    }

    if (cert->parsed()) {
      BlaschkeSequence seq = make_sequence_preset(cert_seq);
      HyperbolicityCertificate c =
          certify_uniform_hyperbolicity(seq, cert_n_max, cert_margin);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "hyperbolicity-certificate";
      j["preset"] = cert_seq;
      j["n_max"] = c.n_max;
      j["margin"] = c.margin;
      j["r_est"] = c.r_est;
      j["s_est"] = c.s_est;
      j["C_est"] = c.C_est;
      j["uniformly_hyperbolic"] = c.uniformly_hyperbolic;
      j["verdict"] = c.verdict;
      j["witness_r"] = {c.witness_r_n, c.witness_r_k};
      j["witness_s"] = {c.witness_s_n, c.witness_s_k};
      j["witness_C_n"] = c.witness_C_n;
      cd::emit_json(cert_out, j, out_stream);
      return 0;
    }

    if (rate->parsed()) {
      BlaschkeSequence seq = make_sequence_preset(rate_seq);
      cplx z = parse_complex(rate_z), z2 = parse_complex(rate_z2);
      double fit = measure_contraction_rate(seq, DiskPoint(z), DiskPoint(z2),
                                            rate_n_max);
      double avg = contraction_average(seq, rate_n_max);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "contraction-rate";
      j["preset"] = rate_seq;
      j["z"] = detail::complex_json(z);
      j["z2"] = detail::complex_json(z2);
      j["n_max"] = rate_n_max;
      j["fitted_rate"] = fit;
      j["multiplier_average"] = avg;
      cd::emit_json(rate_out, j, out_stream);
      return 0;
    }

    if (gl->parsed()) {
      BlaschkeSequence seq = make_sequence_preset(gl_seq);
      GluingOptions opt;
      opt.n_angular = gl_angular;
      GluingMaps gm = build_gluing_maps(seq, gl_r, gl_n_max, gl_lift, opt);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "gluing-report";
      j["preset"] = gl_seq;
      j["r"] = gm.r;
      j["n_max"] = gm.n_max;
      j["lift_depth"] = gm.lift_depth;
      j["equation_residual"] = gm.equation_residual;
      j["identity_zone_deviation"] = gm.identity_zone_deviation;
      std::vector<double> k_max;
      double k_overall = 1.0;
      for (const DilatationReport& rep : gm.dilatation) {
        k_max.push_back(rep.K_max);
        k_overall = std::max(k_overall, rep.K_max);
      }
      j["K_max_per_map"] = k_max;
      j["K_max_overall"] = k_overall;
      j["coverage_fraction"] = gm.coverage_fraction;
      j["outer_radius"] = gm.outer_radius;
      if (!gl_maps_dir.empty()) {
        cd::fs::path dir = cd::resolve_out(gl_maps_dir);
        cd::fs::create_directories(dir);
        for (std::size_t n = 0; n < gm.maps.size(); ++n) {
          std::ofstream os(dir / ("chart_" + std::to_string(n) + ".wlgm"),
                           std::ios::binary);
          require(os.good(), "cannot write gluing chart");
          write_grid_map(os, gm.maps[n]);
        }
      }
      cd::emit_json(gl_out, j, out_stream);
      return 0;
    }

    if (bo->parsed()) {
      Polynomial p = cd::parse_poly(bo_poly);
      cplx z = parse_complex(bo_z);
      double g = green_value(p, z);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "bottcher";
      j["z"] = detail::complex_json(z);
      j["green"] = g;
      j["escaping"] = g > 0.0;
      // the coordinate itself is defined away from the crowded zone; inside
      // it the potential is still reported
      if (g > 0.0 && std::abs(z) >= 2.0 * detail::escape_radius_of(p)) {
        cplx beta = bottcher_coordinate(p, z);
        j["bottcher"] = detail::complex_json(beta);
        j["log_modulus_residual"] = std::abs(std::log(std::abs(beta)) - g);
      } else {
        j["bottcher"] = nullptr;
      }
      cd::emit_json(bo_out, j, out_stream);
      return 0;
    }

    if (eq->parsed()) {
      Polynomial p = cd::parse_poly(eq_poly);
      EquipotentialDomain dom = equipotential_curve(p, eq_R, eq_n, eq_samples);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "equipotential";
      j["R"] = eq_R;
      j["n"] = eq_n;
      j["level"] = dom.level;
      j["level_residual"] = dom.level_residual;
      j["samples"] = dom.boundary.size();
      if (!eq_csv.empty()) {
        std::ostringstream csv;
        write_polyline_csv(csv, dom.boundary);
        cd::write_text(eq_csv, csv.str(), out_stream);
      }
      cd::emit_json(eq_out, j, out_stream);
      return 0;
    }

    if (rm->parsed()) {
      std::vector<cplx> boundary =
          cd::read_points_csv(cd::fs::path(rm_csv));
      RiemannMapNumeric m = riemann_map(boundary, rm_accuracy);
      std::string key = riemann_cache_key(m.boundary, m.accuracy_target);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "riemann-map";
      j["input_samples"] = boundary.size();
      j["samples_used"] = m.boundary.size();
      j["steps"] = m.steps.size();
      j["accuracy_target"] = m.accuracy_target;
      j["accuracy"] = m.accuracy;
      j["accuracy_met"] = m.accuracy_met;
      j["cache_key"] = key;
      if (!rm_cache.empty()) {
        cd::fs::path dir = cd::resolve_out(rm_cache);
        cd::fs::create_directories(dir);
        std::ofstream os(dir / (key + ".wlrm"), std::ios::binary);
        require(os.good(), "cannot write map cache");
        write_riemann_map(os, m);
      }
      cd::emit_json(rm_out, j, out_stream);
      return 0;
    }

    if (mb->parsed()) {
      Polynomial p = cd::parse_poly(mb_poly);
      PolynomialModel model =
          build_model(p, mb_R, mb_n_max, mb_accuracy, mb_samples);
      cd::fs::path dir = cd::resolve_out(mb_out);
      save_model(model, dir);
      double worst = 0.0;
      for (double r : model.residuals) worst = std::max(worst, r);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "model-build";
      j["written"] = (dir / "model.json").string();
      j["depth"] = model.depth();
      j["max_residual"] = worst;
      j["accuracy_warning"] = model.accuracy_warning;
      cd::emit_json("-", j, out_stream);
      return 0;
    }

    if (go->parsed()) {
      Polynomial p = cd::parse_poly(go_poly);
      ClipRegion region{parse_complex(go_center), go_radius};
      GrandOrbitSample sample = grand_orbit_sample(
          p, parse_complex(go_base), go_n, go_m, region, go_cap);
      std::ostringstream lines;
      write_grand_orbit_jsonl(lines, sample);
      cd::write_text(go_out, lines.str(), out_stream);
      if (!go_csv.empty()) {
        std::ostringstream csv;
        write_points_csv(csv, sample.points);
        cd::write_text(go_csv, csv.str(), out_stream);
      }
      if (!go_meta.empty()) {
        ordered_json j;
        j["schema"] = kSchemaTag;
        j["kind"] = "grand-orbit-meta";
        j["base"] = detail::complex_json(sample.base);
        j["region"] = cd::region_json(sample.region);
        j["n"] = go_n;
        j["m"] = go_m;
        j["count"] = sample.points.size();
        j["truncated"] = sample.truncated;
        j["visited"] = sample.visited;
        cd::emit_json(go_meta, j, out_stream);
      }
      return 0;
    }

    if (di->parsed()) {
      Polynomial p = cd::parse_poly(di_poly);
      ClipRegion region{parse_complex(di_center), di_radius};
      DiagnosticOptions opt;
      opt.marker_exclusion = di_exclusion;
      opt.node_cap = di_cap;
      DiscretenessReport rep = discreteness_diagnostic(
          p, parse_complex(di_base), region, di_depth, opt);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "discreteness";
      j["base"] = detail::complex_json(parse_complex(di_base));
      j["region"] = cd::region_json(region);
      j["depth"] = di_depth;
      j["report"] = discreteness_report_json(rep);
      cd::emit_json(di_out, j, out_stream);
      return 0;
    }

    if (tr->parsed()) {
      Polynomial p = cd::parse_poly(tr_poly);
      cplx l0 = parse_complex(tr_l0);
      std::vector<cplx> path;
      if (!tr_path.empty()) {
        path = parse_complex_list(tr_path);
      } else {
        require(!tr_l1.empty(),
                "transport: give --lambda1 or an explicit --path");
        require(tr_steps >= 1, "transport: --steps must be >= 1");
        cplx l1 = parse_complex(tr_l1);
        for (int k = 0; k <= tr_steps; ++k)
          path.push_back(l0 + (l1 - l0) * (double(k) / tr_steps));
      }
      cplx w = holomorphic_motion_transport(p, l0, path, parse_complex(tr_z),
                                            tr_n, tr_m);
      cplx end_target = cd::iterate_poly(p, path.back(), tr_m);
      double residual = std::abs(cd::iterate_poly(p, w, tr_n) - end_target);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "transport";
      j["lambda0"] = detail::complex_json(l0);
      j["lambda1"] = detail::complex_json(path.back());
      j["n"] = tr_n;
      j["m"] = tr_m;
      j["result"] = detail::complex_json(w);
      j["relation_residual"] = residual;
      cd::emit_json(tr_out, j, out_stream);
      return 0;
    }

    if (tc->parsed()) {
      require(tc_d >= 2, "template-check: --d must be >= 2");
      require(tc_trials >= 1, "template-check: --trials must be >= 1");
      auto lattice = [](int k) { return cplx(0.0, (2.0 * k - 1.0) * pi); };
      double g_zk = 0.0, g_prime = 0.0;
      for (int k : {1, 2, 4}) {
        cplx zk = lattice(k);
        g_zk = std::max(g_zk,
                        std::abs(template_g(zk, tc_d) - lattice(2 * k)));
        // derivative of the lift: 2 + q'(e^w) e^w with the closed form
        // q'(u) = 2((1+u)^{d-1} - 1)/u
        cplx u = std::exp(zk);
        cplx qp = 2.0 * (std::pow(1.0 + u, tc_d - 1) - 1.0) / u;
        g_prime = std::max(g_prime, std::abs(2.0 + qp * u));
      }
      double fixed = std::abs(template_G(cplx(-1.0, 0.0), tc_d) + 1.0);
      RngStream rng(tc_seed);
      double semi = 0.0;
      for (long t = 0; t < tc_trials; ++t) {
        // left half of the 10-disk: exp stays in the closed unit disk
        double ang = pi / 2.0 + pi * rng.unit();
        double rad = 10.0 * std::sqrt(rng.unit());
        cplx w = std::polar(rad, ang);
        semi = std::max(semi, std::abs(std::exp(template_g(w, tc_d)) -
                                       template_G(std::exp(w), tc_d)));
      }
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "template-check";
      j["d"] = tc_d;
      j["trials"] = tc_trials;
      j["seed"] = tc_seed;
      j["g_zk_residual"] = g_zk;
      j["g_prime_residual"] = g_prime;
      j["fixed_point_residual"] = fixed;
      j["semiconjugacy_residual"] = semi;
      cd::emit_json(tc_out, j, out_stream);
      return 0;
    }

    if (co->parsed()) {
      CoexistenceReport rep = coexistence_experiment(
          parse_complex(co_lambda), co_depth, co_accuracy, co_figure_only);
      cd::fs::path dir = cd::resolve_out(co_out);
      cd::fs::create_directories(dir);
      {
        std::ofstream os(dir / "report.json");
        require(os.good(), "cannot write coexistence report");
        os << coexistence_report_json(rep).dump(2) << '\n';
      }
      {
        std::ofstream os(dir / "julia.ppm", std::ios::binary);
        require(os.good(), "cannot write julia raster");
        write_field_raster_p6(os, rep.julia);
      }
      auto dump_points = [&](const char* name,
                             const std::vector<GrandOrbitPoint>& pts) {
        std::ofstream os(dir / name);
        require(os.good(), std::string("cannot write ") + name);
        write_points_csv(os, pts);
      };
      dump_points("basin_scatter.csv", rep.basin_scatter.points);
      dump_points("escaping_scatter.csv", rep.escaping_scatter.points);
      auto dump_polyline = [&](const char* name,
                               const std::vector<cplx>& pts) {
        std::ofstream os(dir / name);
        require(os.good(), std::string("cannot write ") + name);
        write_polyline_csv(os, pts);
      };
      dump_polyline("d0_boundary.csv", rep.d0_boundary);
      dump_polyline("d1_boundary.csv", rep.d1_boundary);
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "coexistence-summary";
      j["written"] = (dir / "report.json").string();
      j["basin_verdict"] = rep.basin_report.verdict;
      j["escaping_verdict"] = rep.escaping_report.verdict;
      cd::emit_json("-", j, out_stream);
      return 0;
    }

    if (rj->parsed()) {
      Polynomial p = cd::parse_poly(rj_poly);
      FieldRaster f =
          julia_field(p, rj_x0, rj_x1, rj_y0, rj_y1, rj_nx, rj_ny, rj_iter);
      {
        std::ostringstream img;
        write_field_raster_p6(img, f);
        cd::write_text(rj_out, img.str(), out_stream);
      }
      if (!rj_csv.empty()) {
        std::ostringstream csv;
        csv << "x,y,green,iterations\n";
        for (int jy = 0; jy < f.ny; ++jy)
          for (int ix = 0; ix < f.nx; ++ix) {
            std::size_t k = static_cast<std::size_t>(jy) *
                                static_cast<std::size_t>(f.nx) +
                            static_cast<std::size_t>(ix);
            double x = f.x_min + (f.x_max - f.x_min) * ix / (f.nx - 1);
            double y = f.y_min + (f.y_max - f.y_min) * jy / (f.ny - 1);
            csv << detail::fmt_double(x) << ',' << detail::fmt_double(y)
                << ',' << detail::fmt_double(f.green[k]) << ','
                << f.iterations[k] << '\n';
          }
        cd::write_text(rj_csv, csv.str(), out_stream);
      }
      long bounded = 0, escaping = 0;
      for (int it : f.iterations) (it < 0 ? bounded : escaping)++;
      ordered_json j;
      j["schema"] = kSchemaTag;
      j["kind"] = "render-julia";
      j["nx"] = f.nx;
      j["ny"] = f.ny;
      j["bounded_pixels"] = bounded;
      j["escaping_pixels"] = escaping;
      cd::emit_json(rj_json, j, out_stream);
      return 0;
    }

    err_stream << app.help();
    return 64;
  } catch (const precondition_error& e) {
    err_stream << "error: " << e.what() << '\n';
    return 2;
  } catch (const numeric_error& e) {
    err_stream << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err_stream << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace wanderlab
