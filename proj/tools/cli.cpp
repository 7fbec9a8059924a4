#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "memphase/config.hpp"
#include "memphase/energy.hpp"
#include "memphase/errors.hpp"
#include "memphase/flow.hpp"
#include "memphase/io.hpp"
#include "memphase/parallel.hpp"
#include "memphase/profile.hpp"
#include "memphase/recovery.hpp"
#include "memphase/report.hpp"
#include "memphase/slicing.hpp"

namespace memphase::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

std::string version_line() {
  std::ostringstream s;
  s << "memphase " << kVersion << " (field format " << kFieldFormatVersion << ")";
  return s.str();
}

Json meta() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"generated_at", buf}, {"version", kVersion}};
}

struct Common {
  std::string config;
  std::string output_dir;
  std::string threads;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required();
  sub->add_option("--output-dir", c.output_dir, "Directory for output files (overrides the config)");
  sub->add_option("--threads", c.threads, "Worker threads: a positive integer or 'auto'");
}

// Loads the config (if any), applies global settings and returns the
// document together with the output directory to use.
struct Context {
  Json doc = Json::object();
  fs::path output_dir = ".";
};

Context prepare(const Common& c) {
  Context ctx;
  if (!c.config.empty()) ctx.doc = config::load(c.config);
  if (!ctx.doc.is_object()) throw ConfigError("configuration root must be a JSON object");
  config::Globals g = config::globals(ctx.doc);
  if (!c.threads.empty()) {
    Json t = c.threads == "auto" ? Json("auto") : Json();
    if (t.is_null()) {
      try {
        std::size_t used = 0;
        const long long n = std::stoll(c.threads, &used);
        if (used != c.threads.size()) throw ConfigError("--threads must be a positive integer or 'auto'");
        t = n;
      } catch (const std::logic_error&) {
        throw ConfigError("--threads must be a positive integer or 'auto'");
      }
    }
    g.threads = config::globals(Json{{"threads", t}}).threads;
  }
  config::apply(g);
  if (g.output_dir) ctx.output_dir = *g.output_dir;
  if (!c.output_dir.empty()) ctx.output_dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(ctx.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + ctx.output_dir.string() + "': " + ec.message());
  return ctx;
}

void write_json(const fs::path& path, Json j) {
  j["meta"] = meta();
  io::write_file_atomic(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- limits

struct LimitsArgs {
  std::string config;
  std::string geometry = "sphere3d";
  double R = 1.0;
  std::vector<double> center;
  std::string split = "none";
  double theta0 = std::numbers::pi / 2;
  double alpha1 = 0.0;
  double alpha2 = std::numbers::pi;
  double a1 = 1.0;
  double a2 = 1.0;
  double position = 0.0;
  double cross_section = 1.0;
  std::string potential = "quartic";
};

int run_limits(const LimitsArgs& a, std::ostream& out) {
  Geometry g = Geometry::sphere(1.0, {0.0, 0.0, 0.0});
  DoubleWell w = DoubleWell::quartic();
  Modulus m(1.0, 1.0);
  if (!a.config.empty()) {
    const Json doc = config::load(a.config);
    config::require_keys(doc, "", {"threads", "memory_cap_points", "output_dir", "meta", "geometry", "potential",
                                   "modulus"});
    if (!doc.contains("geometry")) throw ConfigError("missing key 'geometry'");
    g = config::geometry(doc.at("geometry"), "geometry");
    if (doc.contains("potential")) w = config::potential(doc.at("potential"), "potential");
    if (doc.contains("modulus")) m = config::modulus(doc.at("modulus"), "modulus");
  } else {
    Json split = "none";
    if (a.split == "cap") {
      split = {{"kind", "cap"}, {"theta0", a.theta0}};
    } else if (a.split == "arcs") {
      split = {{"kind", "arcs"}, {"alpha1", a.alpha1}, {"alpha2", a.alpha2}};
    } else if (a.split != "none") {
      throw ConfigError("--split must be none, cap or arcs");
    }
    Json geo;
    if (a.geometry == "plane") {
      geo = {{"kind", "plane"}, {"position", a.position}, {"cross_section", a.cross_section}};
    } else {
      geo = {{"kind", a.geometry}, {"R", a.R}, {"split", split}};
      if (!a.center.empty()) geo["center"] = a.center;
    }
    g = config::geometry(geo, "geometry");
    w = DoubleWell::parse(a.potential);
    m = Modulus(a.a1, a.a2);
  }
  const SharpLimits s = sharp_limits(g, w, m);
  Json j = config::to_json(s);
  j["sigma"] = w.sigma();
  if (s.willmore) {
    const LiYauFlags f = li_yau_admissible(*s.willmore, w, m);
    j["li_yau_threshold"] = f.threshold;
    j["admissible_li_yau_sum"] = f.sum_convention;
    j["admissible_li_yau_mean"] = f.mean_convention;
  }
  out << j.dump(2) << "\n";
  return kOk;
}

// --------------------------------------------------------------- profile

struct ProfileArgs {
  std::string potential = "quartic";
  std::optional<double> epsilon;
  double t_min = -6.0;
  double t_max = 6.0;
  double step = 0.01;
  std::string out;
};

int run_profile(const ProfileArgs& a, std::ostream& out) {
  if (!(a.step > 0.0) || !(a.t_max > a.t_min)) throw ConfigError("profile: need t-max > t-min and step > 0");
  const DoubleWell w = DoubleWell::parse(a.potential);
  auto base = std::make_shared<const OptimalProfile>(w);
  std::optional<TruncatedProfile> tp;
  if (a.epsilon) tp.emplace(base, *a.epsilon);
  const auto n = static_cast<long long>(std::floor((a.t_max - a.t_min) / a.step + 1e-9));
  std::ostringstream csv;
  csv << "t,w,w_prime,W_of_w\n";
  for (long long k = 0; k <= n; ++k) {
    const double t = a.t_min + static_cast<double>(k) * a.step;
    const double v = tp ? tp->value(t) : base->value(t);
    const double d = tp ? tp->derivative(t) : base->derivative(t);
    csv << report::format_double(t) << ',' << report::format_double(v) << ',' << report::format_double(d) << ','
        << report::format_double(w.value(v)) << '\n';
  }
  if (a.out.empty()) {
    out << csv.str();
  } else {
    io::write_file_atomic(a.out, csv.str());
  }
  return kOk;
}

// ------------------------------------------------ fields for single-eps commands

struct Fields {
  RecoveryConfig cfg;
  double epsilon = 0.0;
  ScalarField u;
  std::optional<ScalarField> v;
};

Fields single_fields(const Json& doc) {
  Fields f;
  f.cfg = config::single_config(doc, {"fields"});
  f.epsilon = f.cfg.epsilons.front();
  if (doc.contains("fields")) {
    const Json& fl = doc.at("fields");
    config::require_keys(fl, "fields", {"u", "v"});
    if (!fl.contains("u") || !fl.at("u").is_string()) throw ConfigError("'fields.u' must be a file stem");
    f.u = read_field(fl.at("u").get<std::string>());
    if (fl.contains("v")) {
      if (!fl.at("v").is_string()) throw ConfigError("'fields.v' must be a file stem");
      f.v = read_field(fl.at("v").get<std::string>());
      require_same_spec(f.u.spec(), f.v->spec(), "fields");
    }
  } else {
    f.u = build_u(f.cfg, f.epsilon);
    if (f.cfg.geometry.split().kind != PhaseSplit::Kind::None) f.v = build_v(f.cfg, f.epsilon);
  }
  return f;
}

Json grid_json(const GridSpec& s) {
  Json dims = Json::array();
  Json origin = Json::array();
  for (int a = 0; a < s.dim; ++a) {
    dims.push_back(s.dims[a]);
    origin.push_back(s.origin[a]);
  }
  return {{"dim", s.dim}, {"dims", dims}, {"spacing", s.spacing}, {"origin", origin}};
}

// --------------------------------------------------------------- recover

int run_recover(const Common& c, const std::string& fields_out, std::ostream& out) {
  Context ctx = prepare(c);
  Fields f = single_fields(ctx.doc);
  const EnergyReport e = evaluate_energies(f.u, f.v ? &*f.v : nullptr, f.cfg.potential, f.cfg.modulus, f.epsilon);
  const SharpLimits limits = sharp_limits(f.cfg.geometry, f.cfg.potential, f.cfg.modulus);
  Json j;
  j["energies"] = to_json(e);
  j["sharp_limits"] = config::to_json(limits);
  j["grid"] = grid_json(f.u.spec());
  j["geometry"] = config::to_json(f.cfg.geometry);
  Json err;
  err["M"] = (e.M - limits.perimeter) / limits.perimeter;
  if (limits.line && f.v) err["I"] = (e.I - *limits.line) / *limits.line;
  if (limits.willmore) err["J"] = (e.J - *limits.willmore) / *limits.willmore;
  j["errors"] = err;
  if (!fields_out.empty()) {
    fs::create_directories(fields_out);
    write_field(f.u, fs::path(fields_out) / "u");
    if (f.v) write_field(*f.v, fs::path(fields_out) / "v");
  }
  write_json(ctx.output_dir / "recover.json", j);
  out << j.dump(2) << "\n";
  return kOk;
}

// ----------------------------------------------------------------- sweep

int run_sweep(const Common& c, const std::string& fields_out, const std::string& svg, std::ostream& out,
              std::ostream& err) {
  Context ctx = prepare(c);
  const RecoveryConfig cfg = config::sweep_config(ctx.doc);
  SweepOptions opts;
  if (!fields_out.empty()) opts.fields_out = fs::path(fields_out);
  const SweepResult r = sweep(cfg, opts);
  io::write_file_atomic(ctx.output_dir / "sweep.csv", report::sweep_csv(r));
  Json j = report::sweep_json(r);
  j["geometry"] = config::to_json(cfg.geometry);
  j["q"] = cfg.q;
  write_json(ctx.output_dir / "sweep.json", j);
  if (!svg.empty()) {
    const auto series = report::sweep_error_series(r);
    if (series.empty()) {
      err << "warning: no complete error series to plot; SVG not written\n";
    } else {
      report::emit_svg(series, svg);
    }
  }
  out << report::sweep_csv(r);
  if (!r.complete) {
    err << "sweep aborted: " << r.failure << "\n";
    return kDomain;
  }
  return kOk;
}

// ----------------------------------------------------------------- slice

struct SliceArgs {
  int levels = 0;
  std::optional<double> per_slice_t;
  bool coarea = false;
  int t_samples = 64;
  bool mfpair = false;
  std::vector<std::string> density;
  std::optional<double> surface_level;
  std::string surface_out;
};

int run_slice(const Common& c, const SliceArgs& a, std::ostream& out) {
  Context ctx = prepare(c);
  Fields f = single_fields(ctx.doc);
  const DoubleWell& w = f.cfg.potential;
  const ScalarField U = phi_field(f.u, w);
  Json j;
  j["epsilon"] = f.epsilon;
  j["grid"] = grid_json(f.u.spec());
  bool any = false;
  if (a.levels > 0) {
    any = true;
    std::vector<double> ts(a.levels);
    for (int k = 0; k < a.levels; ++k) ts[k] = w.sigma() * (k + 0.5) / a.levels;
    const auto measures = level_integrals(U, ts);
    Json lv = Json::array();
    for (int k = 0; k < a.levels; ++k) lv.push_back({{"t", ts[k]}, {"measure", measures[k]}});
    j["levels"] = lv;
  }
  if (a.per_slice_t) {
    any = true;
    if (!f.v) throw ConfigError("--per-slice-mm needs a phase field v (a split or fields.v)");
    j["per_slice_mm"] = {{"t", *a.per_slice_t},
                         {"value", per_slice_mm(f.u, *f.v, w, f.epsilon, *a.per_slice_t)}};
  }
  if (a.coarea) {
    any = true;
    const CoareaResult r = coarea_check(U, a.t_samples);
    j["coarea"] = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"gap", r.gap}, {"t_samples", a.t_samples}};
  }
  if (a.mfpair) {
    any = true;
    const ScalarField v = f.v ? *f.v : ScalarField(f.u.spec(), 1.0);
    const auto tests = builtin_test_functions();
    Json list = Json::array();
    for (const auto& r : mf_pair_diagnostics(f.u, v, w, f.epsilon, tests, f.cfg.geometry)) list.push_back(r.to_json());
    j["mfpair"] = list;
  }
  if (!a.density.empty()) {
    any = true;
    if (a.density.size() != 2) throw ConfigError("--density expects X0 (comma separated) and r");
    Point x0{0.0, 0.0, 0.0};
    std::stringstream ss(a.density[0]);
    std::string part;
    int n = 0;
    try {
      while (std::getline(ss, part, ',')) {
        if (n >= 3) throw ConfigError("--density: x0 has more than three coordinates");
        x0[n++] = std::stod(part);
      }
      const double r = std::stod(a.density[1]);
      j["density"] = {{"x0", {x0[0], x0[1], x0[2]}}, {"r", r},
                      {"ratio", density_ratio(f.u, w, f.epsilon, x0, r)}};
    } catch (const std::logic_error&) {
      throw ConfigError("--density: cannot parse numbers");
    }
  }
  if (a.surface_level) {
    any = true;
    const ScalarField& scalar = f.v ? *f.v : f.u;
    const std::array<NodeFunction, 1> aux{[&](std::size_t flat, const Index&) { return scalar[flat]; }};
    IsoSurface s = extract(U, *a.surface_level, aux);
    Json sj = s.to_json();
    sj["scalars"] = {{f.v ? "v" : "u", s.aux[0]}};
    j["surface"] = {{"level", *a.surface_level}, {"vertices", s.vertices.size()},
                    {"simplices", s.simplices.size()}, {"measure", s.total_measure()}};
    const fs::path target = a.surface_out.empty() ? ctx.output_dir / "surface.json" : fs::path(a.surface_out);
    io::write_file_atomic(target, sj.dump() + "\n");
  }
  if (!any) {
    const CoareaResult r = coarea_check(U, a.t_samples);
    j["coarea"] = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"gap", r.gap}, {"t_samples", a.t_samples}};
  }
  write_json(ctx.output_dir / "slice.json", j);
  out << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- mfpair

int run_mfpair(const Common& c, std::ostream& out) {
  Context ctx = prepare(c);
  Fields f = single_fields(ctx.doc);
  const ScalarField v = f.v ? *f.v : ScalarField(f.u.spec(), 1.0);
  const auto tests = builtin_test_functions();
  Json list = Json::array();
  for (const auto& r : mf_pair_diagnostics(f.u, v, f.cfg.potential, f.epsilon, tests, f.cfg.geometry)) {
    list.push_back(r.to_json());
  }
  Json j = {{"epsilon", f.epsilon}, {"tests", list}};
  write_json(ctx.output_dir / "mfpair.json", j);
  out << j.dump(2) << "\n";
  return kOk;
}

// ------------------------------------------------------------------ flow

int run_flow(const Common& c, int checkpoint_every, bool check, std::ostream& out) {
  Context ctx = prepare(c);
  FlowConfig cfg = config::flow_config(ctx.doc);
  if (check) cfg.check_gradients = true;
  if (checkpoint_every < 0) throw ConfigError("--checkpoint-every must be >= 0");
  FlowCallbacks cb;
  const fs::path dir = ctx.output_dir / "checkpoints";
  if (checkpoint_every > 0) {
    fs::create_directories(dir);
    cb.on_step = [&](const FlowSolver& s) {
      if (s.steps_taken() % checkpoint_every != 0) return;
      char tag[32];
      std::snprintf(tag, sizeof tag, "step%06d", s.steps_taken());
      write_field(s.u(), dir / (std::string("u_") + tag));
      write_field(s.v(), dir / (std::string("v_") + tag));
    };
  }
  const FlowLog log = run(cfg, cb);
  io::write_file_atomic(ctx.output_dir / "flow.csv", report::flow_csv(log));
  write_json(ctx.output_dir / "flow.json", report::flow_json(log));
  out << report::flow_csv(log);
  return kOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-field membrane energies: recovery sequences, sweeps, slicing and flows", "memphase"};
  bool version = false;
  app.add_flag("--version", version, "Print the version and field-format version");

  auto* limits = app.add_subcommand("limits", "Print the sharp-interface limits of a geometry");
  LimitsArgs la;
  limits->add_option("--config", la.config, "JSON document with geometry, potential, modulus");
  limits->add_option("--geometry", la.geometry, "sphere3d, disk2d or plane");
  limits->add_option("--R", la.R, "Radius");
  limits->add_option("--center", la.center, "Centre coordinates")->delimiter(',');
  limits->add_option("--split", la.split, "none, cap or arcs");
  limits->add_option("--theta0", la.theta0, "Cap polar angle");
  limits->add_option("--alpha1", la.alpha1, "First arc angle");
  limits->add_option("--alpha2", la.alpha2, "Second arc angle");
  limits->add_option("--a1", la.a1, "Bending modulus of phase +1");
  limits->add_option("--a2", la.a2, "Bending modulus of phase -1");
  limits->add_option("--position", la.position, "Plane position along axis 0");
  limits->add_option("--cross-section", la.cross_section, "Plane cross-section area");
  limits->add_option("--potential", la.potential, "quartic or custom:scale=<k>");

  auto* profile = app.add_subcommand("profile", "Dump the optimal (or truncated) profile as CSV");
  ProfileArgs pa;
  double profile_eps = 0.0;
  profile->add_option("--potential", pa.potential, "quartic or custom:scale=<k>");
  auto* eps_opt = profile->add_option("--epsilon", profile_eps, "Use the truncated profile for this epsilon");
  profile->add_option("--t-min", pa.t_min, "First sample");
  profile->add_option("--t-max", pa.t_max, "Last sample");
  profile->add_option("--step", pa.step, "Sample spacing");
  profile->add_option("--out", pa.out, "Output CSV path (default: standard output)");

  Common rc;
  std::string recover_fields;
  auto* recover = app.add_subcommand("recover", "Build recovery fields for one epsilon and report energies");
  add_common(recover, rc, true);
  recover->add_option("--fields-out", recover_fields, "Directory for u and v field files");

  Common sc;
  std::string sweep_fields;
  std::string sweep_svg;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an epsilon sweep against the sharp limits");
  add_common(sweep_cmd, sc, true);
  sweep_cmd->add_option("--fields-out", sweep_fields, "Directory for u and v field files per epsilon");
  sweep_cmd->add_option("--svg", sweep_svg, "Write a log-log error plot to this path");

  Common slc;
  SliceArgs sa;
  double per_slice_t = 0.0;
  double surface_level = 0.0;
  auto* slice = app.add_subcommand("slice", "Level-set slicing diagnostics");
  add_common(slice, slc, true);
  slice->add_option("--levels", sa.levels, "Number of phi(u) levels whose measure is reported");
  auto* ps_opt = slice->add_option("--per-slice-mm", per_slice_t, "Per-slice energy of v on {phi(u) = t}");
  slice->add_flag("--coarea", sa.coarea, "Check the coarea identity");
  slice->add_option("--t-samples", sa.t_samples, "Level samples for the coarea check");
  slice->add_flag("--mfpair", sa.mfpair, "Measure-function-pair diagnostics");
  slice->add_option("--density", sa.density, "Density ratio in the ball B_r(x0): X0 (comma separated) and r")
      ->expected(2);
  auto* sl_opt = slice->add_option("--surface-level", surface_level, "Extract and dump {phi(u) = t}");
  slice->add_option("--surface-out", sa.surface_out, "Surface dump path (default: <output-dir>/surface.json)");

  Common mc;
  auto* mfpair = app.add_subcommand("mfpair", "Measure-function-pair gaps for the built-in test functions");
  add_common(mfpair, mc, true);

  Common fc;
  int checkpoint_every = 0;
  bool check_gradients = false;
  auto* flow = app.add_subcommand("flow", "Coupled gradient flow of M + lambda I");
  add_common(flow, fc, true);
  flow->add_option("--checkpoint-every", checkpoint_every, "Write u and v every N steps");
  flow->add_flag("--check-gradients", check_gradients, "Finite-difference check of the variations at start");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in consistency checks");
  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfig;
  }

  if (version) {
    out << version_line() << "\n";
    return kOk;
  }
  try {
    if (limits->parsed()) return run_limits(la, out);
    if (profile->parsed()) {
      if (eps_opt->count() > 0) pa.epsilon = profile_eps;
      return run_profile(pa, out);
    }
    if (recover->parsed()) return run_recover(rc, recover_fields, out);
    if (sweep_cmd->parsed()) return run_sweep(sc, sweep_fields, sweep_svg, out, err);
    if (slice->parsed()) {
      if (ps_opt->count() > 0) sa.per_slice_t = per_slice_t;
      if (sl_opt->count() > 0) sa.surface_level = surface_level;
      return run_slice(slc, sa, out);
    }
    if (mfpair->parsed()) return run_mfpair(mc, out);
    if (flow->parsed()) return run_flow(fc, checkpoint_every, check_gradients, out);
    if (selftest->parsed()) return run_selftest(out) == 0 ? kOk : kDomain;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "numerical domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const nlohmann::json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  err << "error: a subcommand is required\n" << app.help();
  return kConfig;
}

}  // namespace memphase::cli
