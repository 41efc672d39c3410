#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "cli_support.hpp"
#include "squeeze/optical_pumping.hpp"
#include "squeeze/paraxial.hpp"
#include "squeeze/protocols.hpp"
#include "squeeze/qnd_ode.hpp"

#ifndef SQUEEZE_VERSION
#define SQUEEZE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace squeeze;
using squeeze::cli::ConfigError;
using squeeze::cli::RunConfig;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct RunOutput {
  double peak_db = 0, t_peak = 0;
  std::vector<std::string> files;
  std::map<std::string, std::string> extra;  // additional summary lines
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << text;
  if (!os) throw ConfigError("write failed: " + p.string());
}

std::string fmt_num(double v) { return fmt::format("{:.6f}", v); }

std::optional<bool> keep_flag(const RunConfig& c) {
  if (c.keep_transfer == "true") return true;
  if (c.keep_transfer == "false") return false;
  return std::nullopt;
}

std::string traj_csv(const Trajectory& tr) {
  std::ostringstream os;
  tr.write_csv(os);
  return os.str();
}

RunOutput run_simulate(const RunConfig& c, const fs::path& out) {
  const Protocol protocol = parse_protocol(c.protocol);
  const Prep prep = parse_prep(c.prep);
  const bool prep_alpha = prep == Prep::yurke || prep == Prep::half_yurke;
  const ProtocolContext ctx = make_context(prep, c.params, keep_flag(c), prep_alpha ? c.alpha : std::nullopt);
  SimulateOptions opt;
  opt.target = parse_target(c.target);
  opt.alpha = prep_alpha ? std::nullopt : c.alpha;
  opt.keep_transfer = ctx.keep_transfer;
  opt.record_every = c.record_every;
  const Trajectory tr = simulate(protocol, ctx, c.t_max, opt);
  write_file(out / "trajectory.csv", traj_csv(tr));
  RunOutput r{tr.peak_db(), tr.peak_time(), {"trajectory.csv"}, {}};
  r.extra["keep_transfer"] = ctx.keep_transfer ? "true" : "false";
  if (!c.params.pumping) {
    const double dt = protocol == Protocol::qnd ? c.params.step : 2 * c.params.step;
    const double n = std::max(1.0, std::round(c.t_max / dt));
    const double xi_total = ctx.xi_up * ctx.n_step * c.params.n_atoms * n;
    r.extra["xi_total"] = fmt::format("{:.9g}", xi_total);
    r.extra["coherent_limit_dB"] = fmt_num(10 * std::log10(1 + xi_total));
  }
  return r;
}

OdeOptions ode_options(const RunConfig& c) {
  OdeOptions o;
  o.t_max = c.t_max;
  if (c.dt_out) o.dt_out = *c.dt_out;
  if (c.rtol) o.rtol = *c.rtol;
  if (c.atol) o.atol = *c.atol;
  o.target = parse_target(c.target);
  return o;
}

RunOutput run_ode(const RunConfig& c, const fs::path& out) {
  c.params.validate();
  const OdeResult res = integrate(parse_prep(c.prep), c.params, ode_options(c));
  write_file(out / "trajectory.csv", traj_csv(res.traj));
  RunOutput r{res.peak_db, res.t_peak, {"trajectory.csv"}, {}};
  r.extra["peak_keep_dB"] = fmt_num(res.peak_keep_db);
  r.extra["peak_drop_dB"] = fmt_num(res.peak_drop_db);
  r.extra["dropped_terms_ratio"] = fmt::format("{:.3e}", res.dropped_terms_ratio);
  return r;
}

RunOutput run_oracle(const RunConfig& c, const fs::path& out) {
  c.params.validate();
  if (c.params.f != 1.0) throw ValidationError("oracle-f1 requires f = 1");
  const Trajectory tr = exact_f1_reference(c.params, c.t_max, c.dt_out.value_or(1e-3));
  write_file(out / "trajectory.csv", traj_csv(tr));
  return {tr.peak_db(), tr.peak_time(), {"trajectory.csv"}, {}};
}

RunOutput run_optimize(const RunConfig& c, const fs::path& out) {
  c.params.validate();
  OptimizeOptions o;
  o.n_seeds = c.n_seeds;
  o.seed = c.seed;
  o.max_iterations = c.max_iterations;
  o.t_max = c.t_max;
  if (c.dt_out) o.dt_out = *c.dt_out;
  o.target = parse_target(c.target);
  if (o.n_seeds < 1 || o.max_iterations < 1) throw ValidationError("n_seeds and max_iterations must be positive");
  const OptimizeResult res = optimize_fiducial(c.params, o);
  write_file(out / "optimize.json", optimize_report_json(res, c.params) + "\n");
  OdeOptions oo = ode_options(c);
  oo.dt_out = o.dt_out;
  const OdeResult best = integrate(res.best.state, c.params, oo);
  write_file(out / "trajectory.csv", traj_csv(best.traj));
  RunOutput r{res.best.peak_db, res.best.t_peak, {"optimize.json", "trajectory.csv"}, {}};
  r.extra["best_seed"] = std::to_string(res.best.seed);
  return r;
}

RunOutput run_scan(const RunConfig& c, const fs::path& out) {
  ScanConfig s;
  for (double ar : c.ar_grid)
    if (!(ar > 0)) throw ValidationError("aspect ratios must be positive");
  for (double w : c.w0_um_grid)
    if (!(w > 0)) throw ValidationError("waists must be positive");
  if (!(c.para_atoms > 0) || !(c.eta0_cm3 > 0) || !(c.wavelength_nm > 0))
    throw ValidationError("para_atoms, eta0_cm3 and wavelength_nm must be positive");
  if (c.slices < 2 || c.p_max < 0) throw ValidationError("slices >= 2 and p_max >= 0 required");
  if (!is_half_integer(c.params.f) && !is_integer_spin(c.params.f)) throw ValidationError("f must be a half-integer");
  s.aspect_ratios = c.ar_grid;
  for (double w : c.w0_um_grid) s.waists.push_back(w * 1e-6);
  s.n_atoms = c.para_atoms;
  s.eta0 = c.eta0_cm3 * 1e6;
  s.wavelength = c.wavelength_nm * 1e-9;
  s.lattice.slices = c.slices;
  s.lattice.p_max = c.p_max;
  s.lattice.f = c.params.f;
  s.lattice.prep = parse_prep(c.prep);
  s.lattice.pumping = c.params.pumping;
  s.run.t_max = c.t_max;
  if (c.dt_out) s.run.dt_out = *c.dt_out;
  if (c.rtol) s.run.rtol = *c.rtol;
  if (c.atol) s.run.atol = *c.atol;
  const auto pts = geometry_scan(s);
  std::ostringstream os;
  write_scan_csv(os, pts);
  write_file(out / "contour.csv", os.str());
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].peak_db > pts[best].peak_db) best = i;
  RunOutput r{pts[best].peak_db, pts[best].t_peak, {"contour.csv"}, {}};
  r.extra["best_AR"] = fmt::format("{:g}", pts[best].aspect_ratio);
  r.extra["best_w0_um"] = fmt::format("{:g}", pts[best].w0 * 1e6);
  r.extra["best_OD_eff"] = fmt::format("{:.3f}", pts[best].od_eff);
  return r;
}

int execute(const RunConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory " + c.out);

  RunOutput r;
  if (c.kind == "simulate") r = run_simulate(c, out);
  else if (c.kind == "ode") r = run_ode(c, out);
  else if (c.kind == "oracle-f1") r = run_oracle(c, out);
  else if (c.kind == "optimize") r = run_optimize(c, out);
  else if (c.kind == "paraxial-scan") r = run_scan(c, out);
  else throw ConfigError("unknown experiment kind: " + c.kind);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string summary = fmt::format("kind={}\npeak_dB={}\nt_peak={}\n", c.kind, fmt_num(r.peak_db), fmt_num(r.t_peak));
  for (const auto& [k, v] : r.extra) summary += k + "=" + v + "\n";
  write_file(out / "summary.txt", summary);
  write_file(out / "run.cfg", cli::dump_config(c));

  nlohmann::json m;
  m["schema"] = "squeeze-run/1";
  m["kind"] = c.kind;
  m["version"] = SQUEEZE_VERSION;
  m["seed"] = c.seed;
  m["wall_time_s"] = wall;
  m["config"] = cli::config_to_json(c);
  m["outputs"] = r.files;
  m["peak_dB"] = r.peak_db;
  m["t_peak"] = r.t_peak;
  write_file(out / "manifest.json", m.dump(2) + "\n");

  fmt::print("{}", summary);
  return 0;
}

int compare(const std::string& a, const std::string& b) {
  std::ifstream fa(a), fb(b);
  if (!fa) throw ConfigError("cannot read " + a);
  if (!fb) throw ConfigError("cannot read " + b);
  const auto rep = cli::compare_series(cli::read_series(fa), cli::read_series(fb));
  fmt::print("matched={}\nmax_abs_diff_dB={:.6f}\npeak_a_dB={:.6f}\npeak_b_dB={:.6f}\npeak_diff_dB={:.6f}\n",
             rep.matched, rep.max_abs_diff_db, rep.peak_a_db, rep.peak_b_db, rep.peak_diff_db());
  fmt::print("t_peak_a={:.6f}\nt_peak_b={:.6f}\n", rep.t_peak_a, rep.t_peak_b);
  return 0;
}

// named flags, each mapped onto a config key
const std::vector<std::pair<std::string, std::string>> kFlags = {
    {"--protocol", "protocol"},         {"--prep", "prep"},
    {"--f", "f"},                       {"--od", "od"},
    {"--na", "na"},                     {"--nl", "nl"},
    {"--sigma0-over-a", "sigma0_over_a"}, {"--gamma-over-delta", "gamma_over_delta"},
    {"--target", "target"},             {"--alpha", "alpha"},
    {"--keep-transfer", "keep_transfer"}, {"--t-max", "t_max"},
    {"--step", "step"},                 {"--gamma-s", "gamma_s"},
    {"--out", "out"},                   {"--seed", "seed"},
    {"--n-seeds", "n_seeds"},           {"--max-iterations", "max_iterations"},
    {"--record-every", "record_every"}, {"--dt-out", "dt_out"},
    {"--rtol", "rtol"},                 {"--atol", "atol"},
    {"--ar-grid", "ar_grid"},           {"--w0-um-grid", "w0_um_grid"},
    {"--eta0-cm3", "eta0_cm3"},         {"--para-atoms", "para_atoms"},
    {"--wavelength-nm", "wavelength_nm"}, {"--slices", "slices"},
    {"--p-max", "p_max"},
};

struct RunArgs {
  std::string config, manifest;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

void add_run_options(CLI::App* sub, RunArgs& a) {
  sub->add_option("--config", a.config, "key=value config file");
  sub->add_option("--manifest", a.manifest, "re-run from an emitted manifest.json");
  sub->add_option("--set", a.sets, "key=value override (repeatable)");
  for (const auto& [flag, key] : kFlags) {
    auto* opt = sub->add_option(flag)->description("override " + key)->expected(1);
    opt->each([&a, key = key](const std::string& v) { a.flags[key] = v; });
  }
}

RunConfig resolve(const std::string& kind, const RunArgs& a) {
  RunConfig c;
  std::vector<std::string> explicit_keys;
  auto apply = [&](const std::string& k, const std::string& v) {
    cli::set_key(c, k, v);
    explicit_keys.push_back(k);
  };
  if (!a.manifest.empty()) {
    std::ifstream is(a.manifest);
    if (!is) throw ConfigError("cannot read " + a.manifest);
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("manifest parse error: ") + e.what());
    }
    if (!j.contains("config")) throw ConfigError("manifest lacks a config object");
    for (const auto& [k, v] : j["config"].items()) apply(k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  if (!a.config.empty()) {
    std::ifstream is(a.config);
    if (!is) throw ConfigError("cannot read " + a.config);
    for (const auto& [k, v] : cli::parse_key_values(is)) apply(k, v);
  }
  for (const auto& [k, v] : a.flags) apply(k, v);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + s);
    const std::string key = s.substr(0, eq);
    const auto& keys = cli::config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key: " + key);
    apply(key, s.substr(eq + 1));
  }
  cli::set_key(c, "kind", kind);
  // optical depth follows N_A σ0/A unless given
  if (std::find(explicit_keys.begin(), explicit_keys.end(), "od") == explicit_keys.end())
    c.params.od = c.params.n_atoms * c.params.sigma0_over_a;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"squeezing simulations of optically pumped spin ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SQUEEZE_VERSION);

  const std::vector<std::string> kinds = {"simulate", "ode", "optimize", "paraxial-scan", "oracle-f1"};
  std::map<std::string, RunArgs> args;
  std::map<std::string, CLI::App*> subs;
  for (const auto& k : kinds) {
    subs[k] = app.add_subcommand(k, "run a " + k + " experiment");
    add_run_options(subs[k], args[k]);
  }
  std::string run_a, run_b;
  auto* cmp = app.add_subcommand("compare", "compare two trajectory CSVs");
  cmp->add_option("run_a", run_a, "trajectory.csv or run directory")->required();
  cmp->add_option("run_b", run_b, "trajectory.csv or run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (cmp->parsed()) {
      auto csv = [](const std::string& p) { return fs::is_directory(p) ? (fs::path(p) / "trajectory.csv").string() : p; };
      return compare(csv(run_a), csv(run_b));
    }
    for (const auto& k : kinds)
      if (subs[k]->parsed()) return execute(resolve(k, args[k]));
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    fmt::print(std::cerr, "validation error: {}\n", e.what());
    return kExitValidation;
  } catch (const UnsupportedPreparation& e) {
    fmt::print(std::cerr, "validation error: {}\n", e.what());
    return kExitValidation;
  } catch (const NoCoupledState& e) {
    fmt::print(std::cerr, "validation error: {}\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    fmt::print(std::cerr, "validation error: {}\n", e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    fmt::print(std::cerr, "numerical error: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "numerical error: {}\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
