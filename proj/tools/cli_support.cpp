#include "cli_support.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace squeeze::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for key '" + key + "': " + v);
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError("integer expected for key '" + key + "': " + v);
  return static_cast<int>(d);
}

std::optional<double> to_optional(const std::string& key, const std::string& v) {
  if (v.empty() || v == "auto") return std::nullopt;
  return to_double(key, v);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
  return out;
}

// shortest text that reads back to the same double
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "kind",         "od",         "na",        "nl",         "sigma0_over_a", "gamma_over_delta", "f",
      "g_f",          "step",       "gamma_s",   "protocol",   "prep",          "target",           "alpha",
      "keep_transfer", "t_max",     "record_every", "out",     "seed",          "n_seeds",          "max_iterations",
      "rtol",         "atol",       "dt_out",    "wavelength_nm", "para_atoms",  "eta0_cm3",         "ar_grid",
      "w0_um_grid",   "slices",     "p_max"};
  return keys;
}

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  auto& p = c.params;
  if (key == "kind") {
    static const std::vector<std::string> kinds = {"simulate", "ode", "optimize", "paraxial-scan", "oracle-f1"};
    if (std::find(kinds.begin(), kinds.end(), v) == kinds.end()) throw ConfigError("unknown experiment kind: " + v);
    c.kind = v;
  } else if (key == "od") p.od = to_double(key, v);
  else if (key == "na") p.n_atoms = to_double(key, v);
  else if (key == "nl") p.n_light = to_double(key, v);
  else if (key == "sigma0_over_a") p.sigma0_over_a = to_double(key, v);
  else if (key == "gamma_over_delta") p.gamma_over_delta = to_double(key, v);
  else if (key == "f") p.f = to_double(key, v);
  else if (key == "g_f") p.g_f = to_double(key, v);
  else if (key == "step") p.step = to_double(key, v);
  else if (key == "gamma_s") {
    // time is in units of 1/γ_s; only the coherent limit 0 or the unit rate are meaningful
    const double g = to_double(key, v);
    if (g != 0.0 && g != 1.0) throw ConfigError("gamma_s must be 0 (coherent limit) or 1");
    p.pumping = g != 0.0;
  }
  else if (key == "protocol") c.protocol = v;
  else if (key == "prep") c.prep = v;
  else if (key == "target") c.target = v;
  else if (key == "alpha") c.alpha = to_optional(key, v);
  else if (key == "keep_transfer") {
    if (v != "auto" && v != "true" && v != "false") throw ConfigError("keep_transfer must be auto, true or false");
    c.keep_transfer = v;
  } else if (key == "t_max") c.t_max = to_double(key, v);
  else if (key == "record_every") c.record_every = to_int(key, v);
  else if (key == "out") c.out = v;
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_double(key, v));
  else if (key == "n_seeds") c.n_seeds = to_int(key, v);
  else if (key == "max_iterations") c.max_iterations = to_int(key, v);
  else if (key == "rtol") c.rtol = to_optional(key, v);
  else if (key == "atol") c.atol = to_optional(key, v);
  else if (key == "dt_out") c.dt_out = to_optional(key, v);
  else if (key == "wavelength_nm") c.wavelength_nm = to_double(key, v);
  else if (key == "para_atoms") c.para_atoms = to_double(key, v);
  else if (key == "eta0_cm3") c.eta0_cm3 = to_double(key, v);
  else if (key == "ar_grid") c.ar_grid = to_list(key, v);
  else if (key == "w0_um_grid") c.w0_um_grid = to_list(key, v);
  else if (key == "slices") c.slices = to_int(key, v);
  else if (key == "p_max") c.p_max = to_int(key, v);
  else throw ConfigError("unknown key: " + key);
}

std::string get_key(const RunConfig& c, const std::string& key) {
  const auto& p = c.params;
  if (key == "kind") return c.kind;
  if (key == "od") return fmt(p.od);
  if (key == "na") return fmt(p.n_atoms);
  if (key == "nl") return fmt(p.n_light);
  if (key == "sigma0_over_a") return fmt(p.sigma0_over_a);
  if (key == "gamma_over_delta") return fmt(p.gamma_over_delta);
  if (key == "f") return fmt(p.f);
  if (key == "g_f") return fmt(p.g_f);
  if (key == "step") return fmt(p.step);
  if (key == "gamma_s") return p.pumping ? "1" : "0";
  if (key == "protocol") return c.protocol;
  if (key == "prep") return c.prep;
  if (key == "target") return c.target;
  if (key == "alpha") return c.alpha ? fmt(*c.alpha) : "auto";
  if (key == "keep_transfer") return c.keep_transfer;
  if (key == "t_max") return fmt(c.t_max);
  if (key == "record_every") return std::to_string(c.record_every);
  if (key == "out") return c.out;
  if (key == "seed") return std::to_string(c.seed);
  if (key == "n_seeds") return std::to_string(c.n_seeds);
  if (key == "max_iterations") return std::to_string(c.max_iterations);
  if (key == "rtol") return c.rtol ? fmt(*c.rtol) : "auto";
  if (key == "atol") return c.atol ? fmt(*c.atol) : "auto";
  if (key == "dt_out") return c.dt_out ? fmt(*c.dt_out) : "auto";
  if (key == "wavelength_nm") return fmt(c.wavelength_nm);
  if (key == "para_atoms") return fmt(c.para_atoms);
  if (key == "eta0_cm3") return fmt(c.eta0_cm3);
  if (key == "ar_grid") return fmt_list(c.ar_grid);
  if (key == "w0_um_grid") return fmt_list(c.w0_um_grid);
  if (key == "slices") return std::to_string(c.slices);
  if (key == "p_max") return std::to_string(c.p_max);
  throw ConfigError("unknown key: " + key);
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  const auto& keys = config_keys();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key: " + key);
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

RunConfig load_config(std::istream& in, RunConfig base) {
  for (const auto& [k, v] : parse_key_values(in)) set_key(base, k, v);
  return base;
}

std::string dump_config(const RunConfig& c) {
  std::string s;
  for (const auto& k : config_keys()) s += k + "=" + get_key(c, k) + "\n";
  return s;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : config_keys()) j[k] = get_key(c, k);
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  for (const auto& [k, v] : j.items()) set_key(c, k, v.is_string() ? v.get<std::string>() : v.dump());
  return c;
}

Series read_series(std::istream& in) {
  Series s;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory file");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(trim(c));
  }
  const auto it_t = std::find(cols.begin(), cols.end(), "t");
  const auto it_db = std::find(cols.begin(), cols.end(), "zeta_m_dB");
  if (it_t == cols.end() || it_db == cols.end()) throw ConfigError("trajectory file lacks t or zeta_m_dB column");
  const auto it = static_cast<std::size_t>(it_t - cols.begin());
  const auto idb = static_cast<std::size_t>(it_db - cols.begin());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() <= std::max(it, idb)) throw ConfigError("malformed trajectory row");
    s.t.push_back(to_double("t", trim(f[it])));
    s.db.push_back(to_double("zeta_m_dB", trim(f[idb])));
  }
  return s;
}

CompareReport compare_series(const Series& a, const Series& b) {
  if (a.t.empty() || b.t.empty()) throw ConfigError("compare: empty series");
  auto spacing = [](const Series& s) {
    double d = 0;
    for (std::size_t i = 1; i < s.t.size(); ++i) d = std::max(d, s.t[i] - s.t[i - 1]);
    return d;
  };
  const double tol = std::max(spacing(a), spacing(b)) + 1e-12;
  CompareReport r;
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 1; i < a.db.size(); ++i)
    if (a.db[i] > a.db[ia]) ia = i;
  for (std::size_t i = 1; i < b.db.size(); ++i)
    if (b.db[i] > b.db[ib]) ib = i;
  r.peak_a_db = a.db[ia];
  r.peak_b_db = b.db[ib];
  r.t_peak_a = a.t[ia];
  r.t_peak_b = b.t[ib];
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    while (j + 1 < b.t.size() && std::abs(b.t[j + 1] - a.t[i]) <= std::abs(b.t[j] - a.t[i])) ++j;
    if (std::abs(b.t[j] - a.t[i]) > tol) continue;
    ++r.matched;
    r.max_abs_diff_db = std::max(r.max_abs_diff_db, std::abs(a.db[i] - b.db[j]));
  }
  if (r.matched == 0) throw ConfigError("compare: time grids do not overlap");
  return r;
}

}  // namespace squeeze::cli
