#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "squeeze/params.hpp"

namespace squeeze::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// flat key=value run description; units at the boundary: time 1/γ_s, lengths μm, densities cm⁻³
struct RunConfig {
  std::string kind = "simulate";
  ProtocolParams params;
  std::string protocol = "qnd";
  std::string prep = "scs";
  std::string target = "scs";
  std::optional<double> alpha;
  std::string keep_transfer = "auto";  // auto | true | false
  double t_max = 3.0;
  int record_every = 1;
  std::string out = "out";
  std::uint64_t seed = 1;
  int n_seeds = 128;
  int max_iterations = 1500;
  // unset: module defaults
  std::optional<double> rtol, atol, dt_out;
  // paraxial
  double wavelength_nm = 852;
  double para_atoms = 9.8e6;
  double eta0_cm3 = 5e11;
  std::vector<double> ar_grid = {256};
  std::vector<double> w0_um_grid = {31};
  int slices = 21;
  int p_max = 2;
};

// all keys in canonical order
const std::vector<std::string>& config_keys();
void set_key(RunConfig& c, const std::string& key, const std::string& value);
std::string get_key(const RunConfig& c, const std::string& key);

// key=value lines, '#' comments; unknown key -> ConfigError naming the key
std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in);
RunConfig load_config(std::istream& in, RunConfig base = {});
std::string dump_config(const RunConfig& c);

nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

struct CompareReport {
  std::size_t matched = 0;
  double max_abs_diff_db = 0;
  double peak_a_db = 0, peak_b_db = 0;
  double t_peak_a = 0, t_peak_b = 0;
  double peak_diff_db() const { return peak_a_db - peak_b_db; }
};

struct Series {
  std::vector<double> t, db;
};
// reads the t and zeta_m_dB columns of a trajectory CSV
Series read_series(std::istream& in);
// nearest-time resampling of b onto a
CompareReport compare_series(const Series& a, const Series& b);

}  // namespace squeeze::cli
