#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ramsey/config.hpp"
#include "ramsey/sim.hpp"

namespace ramsey {

struct ConfigError : std::runtime_error {
  std::string key;
  int line = 0; // 1-based; 0 when not tied to a line
  ConfigError(const std::string& message, std::string key_path = "", int line_no = 0);
};

// sim.* keys as written in a config document; zeros mean "resolve a default
// against the laser config" where a default exists.
struct SimSettings {
  double dt = 0.0;       // auto: min(tau, 2/kappa) / 40
  double duration = 0.0; // required before simulating
  std::uint64_t seed = 0;
  std::size_t output_stride = 1;
  std::string injection_mode = "auto"; // auto | regular | poisson
  double dipole_seed = 0.5;
  bool alternate_drift_sign = false;
  std::string drift_frame = "atomic"; // atomic | field
  // Detune the cavity to balance the reactive drift-region dipole at the
  // configured operating point (holds fringe-slope operation in place).
  bool compensate_pulling = false;
};

struct RunConfig {
  LaserConfig laser;
  SimSettings sim;
};

// Flat "dotted.key = value" text, '#' comments. A "preset = <name>" line
// (first, if present) supplies every default; later keys override. Unknown
// keys and malformed values are rejected with the key path and line number.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical echo: fixed key order, 17 significant digits so that
// parse(emit(c)) reproduces c exactly.
std::string emit_config(const RunConfig& config);

// Assigns one laser parameter by dotted path; unknown path throws ConfigError.
void set_laser_key(LaserConfig& config, std::string_view key, double value);

// Resolves the auto fields into a runnable SimConfig. The injection mode
// follows pump.p, which must sit at one of the endpoints (intermediate p is
// analytic-only).
SimConfig make_sim_config(const RunConfig& config);

std::string format_g9(double value);  // %.9g, data files
std::string format_g17(double value); // %.17g, config echo

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Flat key = value manifest; file digests recorded as digest.<name> entries.
struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(std::string key, std::string value);
  void add_file_digest(const std::string& label, const std::string& path);
  std::string text() const;
};

} // namespace ramsey
