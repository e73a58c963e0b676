#include "ramsey/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ramsey {

ConfigError::ConfigError(const std::string& message, std::string key_path, int line_no)
    : std::runtime_error(message), key(std::move(key_path)), line(line_no) {}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& value, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("value for '" + key + "' is not a number: '" + value + "'", key, line);
  }
}

std::uint64_t parse_u64(const std::string& value, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("value for '" + key + "' is not an unsigned integer: '" + value + "'",
                      key, line);
  }
}

bool parse_bool(const std::string& value, const std::string& key, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("value for '" + key + "' is not a boolean: '" + value + "'", key, line);
}

} // namespace

void set_laser_key(LaserConfig& c, std::string_view key, double value) {
  if (key == "cavity.kappa") c.cavity.kappa = value;
  else if (key == "cavity.g") c.cavity.g = value;
  else if (key == "cavity.mode_volume") c.cavity.mode_volume = value;
  else if (key == "cavity.mode_frequency") c.cavity.mode_frequency = value;
  else if (key == "atom.gamma_a") c.atom.gamma_a = value;
  else if (key == "atom.gamma_a_prime") c.atom.gamma_a_prime = value;
  else if (key == "atom.gamma_b") c.atom.gamma_b = value;
  else if (key == "atom.gamma_ab") c.atom.gamma_ab = value;
  else if (key == "geometry.tau") c.geometry.tau = value;
  else if (key == "geometry.T_drift") c.geometry.T_drift = value;
  else if (key == "geometry.omega_R") c.geometry.omega_R = value;
  else if (key == "geometry.delta2") c.geometry.delta2 = value;
  else if (key == "pump.R") c.pump.R = value;
  else if (key == "pump.p") c.pump.p = value;
  else
    throw ConfigError("unknown parameter path '" + std::string(key) + "'",
                      std::string(key));
}

RunConfig parse_config(const std::string& text) {
  RunConfig rc;
  bool preset_loaded = false;
  bool any_key_seen = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", "", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("expected 'key = value'", key, line_no);

    if (key == "preset") {
      if (any_key_seen || preset_loaded)
        throw ConfigError("'preset' must be the first entry", key, line_no);
      if (value == "ca40") {
        rc.laser = ca40_preset();
      } else {
        throw ConfigError("unknown preset '" + value + "'", key, line_no);
      }
      preset_loaded = true;
      continue;
    }
    any_key_seen = true;

    if (key.rfind("sim.", 0) == 0) {
      if (key == "sim.dt") rc.sim.dt = parse_double(value, key, line_no);
      else if (key == "sim.duration") rc.sim.duration = parse_double(value, key, line_no);
      else if (key == "sim.seed") rc.sim.seed = parse_u64(value, key, line_no);
      else if (key == "sim.output_stride")
        rc.sim.output_stride = static_cast<std::size_t>(parse_u64(value, key, line_no));
      else if (key == "sim.injection_mode") {
        if (value != "auto" && value != "regular" && value != "poisson")
          throw ConfigError("sim.injection_mode must be auto, regular or poisson", key,
                            line_no);
        rc.sim.injection_mode = value;
      } else if (key == "sim.dipole_seed")
        rc.sim.dipole_seed = parse_double(value, key, line_no);
      else if (key == "sim.alternate_drift_sign")
        rc.sim.alternate_drift_sign = parse_bool(value, key, line_no);
      else if (key == "sim.drift_frame") {
        if (value != "atomic" && value != "field")
          throw ConfigError("sim.drift_frame must be atomic or field", key, line_no);
        rc.sim.drift_frame = value;
      } else if (key == "sim.compensate_pulling")
        rc.sim.compensate_pulling = parse_bool(value, key, line_no);
      else
        throw ConfigError("unknown key '" + key + "'", key, line_no);
      continue;
    }

    try {
      set_laser_key(rc.laser, key, parse_double(value, key, line_no));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()), key, line_no);
    }
  }
  return rc;
}

RunConfig parse_config_file(const std::string& path) {
  return parse_config(read_text_file(path));
}

std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string format_g17(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string emit_config(const RunConfig& rc) {
  std::ostringstream out;
  auto put = [&](const char* key, double v) { out << key << " = " << format_g17(v) << "\n"; };
  put("cavity.kappa", rc.laser.cavity.kappa);
  put("cavity.g", rc.laser.cavity.g);
  if (rc.laser.cavity.mode_volume) put("cavity.mode_volume", *rc.laser.cavity.mode_volume);
  if (rc.laser.cavity.mode_frequency)
    put("cavity.mode_frequency", *rc.laser.cavity.mode_frequency);
  put("atom.gamma_a", rc.laser.atom.gamma_a);
  put("atom.gamma_a_prime", rc.laser.atom.gamma_a_prime);
  put("atom.gamma_b", rc.laser.atom.gamma_b);
  put("atom.gamma_ab", rc.laser.atom.gamma_ab);
  put("geometry.tau", rc.laser.geometry.tau);
  put("geometry.T_drift", rc.laser.geometry.T_drift);
  put("geometry.omega_R", rc.laser.geometry.omega_R);
  put("geometry.delta2", rc.laser.geometry.delta2);
  put("pump.R", rc.laser.pump.R);
  put("pump.p", rc.laser.pump.p);
  if (rc.sim.dt > 0.0) put("sim.dt", rc.sim.dt);
  if (rc.sim.duration > 0.0) put("sim.duration", rc.sim.duration);
  out << "sim.seed = " << rc.sim.seed << "\n";
  out << "sim.output_stride = " << rc.sim.output_stride << "\n";
  out << "sim.injection_mode = " << rc.sim.injection_mode << "\n";
  put("sim.dipole_seed", rc.sim.dipole_seed);
  out << "sim.alternate_drift_sign = " << (rc.sim.alternate_drift_sign ? "true" : "false")
      << "\n";
  out << "sim.drift_frame = " << rc.sim.drift_frame << "\n";
  out << "sim.compensate_pulling = " << (rc.sim.compensate_pulling ? "true" : "false")
      << "\n";
  return out.str();
}

SimConfig make_sim_config(const RunConfig& rc) {
  validate(rc.laser);

  SimConfig sc;
  sc.laser = rc.laser;
  sc.dt = rc.sim.dt > 0.0
              ? rc.sim.dt
              : std::min(rc.laser.geometry.tau, 2.0 / rc.laser.cavity.kappa) / 40.0;
  if (!(rc.sim.duration > 0.0))
    throw ConfigError("sim.duration is required for simulation", "sim.duration");
  sc.duration = rc.sim.duration;
  sc.seed = rc.sim.seed;
  sc.output_stride = rc.sim.output_stride;
  sc.dipole_seed = rc.sim.dipole_seed;
  sc.alternate_drift_sign = rc.sim.alternate_drift_sign;
  sc.drift_frame = rc.sim.drift_frame == "field" ? DriftFrame::field : DriftFrame::atomic;
  if (rc.sim.compensate_pulling) sc.cavity_detuning = reactive_compensation(rc.laser);

  if (rc.sim.injection_mode == "regular") {
    sc.injection_mode = InjectionMode::regular;
  } else if (rc.sim.injection_mode == "poisson") {
    sc.injection_mode = InjectionMode::poisson;
  } else {
    const double p = rc.laser.pump.p;
    if (p == 1.0) sc.injection_mode = InjectionMode::regular;
    else if (p == 0.0) sc.injection_mode = InjectionMode::poisson;
    else
      throw ConfigError(
          "pump.p must be 0 or 1 to simulate (intermediate p is analytic-only); "
          "set sim.injection_mode explicitly to override",
          "pump.p");
  }
  return sc;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Manifest::add(std::string key, std::string value) {
  entries.emplace_back(std::move(key), std::move(value));
}

void Manifest::add_file_digest(const std::string& label, const std::string& path) {
  entries.emplace_back("digest." + label, fnv1a64_hex(read_text_file(path)));
}

std::string Manifest::text() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
  return out.str();
}

} // namespace ramsey
