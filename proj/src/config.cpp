#include "eitlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace eitlab {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_known_keys(const json& obj, const std::string& section,
                      const std::set<std::string>& known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("unknown key '" + section + "." + it.key() + "'");
    }
  }
}

double get_num(const json& obj, const std::string& section,
               const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("key '" + section + "." + key + "' must be a number");
  }
  return v.get<double>();
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& c) {
  require(c.gas.diffusion_coefficient > 0, "gas.diffusion_coefficient must be > 0");
  require(c.gas.atomic_mass > 0, "gas.atomic_mass must be > 0");
  require(c.gas.cell_temperature > 0, "gas.cell_temperature must be > 0");
  require(c.gas.gyromagnetic_ratio > 0, "gas.gyromagnetic_ratio must be > 0");
  require(c.cell.length > 0, "cell.length must be > 0");
  require(c.beam.waist_radius > 0, "beam.waist_radius must be > 0");
  require(c.cell.radius > c.beam.waist_radius,
          "cell.radius must exceed beam.waist_radius");
  require(c.beam.total_power > 0, "beam.total_power must be > 0");
  require(c.optics.omega_c > 0, "optics.omega_c must be > 0");
  require(c.optics.omega_p >= 0, "optics.omega_p must be >= 0");
  require(c.optics.gamma > 0, "optics.gamma must be > 0");
  require(c.optics.gamma_bc >= 0, "optics.gamma_bc must be >= 0");
  require(c.magnetics.b0 >= 0, "magnetics.b0 must be >= 0");

  std::vector<std::string> warnings;
  if (c.optics.omega_p > kWeakProbeWarnRatio * c.optics.omega_c) {
    std::ostringstream os;
    os << "weak-probe assumption strained: |omega_p|/|omega_c| = "
       << c.optics.omega_p / c.optics.omega_c << " > " << kWeakProbeWarnRatio;
    warnings.push_back(os.str());
  }
  return warnings;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "ne5torr") {
    c.gas.diffusion_coefficient = 35.7;
    c.gas.cell_temperature = 318.15;  // 45 C
    c.optics.gamma = hz_to_rad(55e6);
    // pump rate omega_c^2/gamma = 2*pi*10 kHz at the default 50 uW
    c.optics.omega_c = std::sqrt(hz_to_rad(10e3) * c.optics.gamma);
    c.optics.omega_p = 0.05 * c.optics.omega_c;
    c.optics.gamma_bc = hz_to_rad(50.0);
  } else if (name == "ne100torr") {
    c.gas.diffusion_coefficient = 1.78;
    c.gas.cell_temperature = 328.15;  // 55 C
    c.optics.gamma = hz_to_rad(986e6);
    c.optics.omega_c = std::sqrt(hz_to_rad(10e3) * c.optics.gamma);
    c.optics.omega_p = 0.05 * c.optics.omega_c;
    c.optics.gamma_bc = hz_to_rad(50.0);
  } else if (name == "storage") {
    // Stored-light runs: hotter cell, ground-state decoherence chosen so the
    // pure-decay linewidth gamma_bc/pi is 600 Hz.
    c.gas.diffusion_coefficient = 35.7;
    c.gas.cell_temperature = 338.15;  // 65 C
    c.optics.gamma = hz_to_rad(55e6);
    c.optics.omega_c = std::sqrt(hz_to_rad(10e3) * c.optics.gamma);
    c.optics.omega_p = 0.05 * c.optics.omega_c;
    c.optics.gamma_bc = 600.0 * kPi;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  validate(c);
  return c;
}

std::vector<std::string> preset_names() {
  return {"ne5torr", "ne100torr", "storage"};
}

ExperimentConfig config_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, true, /*ignore_comments=*/false);
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  check_known_keys(doc, "<root>", {"gas", "cell", "beam", "optics", "magnetics"});

  ExperimentConfig c;
  if (doc.contains("gas")) {
    const json& g = doc.at("gas");
    check_known_keys(g, "gas",
                     {"diffusion_coefficient_cm2_s", "atomic_mass_kg",
                      "temperature_k", "gyromagnetic_ratio_hz_per_g"});
    c.gas.diffusion_coefficient =
        get_num(g, "gas", "diffusion_coefficient_cm2_s", c.gas.diffusion_coefficient);
    c.gas.atomic_mass = get_num(g, "gas", "atomic_mass_kg", c.gas.atomic_mass);
    c.gas.cell_temperature = get_num(g, "gas", "temperature_k", c.gas.cell_temperature);
    c.gas.gyromagnetic_ratio =
        get_num(g, "gas", "gyromagnetic_ratio_hz_per_g", c.gas.gyromagnetic_ratio);
  }
  if (doc.contains("cell")) {
    const json& g = doc.at("cell");
    check_known_keys(g, "cell", {"length_cm", "radius_cm"});
    c.cell.length = get_num(g, "cell", "length_cm", c.cell.length);
    c.cell.radius = get_num(g, "cell", "radius_cm", c.cell.radius);
  }
  if (doc.contains("beam")) {
    const json& g = doc.at("beam");
    check_known_keys(g, "beam", {"waist_radius_cm", "total_power_w"});
    c.beam.waist_radius = get_num(g, "beam", "waist_radius_cm", c.beam.waist_radius);
    c.beam.total_power = get_num(g, "beam", "total_power_w", c.beam.total_power);
  }
  if (doc.contains("optics")) {
    const json& g = doc.at("optics");
    check_known_keys(g, "optics",
                     {"omega_c_rad_s", "omega_p_rad_s", "gamma_rad_s",
                      "gamma_bc_rad_s", "delta_rad_s"});
    c.optics.omega_c = get_num(g, "optics", "omega_c_rad_s", c.optics.omega_c);
    c.optics.omega_p = get_num(g, "optics", "omega_p_rad_s", c.optics.omega_p);
    c.optics.gamma = get_num(g, "optics", "gamma_rad_s", c.optics.gamma);
    c.optics.gamma_bc = get_num(g, "optics", "gamma_bc_rad_s", c.optics.gamma_bc);
    c.optics.delta = get_num(g, "optics", "delta_rad_s", c.optics.delta);
  }
  if (doc.contains("magnetics")) {
    const json& g = doc.at("magnetics");
    check_known_keys(g, "magnetics", {"b0_g", "gradient_g_per_cm"});
    c.magnetics.b0 = get_num(g, "magnetics", "b0_g", c.magnetics.b0);
    c.magnetics.gradient = get_num(g, "magnetics", "gradient_g_per_cm", c.magnetics.gradient);
  }
  validate(c);
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["gas"] = {{"diffusion_coefficient_cm2_s", c.gas.diffusion_coefficient},
                {"atomic_mass_kg", c.gas.atomic_mass},
                {"temperature_k", c.gas.cell_temperature},
                {"gyromagnetic_ratio_hz_per_g", c.gas.gyromagnetic_ratio}};
  doc["cell"] = {{"length_cm", c.cell.length}, {"radius_cm", c.cell.radius}};
  doc["beam"] = {{"waist_radius_cm", c.beam.waist_radius},
                 {"total_power_w", c.beam.total_power}};
  doc["optics"] = {{"omega_c_rad_s", c.optics.omega_c},
                   {"omega_p_rad_s", c.optics.omega_p},
                   {"gamma_rad_s", c.optics.gamma},
                   {"gamma_bc_rad_s", c.optics.gamma_bc},
                   {"delta_rad_s", c.optics.delta}};
  doc["magnetics"] = {{"b0_g", c.magnetics.b0},
                      {"gradient_g_per_cm", c.magnetics.gradient}};
  return doc.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return config_from_json(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

ExperimentConfig with_power_scaled(ExperimentConfig config, double factor) {
  if (factor <= 0) throw ConfigError("power scale factor must be > 0");
  config.beam.total_power *= factor;
  config.optics.omega_c *= std::sqrt(factor);
  config.optics.omega_p *= std::sqrt(factor);
  return config;
}

double mean_thermal_speed(double mass_kg, double temperature_k) {
  if (mass_kg <= 0) throw std::domain_error("mean_thermal_speed: mass must be > 0");
  if (temperature_k <= 0)
    throw std::domain_error("mean_thermal_speed: temperature must be > 0");
  const double v_m_per_s =
      std::sqrt(8.0 * kBoltzmann * temperature_k / (kPi * mass_kg));
  return 100.0 * v_m_per_s;
}

double single_pass_diffusion_linewidth(const ExperimentConfig& config) {
  validate(config);
  const double w = config.beam.waist_radius;
  const double tau_d =
      kDiffusionModeKappa * w * w / config.gas.diffusion_coefficient;
  return 1.0 / (kPi * tau_d);
}

}  // namespace eitlab
