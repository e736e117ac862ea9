#ifndef SNLS_CONFIG_HPP
#define SNLS_CONFIG_HPP

#include "snls/grid.hpp"
#include "snls/groundstate.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace snls {

inline constexpr const char* kToolVersion = "0.1.0";

/// Config text violating the schema; lists every offending key.
class ValidationError : public ConfigurationError {
public:
  ValidationError(const std::string& what, std::vector<std::string> keys = {})
      : ConfigurationError(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

private:
  std::vector<std::string> keys_;
};

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"grid", {"mode", "points", "extent", "z_points", "z_extent"}},
      {"physics", {"gamma", "mu", "omega"}},
      {"initial", {"kind", "amplitude_u", "amplitude_v", "width", "scale", "phase_v", "snapshot"}},
      {"groundstate", {"points", "extent", "tol", "max_iter"}},
      {"evolve",
       {"dt", "t_end", "output_stride", "adapt", "adapt_trigger", "dt_floor", "blowup_trigger", "epsilon",
        "monitors", "virial_R", "local_mass_R", "morawetz_R", "morawetz_sigma", "local_lp_R", "format"}},
      {"classify", {"symmetry", "band"}},
      {"weights", {"R", "sigma", "points", "extent"}},
      {"report", {"series"}},
  };
  return schema;
}

/// Flat INI configuration: [section] key = value.
class Config {
public:
  static Config parse(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
      boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError(std::string("config parse error: ") + e.what());
    }
    Config c;
    std::vector<std::string> unknown;
    for (const auto& [section, body] : tree) {
      auto it = config_schema().find(section);
      if (body.empty()) {
        if (!body.data().empty() || it == config_schema().end()) unknown.push_back(section);
        continue;
      }
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (it == config_schema().end() || !it->second.contains(key)) unknown.push_back(full);
        else c.values_[full] = trim(value.get_value<std::string>());
      }
    }
    if (!unknown.empty()) {
      std::string msg = "unknown config keys:";
      for (const auto& k : unknown) msg += " " + k;
      throw ValidationError(msg, unknown);
    }
    if (c.values_.empty()) throw ValidationError("config is empty");
    return c;
  }

  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
  }
  double get_double(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      const double d = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument(*v);
      return d;
    } catch (const std::exception&) {
      throw ValidationError("config key " + key + " is not a number: " + *v, {key});
    }
  }
  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    const double d = get_double(key, static_cast<double>(fallback));
    if (d < 0.0 || d != std::floor(d)) throw ValidationError("config key " + key + " must be a non-negative integer", {key});
    return static_cast<std::size_t>(d);
  }
  bool get_bool(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ValidationError("config key " + key + " is not a boolean: " + *v, {key});
  }
  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto v = raw(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  /// Sorted "section.key=value" lines; the digest input.
  std::string canonical_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

private:
  static std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

  std::map<std::string, std::string> values_;
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

/// Grid from [grid]; mode radial | cartesian | cylindrical.
inline GridSpec grid_from_config(const Config& c) {
  const std::string mode = c.get_string("grid.mode", "radial");
  const std::size_t n = c.get_size("grid.points", mode == "cartesian" ? 64 : 1024);
  const double L = c.get_double("grid.extent", mode == "cartesian" ? 8.0 : 30.0);
  if (mode == "radial") return GridSpec::radial(L, n);
  if (mode == "cartesian") return GridSpec::cartesian(L, n);
  if (mode == "cylindrical")
    return GridSpec::cylindrical(L, n, c.get_double("grid.z_extent", L), c.get_size("grid.z_points", n));
  throw ValidationError("unknown grid.mode '" + mode + "'", {"grid.mode"});
}

struct RunManifest {
  std::string config_digest;
  GridSpec grid;
  double gamma = 3.0;
  double mu = 9.0;
  std::optional<GroundStateConstants> constants;
  std::vector<std::string> outputs;
  std::string tool_version = kToolVersion;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["config_digest"] = config_digest;
    j["grid"] = {{"mode", to_string(grid.mode())},
                 {"points", {grid.points(0), grid.points(1), grid.points(2)}},
                 {"extent", {grid.extent(0), grid.extent(1), grid.extent(2)}}};
    j["gamma"] = gamma;
    j["mu"] = mu;
    if (constants) {
      j["ground_state"] = {{"gamma", constants->gamma}, {"K_gs", constants->K_gs}, {"M_gs", constants->M_gs},
                           {"E_gs", constants->E_gs},   {"P_gs", constants->P_gs}, {"C_opt", constants->C_opt}};
    }
    j["outputs"] = outputs;
    return j;
  }
};

} // namespace snls

#endif
