#pragma once

// JSON configuration loading and machine-readable result emission.
//
// Config schema (schema_version 1): complex numbers are [re, im] pairs,
// angles are radians, times seconds, rates s^-1.
//
// {
//   "schema_version": 1,
//   "crystal":    { "etas": [[re, im], ...], "selected_index": 0 },
//   "experiment": { "n0": 1.0, "phi": 0.0,
//                   "sigma": 0.0
//                   | "sigma_parts": {"l_s":..,"k_j0":..,"l_i":..,"k_k0":..} },
//   "timeline":   { "tau_pcoh":.., "n_refr":.., "d_max":..,
//                   "duration":.., "seed": 0 },
//   "scan":       { "delta_min":.., "delta_max":.., "steps": 32 },
//   "output":     { "format": "json"|"csv", "path": "..." }
// }
//
// "experiment", "timeline", "scan", "output" are optional; each subcommand
// checks for the sections it needs.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcsim/errors.hpp"
#include "dcsim/experiment.hpp"
#include "dcsim/fock_core.hpp"
#include "dcsim/timeline.hpp"

namespace dcsim {

using nlohmann::json;

struct CrystalConfig {
  std::vector<Complex> etas;
  ModeId selected_index = 0;
};

struct ExperimentSection {
  double n0 = 0.0;
  double sigma = 0.0;
  double phi = 0.0;
  std::optional<SigmaParts> sigma_parts;
};

struct TimelineSection {
  double tau_pcoh = 0.0;
  double n_refr = 0.0;
  double d_max = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 0;
};

struct ScanSection {
  double delta_min = 0.0;
  double delta_max = 0.0;
  std::size_t steps = 0;
};

enum class OutputFormat { Json, Csv };

struct OutputSection {
  OutputFormat format = OutputFormat::Json;
  std::string path;  // empty = stdout
};

struct RunConfig {
  int schema_version = 1;
  CrystalConfig crystal;
  std::optional<ExperimentSection> experiment;
  std::optional<TimelineSection> timeline;
  std::optional<ScanSection> scan;
  OutputSection output;
};

namespace detail {

inline const json& require_field(const json& j, const std::string& path,
                                 const std::string& key) {
  if (!j.contains(key)) throw ConfigError(path + "." + key, "missing field");
  return j.at(key);
}

inline double require_number(const json& j, const std::string& path,
                             const std::string& key) {
  const json& v = require_field(j, path, key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
  return v.get<double>();
}

inline double require_positive(const json& j, const std::string& path,
                               const std::string& key) {
  const double v = require_number(j, path, key);
  if (!(v > 0.0)) throw ConfigError(path + "." + key, "must be positive");
  return v;
}

inline Complex parse_complex(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(path, "complex values are [re, im] pairs");
  return Complex(v[0].get<double>(), v[1].get<double>());
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
  RunConfig cfg;
  if (!root.contains("schema_version") ||
      !root.at("schema_version").is_number_integer() ||
      root.at("schema_version").get<int>() != 1)
    throw ConfigError("schema_version", "must be the integer 1");

  const json& crystal = detail::require_field(root, "", "crystal");
  const json& etas = detail::require_field(crystal, ".crystal", "etas");
  if (!etas.is_array() || etas.empty())
    throw ConfigError("crystal.etas", "must be a non-empty array");
  for (std::size_t i = 0; i < etas.size(); ++i)
    cfg.crystal.etas.push_back(detail::parse_complex(
        etas[i], "crystal.etas[" + std::to_string(i) + "]"));
  const json& sel = detail::require_field(crystal, ".crystal", "selected_index");
  if (!sel.is_number_integer() || sel.get<long long>() < 0)
    throw ConfigError("crystal.selected_index", "must be a non-negative integer");
  cfg.crystal.selected_index = sel.get<ModeId>();
  if (cfg.crystal.selected_index >= cfg.crystal.etas.size())
    throw ConfigError("crystal.selected_index",
                      "out of range (have " +
                          std::to_string(cfg.crystal.etas.size()) + " modes)");
  for (std::size_t i = 0; i < cfg.crystal.etas.size(); ++i) {
    const Complex& e = cfg.crystal.etas[i];
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
      throw ConfigError("crystal.etas[" + std::to_string(i) + "]",
                        "must be finite");
  }

  if (root.contains("experiment")) {
    const json& exp = root.at("experiment");
    ExperimentSection e;
    e.n0 = detail::require_positive(exp, "experiment", "n0");
    e.phi = detail::require_number(exp, "experiment", "phi");
    if (exp.contains("sigma_parts")) {
      const json& parts = exp.at("sigma_parts");
      SigmaParts sp;
      sp.l_s = detail::require_number(parts, "experiment.sigma_parts", "l_s");
      sp.k_j0 = detail::require_number(parts, "experiment.sigma_parts", "k_j0");
      sp.l_i = detail::require_number(parts, "experiment.sigma_parts", "l_i");
      sp.k_k0 = detail::require_number(parts, "experiment.sigma_parts", "k_k0");
      e.sigma_parts = sp;
      e.sigma = sp.sigma();
      if (exp.contains("sigma")) {
        e.sigma = detail::require_number(exp, "experiment", "sigma");
        const double derived = sp.sigma();
        if (std::abs(derived - e.sigma) >
            1e-12 * std::max(1.0, std::abs(derived)))
          throw ConfigError("experiment.sigma",
                            "inconsistent with sigma_parts");
      }
    } else {
      e.sigma = detail::require_number(exp, "experiment", "sigma");
    }
    cfg.experiment = e;
  }

  if (root.contains("timeline")) {
    const json& tl = root.at("timeline");
    TimelineSection t;
    t.tau_pcoh = detail::require_positive(tl, "timeline", "tau_pcoh");
    t.n_refr = detail::require_positive(tl, "timeline", "n_refr");
    t.d_max = detail::require_positive(tl, "timeline", "d_max");
    t.duration = detail::require_positive(tl, "timeline", "duration");
    const json& seed = detail::require_field(tl, "timeline", "seed");
    if (!seed.is_number_integer() || seed.get<long long>() < 0)
      throw ConfigError("timeline.seed", "must be a non-negative integer");
    t.seed = seed.get<std::uint64_t>();
    cfg.timeline = t;
  }

  if (root.contains("scan")) {
    const json& sc = root.at("scan");
    ScanSection s;
    s.delta_min = detail::require_number(sc, "scan", "delta_min");
    s.delta_max = detail::require_number(sc, "scan", "delta_max");
    const json& steps = detail::require_field(sc, "scan", "steps");
    if (!steps.is_number_integer() || steps.get<long long>() < 1)
      throw ConfigError("scan.steps", "must be a positive integer");
    s.steps = steps.get<std::size_t>();
    if (!(s.delta_max >= s.delta_min))
      throw ConfigError("scan.delta_max", "must be >= delta_min");
    cfg.scan = s;
  }

  if (root.contains("output")) {
    const json& out = root.at("output");
    if (out.contains("format")) {
      const std::string f = out.at("format").get<std::string>();
      if (f == "json")
        cfg.output.format = OutputFormat::Json;
      else if (f == "csv")
        cfg.output.format = OutputFormat::Csv;
      else
        throw ConfigError("output.format", "must be \"json\" or \"csv\"");
    }
    if (out.contains("path")) cfg.output.path = out.at("path").get<std::string>();
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(root);
}

// ---- result emission ----

inline json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const SectorState& s) {
  json pairs = json::array();
  for (const Complex& a : s.pair_amps) pairs.push_back(to_json(a));
  return json{{"uv_amp", to_json(s.uv_amp)}, {"pair_amps", pairs}};
}

inline json to_json(const DcCoefficients& c) {
  json alpha = json::array();
  json gamma = json::array();
  for (const Complex& a : c.alpha) alpha.push_back(to_json(a));
  for (const Complex& g : c.gamma) gamma.push_back(to_json(g));
  return json{{"beta", c.beta},
              {"xi", c.xi},
              {"selected", c.selected},
              {"alpha", alpha},
              {"gamma", gamma}};
}

inline json to_json(const ExperimentARates& r) {
  return json{{"q_prime", r.q_prime}, {"q", r.q}, {"q_total", r.q_total}};
}

inline json to_json(const ExperimentBResult& r) {
  json nonsel = json::array();
  for (double p : r.prob_nonselected) nonsel.push_back(p);
  return json{{"input_state", to_json(r.input_state)},
              {"output_state", to_json(r.output_state)},
              {"prob_c", r.prob_c},
              {"prob_selected", r.prob_selected},
              {"prob_nonselected", nonsel},
              {"prob_nonselected_total", r.prob_nonselected_total},
              {"rate_c", r.rate_c},
              {"rate_selected", r.rate_selected},
              {"rate_nonselected_total", r.rate_nonselected_total},
              {"balance_residual", r.balance_residual}};
}

inline json to_json(const Timescales& t) {
  return json{{"t_mean", t.t_mean},
              {"delta", t.delta},
              {"ratio", t.ratio},
              {"inequality_holds", t.inequality_holds}};
}

inline json to_json(const TimelineStats& s) {
  return json{{"n_incoming", s.n_incoming},
              {"n_born", s.n_born},
              {"n_overlapping_born", s.n_overlapping_born},
              {"overlap_fraction", s.overlap_fraction},
              {"t_mean_measured", s.t_mean_measured}};
}

inline json to_json(const McResult& r) {
  json channels = json::array();
  for (const ChannelEstimate& c : r.channels)
    channels.push_back(json{{"channel", c.channel},
                            {"count", c.count},
                            {"rate", c.rate},
                            {"stderr", c.stderr_rate},
                            {"analytic_rate", c.analytic_rate}});
  return json{{"n_trials", r.n_trials},
              {"duration", r.duration},
              {"channels", channels}};
}

namespace detail {

// Locale-independent float formatting: shortest round-trip, '.' separator.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV column order fixed: delta,rate_selected,rate_c. LF line endings.
inline std::string scan_to_csv(const std::vector<ScanPoint>& points) {
  std::string out = "delta,rate_selected,rate_c\n";
  for (const ScanPoint& p : points) {
    out += detail::format_double(p.delta);
    out += ',';
    out += detail::format_double(p.rate_selected);
    out += ',';
    out += detail::format_double(p.rate_c);
    out += '\n';
  }
  return out;
}

inline std::string events_to_csv(const std::vector<TimelineEvent>& events) {
  std::string out = "t_start,duration,origin\n";
  for (const TimelineEvent& e : events) {
    out += detail::format_double(e.t_start);
    out += ',';
    out += detail::format_double(e.duration);
    out += ',';
    out += to_string(e.origin);
    out += '\n';
  }
  return out;
}

inline json scan_to_json(const std::vector<ScanPoint>& points) {
  json arr = json::array();
  for (const ScanPoint& p : points)
    arr.push_back(json{{"delta", p.delta},
                       {"rate_selected", p.rate_selected},
                       {"rate_c", p.rate_c}});
  return arr;
}

}  // namespace dcsim
