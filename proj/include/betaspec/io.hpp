#pragma once

#include "betaspec/cantor.hpp"
#include "betaspec/parallel.hpp"
#include "betaspec/parry_approx.hpp"
#include "betaspec/spectrum.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace betaspec {

using json = nlohmann::ordered_json;

enum class OutputFormat { json, csv };

struct RunConfig {
  int precision_bits = 128;
  double enum_budget = 1e8;
  std::uint64_t rng_seed = 0;
  OutputFormat output_format = OutputFormat::json;
  std::uint64_t growth_factor = 16;
  unsigned threads = default_threads();

  void validate() const {
    if (precision_bits < 64) throw input_error("precision_bits must be at least 64");
    if (!(enum_budget >= 1)) throw input_error("enum_budget must be at least 1");
    if (growth_factor < 1) throw input_error("growth_factor must be at least 1");
    if (threads < 1) throw input_error("threads must be at least 1");
  }

  ComputeOptions compute() const { return {enum_budget, threads}; }
};

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline OutputFormat parse_format(const std::string& v) {
  if (v == "json") return OutputFormat::json;
  if (v == "csv") return OutputFormat::csv;
  throw input_error("output_format must be json or csv, got '" + v + "'");
}

/// Applies one `key = value` setting.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "precision_bits")
      cfg.precision_bits = std::stoi(value);
    else if (key == "enum_budget")
      cfg.enum_budget = std::stod(value);
    else if (key == "rng_seed")
      cfg.rng_seed = std::stoull(value);
    else if (key == "output_format")
      cfg.output_format = parse_format(value);
    else if (key == "growth_factor")
      cfg.growth_factor = std::stoull(value);
    else if (key == "threads")
      cfg.threads = static_cast<unsigned>(std::stoul(value));
    else
      throw input_error("unknown configuration key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw input_error("bad value '" + value + "' for configuration key '" + key + "'");
  } catch (const std::out_of_range&) {
    throw input_error("value '" + value + "' for configuration key '" + key + "' is out of range");
  }
}

/// Reads `key = value` lines; blank lines and '#' comments are skipped.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot read configuration file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

/// Defaults, then the file named by --config or BETASPEC_CONFIG, then flags.
inline RunConfig load_config(const std::optional<std::string>& config_path,
                             const std::map<std::string, std::string>& flag_overrides) {
  RunConfig cfg;
  std::optional<std::string> path = config_path;
  if (!path) {
    if (const char* env = std::getenv("BETASPEC_CONFIG"); env && *env) path = env;
  }
  if (path)
    for (const auto& [k, v] : read_config_file(*path)) apply_setting(cfg, k, v);
  for (const auto& [k, v] : flag_overrides) apply_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

inline json optional_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

template <class Real>
json to_json(const CylinderInterval<Real>& c) {
  return {{"left", to_decimal(c.left)}, {"length", to_decimal(c.length)}, {"order", c.order}};
}

template <class Real>
json to_json(const Approximant<Real>& a) {
  json digits = json::array();
  for (int d : a.base.unity_expansion(a.order)) digits.push_back(d);
  return {{"beta", to_decimal(a.parent.value())},
          {"N", a.order},
          {"beta_N", to_decimal(a.base.value())},
          {"unity_digits", digits}};
}

inline json to_json(const SpectrumPoint& p) {
  json j = {{"alpha", to_decimal(p.alpha)}, {"eps", to_decimal(p.eps)}, {"n", p.n}};
  j["N"] = p.N ? json(*p.N) : json(nullptr);
  j["count"] = p.count.str();
  j["estimate"] = optional_number(p.estimate);
  j["slack"] = to_decimal(p.slack);
  return j;
}

inline const char* rigor_name(LpsiRigor r) {
  return r == LpsiRigor::exact_on_cylinders ? "exact-on-cylinders" : "heuristic";
}

inline json to_json(const LpsiInterval& l) {
  return {{"lo", to_decimal(l.lo)}, {"hi", to_decimal(l.hi)}, {"n_used", l.n_used}, {"rigor", rigor_name(l.rigor)}};
}

inline json to_json(const DimensionReport& r) {
  json j;
  j["status"] = r.status == DimensionStatus::ok ? "ok" : "empty-intersection";
  j["a"] = r.a;
  j["b"] = r.b;
  j["lpsi"] = to_json(r.lpsi);
  j["n"] = r.n;
  j["eps"] = r.eps;
  if (r.status == DimensionStatus::ok) {
    j["a_clipped"] = r.a_clip;
    j["b_clipped"] = r.b_clip;
    j["inf"] = r.inf_value;
    j["sup"] = r.sup_value;
    j["argsup"] = r.argsup;
    json grid = json::array();
    for (auto [alpha, h] : r.grid) grid.push_back({{"alpha", alpha}, {"estimate", optional_number(h)}});
    j["grid"] = grid;
  }
  return j;
}

inline json to_json(const CantorStage& s) {
  return {{"k", s.k},
          {"target", s.target},
          {"eps", s.eps},
          {"N", s.N},
          {"n", s.n},
          {"ell", s.ell},
          {"pool_size", s.pool_size.str()},
          {"estimate", optional_number(s.estimate)},
          {"reference", s.reference},
          {"deviation", optional_number(s.deviation)}};
}

inline json to_json(const CantorSchedule& s) {
  json stages = json::array();
  for (const auto& st : s.stages) stages.push_back(to_json(st));
  json checkpoints = json::array();
  for (std::size_t k = 1; k <= s.stages.size(); ++k) checkpoints.push_back(s.checkpoint(k));
  return {{"a", s.a},
          {"b", s.b},
          {"delta", s.delta},
          {"growth_factor", s.growth_factor},
          {"feasible", s.feasible},
          {"achieved_delta", s.achieved_delta},
          {"reference_a", s.reference_a},
          {"reference_b", s.reference_b},
          {"checkpoints", checkpoints},
          {"stages", stages}};
}

inline json to_json(const OscillationReport& r) {
  json cps = json::array();
  for (const auto& c : r.checkpoints)
    cps.push_back({{"k", c.k},
                   {"t", c.t},
                   {"target", c.target},
                   {"tolerance", c.tolerance},
                   {"slack", c.slack},
                   {"max_deviation", c.max_deviation},
                   {"reached", c.reached},
                   {"passed", c.passed}});
  return {{"passed", r.passed},
          {"samples", r.samples},
          {"depth", r.depth},
          {"upper_bound", r.upper_bound},
          {"lower_bound", r.lower_bound},
          {"running_max", optional_number(r.running_max)},
          {"running_min", optional_number(r.running_min)},
          {"upper_ok", r.upper_ok},
          {"lower_ok", r.lower_ok},
          {"checkpoints", cps}};
}

inline json to_json(const BoxFit& f) {
  json table = json::array();
  for (const auto& p : f.table)
    table.push_back({{"log_inverse_scale", p.log_inverse_scale}, {"log_count", p.log_count}, {"residual", p.residual}});
  return {{"dimension", f.dimension}, {"intercept", f.intercept}, {"table", table}};
}

/// Level records in run-length form: each entry covers `count` levels from `i`.
template <class Real>
json levels_json(const GenerationTree<Real>& tree) {
  json levels = json::array();
  for (const auto& r : tree.runs)
    levels.push_back({{"i", r.first_level},
                      {"count", r.levels},
                      {"stage", r.stage},
                      {"m", r.m.str()},
                      {"c", to_decimal(std::exp(r.log_c))},
                      {"log_c", r.log_c}});
  return levels;
}

/// CSV with columns alpha,eps,n,N,count,estimate,slack.
inline void emit_curve(std::ostream& out, const std::vector<SpectrumPoint>& points) {
  if (points.empty()) throw input_error("no spectrum points to write");
  out << "alpha,eps,n,N,count,estimate,slack\n";
  for (const auto& p : points) {
    out << to_decimal(p.alpha) << ',' << to_decimal(p.eps) << ',' << p.n << ',';
    if (p.N) out << *p.N;
    out << ',' << p.count.str() << ',';
    if (std::isfinite(p.estimate)) out << to_decimal(p.estimate);
    out << ',' << to_decimal(p.slack) << '\n';
  }
}

template <class Real>
std::vector<CylinderInterval<Real>> intervals_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    if (j.contains("intervals"))
      list = &j.at("intervals");
    else if (j.contains("sampled_intervals"))
      list = &j.at("sampled_intervals");
    else
      throw input_error("JSON input has neither 'intervals' nor 'sampled_intervals'");
  }
  if (!list->is_array()) throw input_error("interval list must be a JSON array");
  std::vector<CylinderInterval<Real>> out;
  for (const auto& rec : *list) {
    CylinderInterval<Real> c;
    c.left = parse_real<Real>(rec.at("left").get<std::string>());
    c.length = parse_real<Real>(rec.at("length").get<std::string>());
    c.order = rec.value("order", std::size_t{0});
    out.push_back(c);
  }
  return out;
}

}  // namespace betaspec
