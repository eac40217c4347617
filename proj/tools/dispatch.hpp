#pragma once

#include "betaspec/betaspec.hpp"
#include "betaspec/io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace betaspec::cli {

/// Raw option values; reals stay as decimal strings until the working
/// precision is known.
struct Args {
  std::string beta = "2";
  std::string x = "0";
  std::size_t n = 0;
  std::size_t depth = 10;
  std::string word;
  std::size_t order = 0;
  std::string psi = "digit";
  std::string alpha = "0.5";
  std::string eps = "0.05";
  std::string alpha_grid = "0:1:0.05";
  std::size_t approx_order = 0;
  std::string a = "0";
  std::string b = "1";
  std::size_t resolution = 21;
  std::string delta = "0.1";
  std::size_t stages = 4;
  std::string emit;
  std::size_t samples = 0;
  std::size_t checkpoints = 2;
  std::size_t depth_limit = 0;
  std::string in;
  std::string scales;
  std::size_t terms = 50;
  std::size_t nodes = 10000;
};

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error(std::string("malformed value for ") + what + ": '" + s + "'");
  }
}

template <class Real>
Observable<Real> parse_observable(const std::string& text, const BetaBase<Real>& base) {
  if (text == "digit") return Observable<Real>::first_digit(base);
  if (text == "zero") return Observable<Real>::zero();
  if (text.rfind("affine:", 0) == 0) {
    const std::string rest = text.substr(7);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw input_error("affine observable needs 'affine:SLOPE,INTERCEPT'");
    return Observable<Real>::affine(parse_double(rest.substr(0, comma), "affine slope"),
                                    parse_double(rest.substr(comma + 1), "affine intercept"));
  }
  if (text.rfind("table:", 0) == 0) return Observable<Real>::from_table_file(text.substr(6));
  throw input_error("unknown observable '" + text + "' (expected digit, zero, affine:a,b or table:FILE)");
}

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), what));
  return out;
}

inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw input_error("alpha grid must be LO:HI:STEP");
  const double lo = parse_double(parts[0], "grid start"), hi = parse_double(parts[1], "grid end"),
               step = parse_double(parts[2], "grid step");
  if (!(step > 0) || hi < lo) throw input_error("alpha grid needs LO <= HI and STEP > 0");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double a = lo + step * static_cast<double>(i);
    if (a > hi + step * 1e-9) break;
    out.push_back(a);
  }
  return out;
}

inline json word_json(std::span<const int> w) {
  json j = json::array();
  for (int d : w) j.push_back(d);
  return j;
}

/// Box-counting depths: twenty evenly spaced digit depths up to t_k for the
/// third stage (or the last one when there are fewer).
inline std::vector<std::uint64_t> default_box_depths(const CantorSchedule& s) {
  const std::uint64_t top = s.checkpoint(std::min<std::size_t>(3, s.stages.size()));
  std::vector<std::uint64_t> depths;
  for (std::uint64_t i = 1; i <= 20; ++i) depths.push_back(std::max<std::uint64_t>(1, top / 20 * i));
  depths.back() = top;
  return depths;
}

struct Outcome {
  json body;
  std::string text;  // used instead of body when nonempty
  ExitCode code = ExitCode::ok;
};

template <class Real>
Outcome run_command(const std::string& cmd, const Args& args, const RunConfig& cfg) {
  const int p = cfg.precision_bits;
  const ComputeOptions opts = cfg.compute();
  auto base = [&] { return parse_base<Real>(args.beta, p); };
  auto need_n = [&] {
    if (args.n == 0) throw input_error("--n must be a positive integer");
    return args.n;
  };
  auto approx = [&]() -> std::optional<std::size_t> {
    if (args.approx_order == 0) return std::nullopt;
    return args.approx_order;
  };
  Outcome o;

  if (cmd == "expand") {
    const auto b = base();
    const Word w = expand(b, parse_real<Real>(args.x), need_n());
    o.body = {{"digits", word_json(w)}, {"word", format_word(w)}};
  } else if (cmd == "unity") {
    const auto b = base();
    o.body = {{"beta", to_decimal(b.value())}, {"digits", word_json(b.unity_expansion(args.depth))}};
    o.body["parry_period"] = b.parry_period() ? json(*b.parry_period()) : json(nullptr);
  } else if (cmd == "admissible") {
    const auto b = base();
    const Word w = parse_word(args.word);
    const bool ok = is_admissible(b, w);
    o.body = {{"word", format_word(w)}, {"admissible", ok}};
    if (ok && !w.empty()) {
      o.body["cylinder"] = to_json(cylinder(b, w));
      o.body["full"] = is_full(b, w);
    }
  } else if (cmd == "enumerate") {
    const auto b = base();
    const auto words = enumerate_words(b, need_n(), opts);
    json list = json::array();
    for (const auto& w : words) list.push_back(format_word(w));
    o.body = {{"n", args.n}, {"count", words.size()}, {"words", list}};
  } else if (cmd == "approximant") {
    o.body = to_json(approximant(base(), args.order));
  } else if (cmd == "project") {
    const auto a = approximant(base(), args.order);
    const Word w = parse_word(args.word);
    const Word img = project(a, w);
    const bool ok = is_admissible(a.base, img);
    o.body = {{"word", format_word(w)}, {"projected", format_word(img)}, {"admissible_for_beta_N", ok}};
    if (!ok) o.code = ExitCode::falsified;
  } else if (cmd == "count") {
    const auto b = base();
    const auto psi = parse_observable(args.psi, b);
    o.body = to_json(count_F(b, psi, need_n(), parse_double(args.alpha, "--alpha"), parse_double(args.eps, "--eps"),
                             approx(), opts));
  } else if (cmd == "spectrum") {
    const auto b = base();
    const auto psi = parse_observable(args.psi, b);
    const double eps = parse_double(args.eps, "--eps");
    if (!(eps > 0)) throw input_error("eps must be positive");
    const SpectrumCurve<Real> curve(b, psi, need_n(), approx(), opts);
    std::vector<SpectrumPoint> points;
    for (double alpha : parse_grid(args.alpha_grid)) points.push_back(curve.point(alpha, eps));
    if (cfg.output_format == OutputFormat::csv) {
      std::ostringstream ss;
      emit_curve(ss, points);
      o.text = ss.str();
    } else {
      o.body = json::array();
      for (const auto& pt : points) o.body.push_back(to_json(pt));
    }
  } else if (cmd == "lpsi") {
    const auto b = base();
    o.body = to_json(estimate_Lpsi(b, parse_observable(args.psi, b), need_n(), opts));
  } else if (cmd == "theorem1") {
    const auto b = base();
    const auto psi = parse_observable(args.psi, b);
    const auto r = theorem1_dimensions(b, psi, parse_double(args.a, "--a"), parse_double(args.b, "--b"),
                                       args.resolution, need_n(), parse_double(args.eps, "--eps"), approx(), opts);
    o.body = to_json(r);
  } else if (cmd == "cantor" || cmd == "oscillate") {
    const auto b = base();
    const auto psi = parse_observable(args.psi, b);
    ScheduleOptions so;
    so.growth_factor = cfg.growth_factor;
    so.compute = opts;
    const double a = parse_double(args.a, "--a"), bb = parse_double(args.b, "--b");
    const auto sched = make_schedule(b, psi, a, bb, parse_double(args.delta, "--delta"), args.stages, so);
    o.body["schedule"] = to_json(sched);
    if (!sched.feasible) {
      o.code = ExitCode::schedule_infeasible;
      return o;
    }
    const auto pools = build_pools(b, psi, sched, opts);
    if (cmd == "oscillate") {
      OscillationOptions oo;
      oo.samples = args.samples == 0 ? 100 : args.samples;
      oo.seed = cfg.rng_seed;
      oo.checkpoints = args.checkpoints;
      oo.threads = cfg.threads;
      const auto rep = oscillation_check(b, psi, pools, sched, oo);
      o.body["oscillation"] = to_json(rep);
      if (!rep.passed) o.code = ExitCode::falsified;
      return o;
    }
    const auto tree = build_generations(b, pools, sched, args.depth_limit, opts);
    const std::uint64_t levels = tree.total_levels();
    o.body["lemma54"] = levels >= 3 ? json(lemma54_lower_bound(tree, levels - 1)) : json(nullptr);
    o.body["box_dimension"] = to_json(tree_box_dimension(b, pools, sched, default_box_depths(sched)));
    if (!args.emit.empty()) {
      json doc;
      doc["stages"] = o.body["schedule"]["stages"];
      doc["levels"] = levels_json(tree);
      json sampled = json::array();
      const std::uint64_t t1 = sched.checkpoint(1);
      const std::size_t count = args.samples == 0 ? 16 : args.samples;
      for (std::size_t s = 0; s < count; ++s) {
        std::mt19937_64 rng(mix_seed(cfg.rng_seed, s + 1));
        const Word digits = sample_branch(pools, sched, t1, rng);
        sampled.push_back(to_json(cylinder(b, digits)));
      }
      doc["sampled_intervals"] = sampled;
      if (tree.generations.size() > 1) {
        json deepest = json::array();
        for (const auto& iv : tree.generations.back()) deepest.push_back(to_json(iv));
        doc["intervals"] = deepest;
      }
      std::ofstream f(args.emit);
      if (!f) throw input_error("cannot write '" + args.emit + "'");
      f << doc.dump(2) << '\n';
      o.body["emitted"] = args.emit;
    }
  } else if (cmd == "boxdim") {
    std::ifstream f(args.in);
    if (!f) throw input_error("cannot read '" + args.in + "'");
    json doc;
    try {
      f >> doc;
    } catch (const json::exception& e) {
      throw input_error("'" + args.in + "' is not valid JSON: " + e.what());
    }
    const auto intervals = intervals_from_json<Real>(doc);
    const auto scales = parse_list(args.scales, "--scales");
    o.body = to_json(box_dimension<Real>(intervals, scales));
  } else if (cmd == "density") {
    const auto b = base();
    const Real x = parse_real<Real>(args.x);
    const ParryDensity<Real> rho(b, args.terms);
    check_unit_interval(x);
    const double z = rho.normalizer(args.nodes);
    o.body = {{"x", to_decimal(x)},
              {"terms", args.terms},
              {"value", to_decimal(rho(x))},
              {"normalizer", to_decimal(z)},
              {"normalized_value", to_decimal(rho(x) / z)}};
  } else {
    throw input_error("unknown subcommand '" + cmd + "'");
  }
  return o;
}

/// Parses argv, runs one subcommand and writes its result. Returns the exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"betaspec: beta-expansions, counting spectra and Cantor constructions"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Settings resolve as: command-line flag, then the key = value file given by --config or the\n"
      "BETASPEC_CONFIG environment variable, then built-in defaults.\n"
      "Exit codes: 0 ok, 2 input error, 3 budget exceeded, 4 schedule infeasible, 5 falsified check.");
  std::optional<std::string> config_path;
  std::map<std::string, std::string> overrides;
  std::string out_path;
  auto add_setting = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
  };
  app.add_option_function<std::string>("--config", [&](const std::string& v) { config_path = v; },
                                       "key = value configuration file");
  add_setting("--precision-bits", "precision_bits", "working precision in bits (>= 64, default 128)");
  add_setting("--enum-budget", "enum_budget", "largest enumeration allowed (default 1e8)");
  add_setting("--seed", "rng_seed", "random seed");
  add_setting("--format", "output_format", "json or csv");
  add_setting("--growth-factor", "growth_factor", "level-count growth factor (default 16)");
  add_setting("--threads", "threads", "worker threads (default: all cores)");
  app.add_option("--out", out_path, "write the result here instead of standard output");

  Args args;
  auto beta_opt = [&](CLI::App* sc) { sc->add_option("--beta", args.beta, "base, as a decimal string")->required(); };
  auto psi_opt = [&](CLI::App* sc) { sc->add_option("--psi", args.psi, "digit | zero | affine:a,b | table:FILE"); };

  auto* expand_cmd = app.add_subcommand("expand", "greedy digits of x");
  beta_opt(expand_cmd);
  expand_cmd->add_option("--x", args.x)->required();
  expand_cmd->add_option("--n", args.n)->required();

  auto* unity_cmd = app.add_subcommand("unity", "quasi-greedy expansion of 1");
  beta_opt(unity_cmd);
  unity_cmd->add_option("--depth", args.depth);

  auto* adm_cmd = app.add_subcommand("admissible", "admissibility of a digit word");
  beta_opt(adm_cmd);
  adm_cmd->add_option("--word", args.word, "comma-separated digits")->required();

  auto* enum_cmd = app.add_subcommand("enumerate", "all admissible words of length n");
  beta_opt(enum_cmd);
  enum_cmd->add_option("--n", args.n)->required();

  auto* appr_cmd = app.add_subcommand("approximant", "Parry approximant of order N");
  beta_opt(appr_cmd);
  appr_cmd->add_option("--N", args.order)->required();

  auto* proj_cmd = app.add_subcommand("project", "project a word onto the approximant's words");
  beta_opt(proj_cmd);
  proj_cmd->add_option("--N", args.order)->required();
  proj_cmd->add_option("--word", args.word)->required();

  auto* count_cmd = app.add_subcommand("count", "count words with Birkhoff average near alpha");
  beta_opt(count_cmd);
  psi_opt(count_cmd);
  count_cmd->add_option("--n", args.n)->required();
  count_cmd->add_option("--alpha", args.alpha)->required();
  count_cmd->add_option("--eps", args.eps)->required();
  count_cmd->add_option("--approx-N", args.approx_order);

  auto* spec_cmd = app.add_subcommand("spectrum", "spectrum estimates over an alpha grid (CSV by default)");
  beta_opt(spec_cmd);
  psi_opt(spec_cmd);
  spec_cmd->add_option("--alpha-grid", args.alpha_grid, "LO:HI:STEP")->required();
  spec_cmd->add_option("--n", args.n)->required();
  spec_cmd->add_option("--eps", args.eps)->required();
  spec_cmd->add_option("--approx-N", args.approx_order);

  auto* lpsi_cmd = app.add_subcommand("lpsi", "range of attainable averages");
  beta_opt(lpsi_cmd);
  psi_opt(lpsi_cmd);
  lpsi_cmd->add_option("--n", args.n)->required();

  auto* thm_cmd = app.add_subcommand("theorem1", "inf and sup of the spectrum over [a,b]");
  beta_opt(thm_cmd);
  psi_opt(thm_cmd);
  thm_cmd->add_option("--a", args.a)->required();
  thm_cmd->add_option("--b", args.b)->required();
  thm_cmd->add_option("--n", args.n)->required();
  thm_cmd->add_option("--eps", args.eps);
  thm_cmd->add_option("--resolution", args.resolution);
  thm_cmd->add_option("--approx-N", args.approx_order);

  for (const char* name : {"cantor", "oscillate"}) {
    auto* sc = app.add_subcommand(name, std::string(name) == "cantor" ? "build the Cantor construction"
                                                                     : "check running averages on sampled branches");
    beta_opt(sc);
    psi_opt(sc);
    sc->add_option("--a", args.a)->required();
    sc->add_option("--b", args.b)->required();
    sc->add_option("--delta", args.delta);
    sc->add_option("--stages", args.stages);
    sc->add_option("--samples", args.samples);
    if (std::string(name) == "cantor") {
      sc->add_option("--emit", args.emit, "write the tree as JSON");
      sc->add_option("--depth-limit", args.depth_limit, "materialize intervals down to this many digits");
    } else {
      sc->add_option("--checkpoints", args.checkpoints);
    }
  }

  auto* box_cmd = app.add_subcommand("boxdim", "box-counting dimension of intervals in a JSON file");
  box_cmd->add_option("--in", args.in)->required();
  box_cmd->add_option("--scales", args.scales, "comma-separated box sizes")->required();

  auto* dens_cmd = app.add_subcommand("density", "invariant density at x");
  beta_opt(dens_cmd);
  dens_cmd->add_option("--x", args.x)->required();
  dens_cmd->add_option("--terms", args.terms);
  dens_cmd->add_option("--nodes", args.nodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return static_cast<int>(ExitCode::input);
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const RunConfig cfg = load_config(config_path, overrides);
    RunConfig effective = cfg;
    if (cmd == "spectrum" && !overrides.count("output_format") && !config_path && !std::getenv("BETASPEC_CONFIG"))
      effective.output_format = OutputFormat::csv;
    Outcome o;
    if (effective.precision_bits <= 128)
      o = run_command<real128>(cmd, args, effective);
    else if (effective.precision_bits <= 256)
      o = run_command<real256>(cmd, args, effective);
    else
      throw input_error("precision_bits above 256 is not supported");
    std::string text = o.text.empty() ? o.body.dump(2) + "\n" : o.text;
    if (!out_path.empty()) {
      std::ofstream f(out_path);
      if (!f) throw input_error("cannot write '" + out_path + "'");
      f << text;
    } else {
      out << text;
    }
    return static_cast<int>(o.code);
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return static_cast<int>(ExitCode::budget);
  }
}

}  // namespace betaspec::cli
