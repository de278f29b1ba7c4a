#include "fklab/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fklab/runio.hpp"
#include "json.hpp"

namespace fklab {

namespace {

using nlohmann::json;

std::string join_issues(const std::vector<std::string>& issues) {
  std::string text = "config:";
  for (const auto& s : issues) {
    text += " ";
    text += s;
    text += ";";
  }
  if (!issues.empty()) text.pop_back();
  return text;
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"oracle", "sample",    "estimate", "sweep",
                                                 "surface", "unique",   "usequence", "renorm",
                                                 "mixing",  "report"};
  return names;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"disconnection", "slab", "mixing", "unique",
                                                 "surface"};
  return names;
}

const std::vector<std::string>& axis_names() {
  static const std::vector<std::string> names = {"p", "q", "eps", "L", "N",
                                                 "M", "K", "C",   "delta"};
  return names;
}

bool in_list(const std::string& value, const std::vector<std::string>& list) {
  for (const auto& s : list)
    if (s == value) return true;
  return false;
}

std::string quoted_list(const std::vector<std::string>& list) {
  std::string text;
  for (const auto& s : list) {
    if (!text.empty()) text += ", ";
    text += s;
  }
  return text;
}

bool parse_long_token(const std::string& token, long& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  errno = 0;
  long v = std::strtol(token.c_str(), &end, 10);
  if (errno != 0 || end != token.c_str() + token.size()) return false;
  out = v;
  return true;
}

bool parse_double_token(const std::string& token, double& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(token.c_str(), &end);
  if (errno != 0 || end != token.c_str() + token.size() || !std::isfinite(v)) return false;
  out = v;
  return true;
}

// One JSON value applied to one config field, with the key name attached to
// any complaint.
struct Loader {
  ExperimentConfig& cfg;
  std::vector<std::string>& issues;

  void bad(const std::string& key, const char* expected) {
    issues.push_back(key + ": expected " + expected);
  }

  void str(const std::string& key, const json& v, std::string& field) {
    if (v.is_string())
      field = v.get<std::string>();
    else
      bad(key, "a string");
  }

  void num(const std::string& key, const json& v, double& field) {
    if (v.is_number())
      field = v.get<double>();
    else
      bad(key, "a number");
  }

  void integer(const std::string& key, const json& v, long& field) {
    if (v.is_number_integer())
      field = v.get<long>();
    else
      bad(key, "an integer");
  }

  void integer(const std::string& key, const json& v, int& field) {
    long wide = field;
    integer(key, v, wide);
    field = static_cast<int>(wide);
  }

  void boolean(const std::string& key, const json& v, bool& field) {
    if (v.is_boolean())
      field = v.get<bool>();
    else
      bad(key, "a boolean");
  }

  void seed(const std::string& key, const json& v, std::uint64_t& field) {
    if (v.is_number_unsigned())
      field = v.get<std::uint64_t>();
    else if (v.is_number_integer() && v.get<long long>() >= 0)
      field = static_cast<std::uint64_t>(v.get<long long>());
    else
      bad(key, "a nonnegative integer");
  }

  void frac(const std::string& key, const json& v, Frac& field) {
    try {
      if (v.is_string())
        field = Frac::parse(v.get<std::string>());
      else if (v.is_number_integer())
        field = Frac{v.get<long>(), 1};
      else
        bad(key, "a fraction string like \"1/2\" or an integer");
    } catch (const std::exception&) {
      bad(key, "a fraction string like \"1/2\"");
    }
  }

  void doubles(const std::string& key, const json& v, std::vector<double>& field) {
    if (!v.is_array()) {
      bad(key, "an array of numbers");
      return;
    }
    std::vector<double> parsed;
    for (const auto& e : v) {
      if (!e.is_number()) {
        bad(key, "an array of numbers");
        return;
      }
      parsed.push_back(e.get<double>());
    }
    field = std::move(parsed);
  }

  void longs(const std::string& key, const json& v, std::vector<long>& field) {
    if (!v.is_array()) {
      bad(key, "an array of integers");
      return;
    }
    std::vector<long> parsed;
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        bad(key, "an array of integers");
        return;
      }
      parsed.push_back(e.get<long>());
    }
    field = std::move(parsed);
  }

  // Sweep values arrive as numbers or strings; both become tokens that the
  // axis later parses, so "1/4" works for delta and 0.55 for p.
  void tokens(const std::string& key, const json& v, std::vector<std::string>& field) {
    if (!v.is_array()) {
      bad(key, "an array of numbers or strings");
      return;
    }
    std::vector<std::string> parsed;
    for (const auto& e : v) {
      if (e.is_string())
        parsed.push_back(e.get<std::string>());
      else if (e.is_number_integer())
        parsed.push_back(std::to_string(e.get<long>()));
      else if (e.is_number())
        parsed.push_back(format_double(e.get<double>()));
      else {
        bad(key, "an array of numbers or strings");
        return;
      }
    }
    field = std::move(parsed);
  }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError({std::string("json: ") + e.what()});
  }
  if (!j.is_object()) throw ConfigError({"json: top level must be an object"});

  ExperimentConfig cfg;
  std::vector<std::string> issues;
  Loader load{cfg, issues};
  for (const auto& [key, value] : j.items()) {
    if (key == "subcommand")
      load.str(key, value, cfg.subcommand);
    else if (key == "experiment")
      load.str(key, value, cfg.experiment);
    else if (key == "region")
      load.str(key, value, cfg.region);
    else if (key == "d")
      load.integer(key, value, cfg.d);
    else if (key == "L")
      load.integer(key, value, cfg.big_l);
    else if (key == "N")
      load.integer(key, value, cfg.big_n);
    else if (key == "M")
      load.integer(key, value, cfg.big_m);
    else if (key == "K")
      load.integer(key, value, cfg.big_k);
    else if (key == "p")
      load.num(key, value, cfg.p);
    else if (key == "q")
      load.num(key, value, cfg.q);
    else if (key == "eps")
      load.num(key, value, cfg.eps);
    else if (key == "eps_grid")
      load.doubles(key, value, cfg.eps_grid);
    else if (key == "bc")
      load.str(key, value, cfg.bc);
    else if (key == "beta")
      load.num(key, value, cfg.beta);
    else if (key == "fd_step")
      load.num(key, value, cfg.fd_step);
    else if (key == "update")
      load.str(key, value, cfg.update);
    else if (key == "burn_in")
      load.integer(key, value, cfg.burn_in);
    else if (key == "thinning")
      load.integer(key, value, cfg.thinning);
    else if (key == "chains")
      load.integer(key, value, cfg.chains);
    else if (key == "samples")
      load.integer(key, value, cfg.samples);
    else if (key == "seed")
      load.seed(key, value, cfg.seed);
    else if (key == "delta")
      load.frac(key, value, cfg.delta);
    else if (key == "C")
      load.integer(key, value, cfg.c_factor);
    else if (key == "ell")
      load.integer(key, value, cfg.ell);
    else if (key == "C0")
      load.num(key, value, cfg.c0);
    else if (key == "x")
      load.longs(key, value, cfg.x);
    else if (key == "s")
      load.num(key, value, cfg.s);
    else if (key == "edge")
      load.integer(key, value, cfg.edge);
    else if (key == "observable")
      load.str(key, value, cfg.observable);
    else if (key == "axis")
      load.str(key, value, cfg.axis);
    else if (key == "values")
      load.tokens(key, value, cfg.values);
    else if (key == "out_dir")
      load.str(key, value, cfg.out_dir);
    else if (key == "run")
      load.str(key, value, cfg.run_dir);
    else if (key == "dump_samples")
      load.boolean(key, value, cfg.dump_samples);
    else if (key == "dump_fields")
      load.boolean(key, value, cfg.dump_fields);
    else
      issues.push_back(key + ": unknown key");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config file: cannot open " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  j["experiment"] = experiment;
  j["region"] = region;
  j["d"] = d;
  j["L"] = big_l;
  j["N"] = big_n;
  j["M"] = big_m;
  j["K"] = big_k;
  j["p"] = p;
  j["q"] = q;
  j["eps"] = eps;
  j["eps_grid"] = eps_grid;
  j["bc"] = bc;
  j["beta"] = beta;
  j["fd_step"] = fd_step;
  j["update"] = update;
  j["burn_in"] = burn_in;
  j["thinning"] = thinning;
  j["chains"] = chains;
  j["samples"] = samples;
  j["seed"] = seed;
  j["delta"] = delta.str();
  j["C"] = c_factor;
  j["ell"] = ell;
  j["C0"] = c0;
  j["x"] = x;
  j["s"] = s;
  j["edge"] = edge;
  j["observable"] = observable;
  j["axis"] = axis;
  j["values"] = values;
  j["out_dir"] = out_dir;
  j["run"] = run_dir;
  j["dump_samples"] = dump_samples;
  j["dump_fields"] = dump_fields;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  std::vector<std::string> issues;
  auto complain = [&](const std::string& text) { issues.push_back(text); };

  if (!in_list(subcommand, subcommand_names()))
    complain("subcommand: expected one of " + quoted_list(subcommand_names()) + " (got \"" +
             subcommand + "\")");
  if (d < 2 || d > kMaxDim) complain("d: must be in [2, " + std::to_string(kMaxDim) + "]");
  if (!(p >= 0 && p <= 1)) complain("p: must be in [0, 1]");
  if (!(q > 0)) complain("q: must be positive");
  if (!(eps >= 0 && eps <= 1)) complain("eps: must be in [0, 1]");
  for (double e : eps_grid)
    if (!(e >= 0 && e <= 1)) {
      complain("eps_grid: entries must be in [0, 1]");
      break;
    }
  if (bc != "free" && bc != "wired") complain("bc: expected free or wired");
  if (update != "heat-bath" && update != "sw") complain("update: expected heat-bath or sw");
  if (update == "sw" && (q < 1 || q != std::floor(q)))
    complain("q: the sw update needs an integer q >= 1");
  if (burn_in < 0) complain("burn_in: must be >= 0");
  if (thinning < 1) complain("thinning: must be >= 1");
  if (chains < 1) complain("chains: must be >= 1");
  if (samples < 1) complain("samples: must be >= 1");
  if (delta.num < 1 || delta.den < 1) complain("delta: must be a positive fraction");
  if (c_factor < 1) complain("C: must be >= 1");
  if (ell < 0) complain("ell: must be >= 0");
  if (!(c0 > 0)) complain("C0: must be positive");
  if (!(s >= 0 && s <= 1)) complain("s: must be in [0, 1]");
  if (!(beta >= 0)) complain("beta: must be >= 0");
  if (!(fd_step > 0)) complain("fd_step: must be positive");
  if (out_dir.empty()) complain("out_dir: must not be empty");
  if (!x.empty() && static_cast<int>(x.size()) != d)
    complain("x: needs exactly d coordinates");

  const bool needs_experiment = subcommand == "estimate" || subcommand == "sweep";
  if (needs_experiment && !in_list(experiment, experiment_names()))
    complain("experiment: expected one of " + quoted_list(experiment_names()) + " (got \"" +
             experiment + "\")");

  const bool delta_scales_l = (needs_experiment && (experiment == "unique")) ||
                              subcommand == "unique" || subcommand == "usequence" ||
                              subcommand == "renorm";
  if (subcommand == "oracle" || subcommand == "sample") {
    static const std::vector<std::string> kinds = {"box",      "slab", "rect",
                                                   "half_box", "edge", "plaquette"};
    if (!in_list(region, kinds))
      complain("region: expected one of " + quoted_list(kinds));
    if (region == "box" && big_n < 1) complain("N: box regions need N >= 1");
    if (region == "slab" && (d < 3 || big_n < big_l || big_l < 1))
      complain("slab regions need d >= 3 and N >= L >= 1");
    if (region == "rect" && (big_l < 1 || big_m < 1)) complain("rect regions need L, M >= 1");
    if (region == "half_box" && big_k < 1) complain("K: half_box regions need K >= 1");
  }
  if (subcommand == "oracle" &&
      !(observable == "edge-marginal" || observable == "partition" ||
        observable == "connection"))
    complain("observable: expected edge-marginal, partition or connection");
  if (subcommand == "oracle" && edge < 0) complain("edge: must be >= 0");

  const bool runs_disconnection = needs_experiment && experiment == "disconnection";
  const bool runs_slab = needs_experiment && experiment == "slab";
  const bool runs_mixing = (needs_experiment && experiment == "mixing") || subcommand == "mixing";
  const bool runs_surface =
      (needs_experiment && experiment == "surface") || subcommand == "surface";
  if (runs_disconnection) {
    if (big_l < 1) complain("L: must be >= 1");
    if (delta.num > c_factor * delta.den) complain("delta: disconnection needs delta <= C");
  }
  if (runs_slab || subcommand == "renorm") {
    if (d < 3) complain("d: slabs need d >= 3");
    if (big_l < 1) complain("L: must be >= 1");
    if (big_n < 1) complain("N: required (slab half-width)");
    if (big_n > 0 && big_n < big_l) complain("N: must be >= L");
  }
  if (subcommand == "renorm" && big_n == big_l)
    complain("N: renorm needs N > L to leave room for the block grid");
  if (runs_mixing && big_k < 1) complain("K: must be >= 1");
  if (runs_surface && (big_l < 1 || big_m < 1)) complain("surface needs L, M >= 1");
  if (delta_scales_l && delta.num > delta.den)
    complain("delta: must be at most 1 here");
  if (delta_scales_l && delta.floor_times(big_l) < 8)
    complain("delta: unique events need floor(delta*L) >= 8");

  if (subcommand == "sweep") {
    if (!in_list(axis, axis_names()))
      complain("axis: expected one of " + quoted_list(axis_names()));
    if (values.empty()) complain("values: sweep needs at least one value");
    const bool integer_axis =
        axis == "L" || axis == "N" || axis == "M" || axis == "K" || axis == "C";
    for (const auto& token : values) {
      if (axis == "delta") {
        try {
          Frac f = Frac::parse(token);
          if (f.num < 1 || f.den < 1) throw std::invalid_argument("sign");
        } catch (const std::exception&) {
          complain("values: \"" + token + "\" is not a positive fraction");
        }
      } else if (integer_axis) {
        long v = 0;
        if (!parse_long_token(token, v))
          complain("values: \"" + token + "\" is not an integer");
      } else {
        double v = 0;
        if (!parse_double_token(token, v))
          complain("values: \"" + token + "\" is not a number");
      }
    }
  }
  if (subcommand == "report" && run_dir.empty()) complain("run: report needs a run directory");

  if (!issues.empty()) throw ConfigError(std::move(issues));
}

Region ExperimentConfig::make_region() const {
  RegionSpec rs;
  rs.d = d;
  if (region == "box") {
    rs.kind = RegionSpec::Kind::Box;
    rs.a = big_n;
  } else if (region == "slab") {
    rs.kind = RegionSpec::Kind::Slab;
    rs.a = big_l;
    rs.b = big_n;
  } else if (region == "rect") {
    rs.kind = RegionSpec::Kind::Rect;
    rs.a = big_l;
    rs.b = big_m;
  } else if (region == "half_box") {
    rs.kind = RegionSpec::Kind::HalfBox;
    rs.a = big_k;
  } else if (region == "edge") {
    rs.kind = RegionSpec::Kind::Edge;
  } else if (region == "plaquette") {
    rs.kind = RegionSpec::Kind::Plaquette;
    rs.d = 2;
  } else {
    throw ConfigError({"region: unknown kind \"" + region + "\""});
  }
  return Region::make(rs);
}

McKnobs ExperimentConfig::mc_knobs() const {
  McKnobs mc;
  mc.swendsen_wang = update == "sw";
  mc.burn_in = burn_in;
  mc.thinning = thinning;
  mc.seed = seed;
  mc.chains = chains;
  return mc;
}

long ExperimentConfig::ell_value() const {
  if (ell > 0) return ell;
  if (big_l < 2) return 1;
  double raw = c0 * std::pow(std::log(static_cast<double>(big_l)),
                             1.0 / static_cast<double>(d - 1));
  long v = static_cast<long>(std::ceil(raw));
  return v < 1 ? 1 : v;
}

Coords ExperimentConfig::x_coords() const {
  Coords c = make_coords({});
  if (x.empty()) {
    c[static_cast<std::size_t>(d - 2)] = static_cast<int>(big_n);
    c[static_cast<std::size_t>(d - 1)] = static_cast<int>(big_n);
    return c;
  }
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = static_cast<int>(x[i]);
  return c;
}

}  // namespace fklab
