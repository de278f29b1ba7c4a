#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "fklab/config.hpp"
#include "fklab/runio.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Raw flag values; only the ones the user actually passed are applied, so
// the config file keeps its say over everything left untouched.
struct FlagSet {
  std::string config_path;
  std::string experiment, region, bc, update, observable, axis, delta;
  std::string x_list, values_list, eps_grid_list;
  std::string out_dir, run_dir;
  int d = 0, edge = 0, burn_in = 0, thinning = 0, chains = 0;
  long big_l = 0, big_n = 0, big_m = 0, big_k = 0, c_factor = 0, ell = 0, samples = 0;
  double p = 0, q = 0, eps = 0, beta = 0, fd_step = 0, c0 = 0, s = 0;
  std::uint64_t seed = 0;
  bool dump_samples = false, dump_fields = false;
};

void add_common(CLI::App* sub, FlagSet& f) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override it");
  sub->add_option("--experiment", f.experiment, "estimator for estimate/sweep");
  sub->add_option("--region", f.region, "geometry kind for oracle/sample");
  sub->add_option("--d", f.d, "dimension");
  sub->add_option("--L", f.big_l, "scale L");
  sub->add_option("--N", f.big_n, "box radius or slab half-width N");
  sub->add_option("--M", f.big_m, "rectangle half-height M");
  sub->add_option("--K", f.big_k, "half-box radius K");
  sub->add_option("--p", f.p, "edge intensity");
  sub->add_option("--q", f.q, "cluster weight");
  sub->add_option("--eps", f.eps, "sprinkling intensity");
  sub->add_option("--eps-grid", f.eps_grid_list, "comma list of sprinkling intensities");
  sub->add_option("--bc", f.bc, "free or wired");
  sub->add_option("--beta", f.beta, "inverse temperature for the surface check");
  sub->add_option("--fd-step", f.fd_step, "finite difference step");
  sub->add_option("--update", f.update, "heat-bath or sw");
  sub->add_option("--burn-in", f.burn_in, "sweeps discarded per chain");
  sub->add_option("--thinning", f.thinning, "sweeps between retained samples");
  sub->add_option("--chains", f.chains, "worker pool size (never affects results)");
  sub->add_option("--samples", f.samples, "retained samples across all chains");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--delta", f.delta, "rational scale factor, e.g. 1/2");
  sub->add_option("--C", f.c_factor, "enclosing box factor");
  sub->add_option("--ell", f.ell, "density scale (0 = default)");
  sub->add_option("--C0", f.c0, "default density scale multiplier");
  sub->add_option("--x", f.x_list, "comma list target coordinates");
  sub->add_option("--s", f.s, "boundary intensity for mixing");
  sub->add_option("--edge", f.edge, "oracle edge index");
  sub->add_option("--observable", f.observable, "oracle observable");
  sub->add_option("--axis", f.axis, "sweep axis");
  sub->add_option("--values", f.values_list, "comma list of sweep values");
  sub->add_option("--out", f.out_dir, "directory that receives run directories");
  sub->add_option("--run", f.run_dir, "existing run directory (report)");
  sub->add_flag("--dump-samples", f.dump_samples, "write samples.jsonl");
  sub->add_flag("--dump-fields", f.dump_fields, "write renormalized fields.jsonl");
}

int apply_and_run(CLI::App* sub, const FlagSet& f, const std::string& report_dir) {
  try {
    fklab::ExperimentConfig cfg;
    if (sub->count("--config") > 0)
      cfg = fklab::ExperimentConfig::from_json_file(f.config_path);
    cfg.subcommand = sub->get_name();

    if (const char* env = std::getenv("SEED")) {
      char* end = nullptr;
      errno = 0;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (errno != 0 || end == env || *end != '\0')
        throw fklab::ConfigError({"SEED: environment value is not a nonnegative integer"});
      cfg.seed = v;
    }

    auto on = [&](const char* name) { return sub->count(name) > 0; };
    if (on("--experiment")) cfg.experiment = f.experiment;
    if (on("--region")) cfg.region = f.region;
    if (on("--d")) cfg.d = f.d;
    if (on("--L")) cfg.big_l = f.big_l;
    if (on("--N")) cfg.big_n = f.big_n;
    if (on("--M")) cfg.big_m = f.big_m;
    if (on("--K")) cfg.big_k = f.big_k;
    if (on("--p")) cfg.p = f.p;
    if (on("--q")) cfg.q = f.q;
    if (on("--eps")) cfg.eps = f.eps;
    if (on("--bc")) cfg.bc = f.bc;
    if (on("--beta")) cfg.beta = f.beta;
    if (on("--fd-step")) cfg.fd_step = f.fd_step;
    if (on("--update")) cfg.update = f.update;
    if (on("--burn-in")) cfg.burn_in = f.burn_in;
    if (on("--thinning")) cfg.thinning = f.thinning;
    if (on("--chains")) cfg.chains = f.chains;
    if (on("--samples")) cfg.samples = f.samples;
    if (on("--seed")) cfg.seed = f.seed;
    if (on("--C")) cfg.c_factor = f.c_factor;
    if (on("--ell")) cfg.ell = f.ell;
    if (on("--C0")) cfg.c0 = f.c0;
    if (on("--s")) cfg.s = f.s;
    if (on("--edge")) cfg.edge = f.edge;
    if (on("--observable")) cfg.observable = f.observable;
    if (on("--axis")) cfg.axis = f.axis;
    if (on("--out")) cfg.out_dir = f.out_dir;
    if (on("--run")) cfg.run_dir = f.run_dir;
    if (on("--dump-samples")) cfg.dump_samples = f.dump_samples;
    if (on("--dump-fields")) cfg.dump_fields = f.dump_fields;
    if (!report_dir.empty()) cfg.run_dir = report_dir;

    if (on("--delta")) {
      try {
        cfg.delta = fklab::Frac::parse(f.delta);
      } catch (const std::exception&) {
        throw fklab::ConfigError({"delta: expected a fraction like 1/2"});
      }
    }
    if (on("--x")) {
      cfg.x.clear();
      for (const auto& token : split_commas(f.x_list)) {
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(token.c_str(), &end, 10);
        if (errno != 0 || end == token.c_str() || *end != '\0')
          throw fklab::ConfigError({"x: \"" + token + "\" is not an integer"});
        cfg.x.push_back(v);
      }
    }
    if (on("--eps-grid")) {
      cfg.eps_grid.clear();
      for (const auto& token : split_commas(f.eps_grid_list)) {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(token.c_str(), &end);
        if (errno != 0 || end == token.c_str() || *end != '\0')
          throw fklab::ConfigError({"eps_grid: \"" + token + "\" is not a number"});
        cfg.eps_grid.push_back(v);
      }
    }
    if (on("--values")) cfg.values = split_commas(f.values_list);

    return fklab::run_experiment(cfg, std::cout, std::cerr);
  } catch (const fklab::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& issue : e.issues()) std::cerr << "  - " << issue << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fklab: a desk-scale FK and Ising laboratory"};
  app.set_version_flag("--version", std::string("fklab ") + fklab::kToolVersion);
  app.require_subcommand(1);

  const std::vector<std::pair<const char*, const char*>> subs = {
      {"oracle", "exact finite-volume values by enumeration"},
      {"sample", "dump FK configurations as JSONL"},
      {"estimate", "Monte Carlo estimate of one experiment"},
      {"sweep", "repeat an experiment along one axis, with an SVG curve"},
      {"surface", "wired surface tension, optionally with the derivative check"},
      {"unique", "unique-crossing event frequency, optionally over an eps grid"},
      {"usequence", "boundary cluster class counts along the shrinking schedule"},
      {"renorm", "renormalized site fields over slab samples"},
      {"mixing", "weak mixing gap on the half box"},
      {"report", "summarize an existing run directory"},
  };
  FlagSet flags;
  std::string report_dir;
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common(sub, flags);
    if (std::string(name) == "report")
      sub->add_option("dir", report_dir, "run directory to summarize");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  return apply_and_run(app.get_subcommands().front(), flags, report_dir);
}
