#include "fklab/runio.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fklab/bond_config.hpp"
#include "fklab/events.hpp"
#include "fklab/ising.hpp"
#include "fklab/oracle.hpp"
#include "fklab/renorm.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace fklab {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string content_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string time_text(const char* fmt) {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), fmt, &tm);
  return buf;
}

}  // namespace

std::string utc_timestamp() { return time_text("%Y-%m-%dT%H:%M:%SZ"); }

namespace {

std::string path_timestamp() { return time_text("%Y%m%d-%H%M%S"); }

bool use_color() {
  static const bool on = isatty(1) != 0 && std::getenv("NO_COLOR") == nullptr;
  return on;
}

const char* const kColumns[] = {"experiment", "d",       "q",       "p",
                                "eps",        "L",       "N",       "M",
                                "K",          "delta",   "C",       "ell",
                                "bc",         "seed",    "chains",  "samples",
                                "estimate",   "stderr",  "derived_name",
                                "derived_value", "derived_stderr", "flag"};

std::string param_or_empty(const EstimatorResult& r, const char* key) {
  auto it = r.params.find(key);
  return it == r.params.end() ? std::string() : it->second;
}

}  // namespace

std::string csv_header() {
  std::string line;
  for (const char* c : kColumns) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line;
}

std::string csv_row(const EstimatorResult& r) {
  std::string flag = param_or_empty(r, "flag");
  if (flag.empty() && r.derived && r.derived->bound_only) flag = "bound_only";
  std::vector<std::string> cells = {
      r.name,
      param_or_empty(r, "d"),
      param_or_empty(r, "q"),
      param_or_empty(r, "p"),
      param_or_empty(r, "eps"),
      param_or_empty(r, "L"),
      param_or_empty(r, "N"),
      param_or_empty(r, "M"),
      param_or_empty(r, "K"),
      param_or_empty(r, "delta"),
      param_or_empty(r, "C"),
      param_or_empty(r, "ell"),
      param_or_empty(r, "bc"),
      param_or_empty(r, "seed"),
      param_or_empty(r, "chains"),
      std::to_string(r.samples),
      format_double(r.estimate),
      format_double(r.stderr_value),
      r.derived ? r.derived->name : std::string(),
      r.derived ? format_double(r.derived->value) : std::string(),
      r.derived ? format_double(r.derived->stderr_value) : std::string(),
      flag,
  };
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line;
}

RunWriter::RunWriter(const ExperimentConfig& cfg) : cfg_(cfg), started_(utc_timestamp()) {
  fs::create_directories(cfg_.out_dir);
  const std::string base =
      cfg_.out_dir + "/" + cfg_.subcommand + "-" + path_timestamp() + "-s" +
      std::to_string(cfg_.seed);
  std::string dir = base;
  for (int i = 2; fs::exists(dir); ++i) dir = base + "-" + std::to_string(i);
  fs::create_directories(dir);
  dir_ = dir;
  write_file("config.json", cfg_.to_json());
  write_manifest(false);
}

std::string RunWriter::csv_text() const {
  std::string text = csv_header();
  text += '\n';
  for (const auto& r : rows_) {
    text += csv_row(r);
    text += '\n';
  }
  return text;
}

void RunWriter::write_file(const std::string& name, const std::string& content) const {
  std::ofstream out(dir_ + "/" + name, std::ios::binary);
  out << content;
}

void RunWriter::write_manifest(bool complete) const {
  std::ostringstream m;
  m << "tool: fklab " << kToolVersion << "\n";
  m << "csv_schema: " << kCsvSchemaVersion << "\n";
  m << "subcommand: " << cfg_.subcommand << "\n";
  m << "config_hash: " << content_hash(cfg_.to_json()) << "\n";
  m << "seed: " << cfg_.seed << "\n";
  m << "pool_chains: " << cfg_.chains << "\n";
  m << "started_at: " << started_ << "\n";
  if (complete) {
    m << "finished_at: " << utc_timestamp() << "\n";
    m << "rows: " << rows_.size() << "\n";
  }
  m << "status: " << (complete ? "complete" : "incomplete") << "\n";
  write_file("MANIFEST", m.str());
}

void RunWriter::finalize() {
  if (finalized_) return;
  write_file("results.csv", csv_text());
  write_manifest(true);
  finalized_ = true;
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string coord(double v) { return format_double(std::round(v * 100.0) / 100.0); }

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string sweep_svg(const std::string& title, const std::string& x_label,
                      const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<double>& errs) {
  const double left = 70, right = 610, top = 45, bottom = 365;
  double xlo = xs.empty() ? 0 : *std::min_element(xs.begin(), xs.end());
  double xhi = xs.empty() ? 1 : *std::max_element(xs.begin(), xs.end());
  double ylo = 0, yhi = 1;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    double e = i < errs.size() ? errs[i] : 0;
    double lo = ys[i] - 2 * e, hi = ys[i] + 2 * e;
    if (i == 0 || lo < ylo) ylo = lo;
    if (i == 0 || hi > yhi) yhi = hi;
  }
  if (xhi <= xlo) {
    xlo -= 1;
    xhi += 1;
  }
  if (yhi <= ylo) {
    ylo -= 1;
    yhi += 1;
  }
  const double ypad = 0.06 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;
  auto sx = [&](double v) { return left + (v - xlo) / (xhi - xlo) * (right - left); };
  auto sy = [&](double v) { return bottom - (v - ylo) / (yhi - ylo) * (bottom - top); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\">\n";
  svg << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xlo + i * (xhi - xlo) / 4;
    const double yv = ylo + i * (yhi - ylo) / 4;
    svg << "<line x1=\"" << coord(sx(xv)) << "\" y1=\"" << coord(bottom) << "\" x2=\""
        << coord(sx(xv)) << "\" y2=\"" << coord(bottom + 5) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << coord(sx(xv)) << "\" y=\"" << coord(bottom + 20)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
        << tick_label(xv) << "</text>\n";
    svg << "<line x1=\"" << coord(left - 5) << "\" y1=\"" << coord(sy(yv)) << "\" x2=\""
        << coord(left) << "\" y2=\"" << coord(sy(yv)) << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << coord(left - 9) << "\" y=\"" << coord(sy(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
        << tick_label(yv) << "</text>\n";
  }
  svg << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(bottom) << "\" x2=\""
      << coord(right) << "\" y2=\"" << coord(bottom) << "\" stroke=\"#333\"/>\n";
  svg << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top) << "\" x2=\"" << coord(left)
      << "\" y2=\"" << coord(bottom) << "\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << coord((left + right) / 2) << "\" y=\"400\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"13\">"
      << xml_escape(x_label) << "</text>\n";

  bool any_err = false;
  for (double e : errs)
    if (e > 0) any_err = true;
  if (any_err && xs.size() > 1) {
    svg << "<polygon fill=\"#a6c8ff\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      svg << coord(sx(xs[i])) << "," << coord(sy(ys[i] + 2 * errs[i])) << " ";
    for (std::size_t i = xs.size(); i-- > 0;)
      svg << coord(sx(xs[i])) << "," << coord(sy(ys[i] - 2 * errs[i])) << " ";
    svg << "\"/>\n";
  }
  if (xs.size() > 1) {
    svg << "<polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      svg << coord(sx(xs[i])) << "," << coord(sy(ys[i])) << " ";
    svg << "\"/>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    svg << "<circle cx=\"" << coord(sx(xs[i])) << "\" cy=\"" << coord(sy(ys[i]))
        << "\" r=\"3\" fill=\"#1f6feb\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

namespace {

using nlohmann::json;

BoundarySpec boundary_for(const ExperimentConfig& cfg, const Region& region) {
  return cfg.bc == "wired" ? BoundarySpec::wired(region) : BoundarySpec::free_bc();
}

double binomial_se(double v, long n) {
  if (n < 1) return 0;
  double var = v * (1 - v);
  return var > 0 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
}

// Common MC metadata for rows the driver assembles itself.  The chains cell
// is always the fixed stream count; the pool size lives in the MANIFEST.
EstimatorResult make_mc_row(const ExperimentConfig& cfg, const std::string& name, long samples) {
  EstimatorResult r;
  r.name = name;
  r.samples = samples;
  r.params["p"] = format_double(cfg.p);
  r.params["q"] = format_double(cfg.q);
  r.params["eps"] = format_double(cfg.eps);
  r.params["seed"] = std::to_string(cfg.seed);
  r.params["chains"] = std::to_string(kEstimatorStreams);
  r.params["burn_in"] = std::to_string(cfg.burn_in);
  r.params["thinning"] = std::to_string(cfg.thinning);
  r.params["update"] = cfg.update;
  r.params["bc"] = cfg.bc;
  return r;
}

// Disconnection with the rare-event planning stage: a pilot at an eighth of
// the budget runs first, and a pilot that never sees the event keeps the
// full run from being burned on it.  The pilot's rule-of-three bound is the
// result then, flagged bound_only.  Pilot and full run share the seed, so
// the pilot is a prefix of the full chains, not a separate experiment.
EstimatorResult disconnection_with_cap(const ExperimentConfig& cfg, const McKnobs& mc) {
  const long pilot_floor = 160;
  if (cfg.samples >= 8 * pilot_floor) {
    EstimatorResult probe = disconnection_free(cfg.d, cfg.big_l, cfg.delta, cfg.c_factor, cfg.p,
                                               cfg.q, cfg.samples / 8, mc);
    if (probe.derived && probe.derived->bound_only) return probe;
  }
  return disconnection_free(cfg.d, cfg.big_l, cfg.delta, cfg.c_factor, cfg.p, cfg.q, cfg.samples,
                            mc);
}

EstimatorResult unique_single(const ExperimentConfig& cfg, const McKnobs& mc) {
  const Region region = Region::box(cfg.d, cfg.big_l);
  RunSpec spec{&region, boundary_for(cfg, region), cfg.p, cfg.q, cfg.eps, mc};
  const long m = cfg.delta.floor_times(cfg.big_l);
  const Coords origin = make_coords({});
  EstimatorResult r =
      estimate("unique-event", spec, cfg.samples, [&](const BondConfig& o, const BondConfig& g) {
        return unique_event(region, o, g, origin, m) ? 1.0 : 0.0;
      });
  r.params["d"] = std::to_string(cfg.d);
  r.params["L"] = std::to_string(cfg.big_l);
  r.params["delta"] = cfg.delta.str();
  r.params["bc"] = cfg.bc;
  return r;
}

// The estimator behind one estimate row; sweep reuses it per value.
EstimatorResult run_one(const ExperimentConfig& cfg) {
  const McKnobs mc = cfg.mc_knobs();
  if (cfg.experiment == "disconnection") return disconnection_with_cap(cfg, mc);
  if (cfg.experiment == "slab")
    return slab_connection(cfg.d, cfg.big_l, cfg.big_n, cfg.p, cfg.q, cfg.eps, cfg.x_coords(),
                           cfg.samples, mc);
  if (cfg.experiment == "mixing")
    return weak_mixing_gap(cfg.d, cfg.big_k, cfg.s, cfg.p, cfg.samples, mc);
  if (cfg.experiment == "surface")
    return wired_surface_tension_estimate(cfg.d, cfg.big_l, cfg.big_m, cfg.p, cfg.samples, mc);
  return unique_single(cfg, cfg.mc_knobs());
}

void oracle_cmd(const ExperimentConfig& cfg, RunWriter& w, std::ostream& out) {
  const Region region = cfg.make_region();
  const FkModel model{&region, boundary_for(cfg, region), cfg.p, cfg.q};

  EstimatorResult row;
  row.samples = 0;
  std::string detail;
  if (cfg.observable == "edge-marginal") {
    if (cfg.edge >= region.n_edges())
      throw ConfigError({"edge: region has only " + std::to_string(region.n_edges()) +
                         " edges"});
    row.estimate = fk_edge_marginal(model, cfg.edge);
    row.name = "oracle-edge-marginal";
    detail = "edge " + std::to_string(cfg.edge);
  } else if (cfg.observable == "partition") {
    row.estimate = fk_partition(model);
    row.name = "oracle-partition";
  } else {
    const int a = region.vertex_id(make_coords({}));
    const int b = region.vertex_id(cfg.x_coords());
    if (a < 0 || b < 0) throw ConfigError({"x: both the origin and x must be region vertices"});
    row.estimate =
        fk_event_prob(model, [a, b](const BondConfig&, const OracleView& view) {
          return view.same(a, b);
        });
    row.name = "oracle-connection";
    detail = "0 <-> x";
  }

  const RegionSpec& rs = region.spec();
  row.params["d"] = std::to_string(region.d());
  switch (rs.kind) {
    case RegionSpec::Kind::Box:
      row.params["N"] = std::to_string(rs.a);
      break;
    case RegionSpec::Kind::Slab:
      row.params["L"] = std::to_string(rs.a);
      row.params["N"] = std::to_string(rs.b);
      break;
    case RegionSpec::Kind::Rect:
      row.params["L"] = std::to_string(rs.a);
      row.params["M"] = std::to_string(rs.b);
      break;
    case RegionSpec::Kind::HalfBox:
      row.params["K"] = std::to_string(rs.a);
      break;
    default:
      break;
  }
  row.params["p"] = format_double(cfg.p);
  row.params["q"] = format_double(cfg.q);
  row.params["bc"] = cfg.bc;
  w.add(row);

  json j;
  j["region"] = rs.str();
  j["bc"] = cfg.bc;
  j["params"]["p"] = cfg.p;
  j["params"]["q"] = cfg.q;
  j["observable"] = detail.empty() ? cfg.observable : cfg.observable + " (" + detail + ")";
  j["value"] = row.estimate;
  out << j.dump() << "\n";
}

void sample_cmd(const ExperimentConfig& cfg, RunWriter& w) {
  const Region region = cfg.make_region();
  const McKnobs mc = cfg.mc_knobs();
  RunSpec spec{&region, boundary_for(cfg, region), cfg.p, cfg.q, cfg.eps, mc};

  const double n_edges = region.n_edges() > 0 ? region.n_edges() : 1;
  EstimatorResult r = estimate("sample-open-fraction", spec, cfg.samples,
                               [n_edges](const BondConfig& o, const BondConfig&) {
                                 return static_cast<double>(o.count_open()) / n_edges;
                               });
  r.params["d"] = std::to_string(region.d());
  r.params["bc"] = cfg.bc;
  w.add(r);

  const long per = chain_per_stream(cfg.samples);
  const long total = per * kEstimatorStreams;
  std::vector<std::string> lines(static_cast<std::size_t>(total));
  run_fk_chains(spec, cfg.samples,
                [&](int stream, long index, const BondConfig& omega, const BondConfig& gamma) {
                  const long sweep = cfg.burn_in + (index + 1) * static_cast<long>(cfg.thinning);
                  std::string line = "{\"sweep\":" + std::to_string(sweep) + ",\"omega\":\"" +
                                     omega.to_hex() + "\",\"gamma\":\"" + gamma.to_hex() +
                                     "\"}";
                  lines[static_cast<std::size_t>(stream * per + index)] = std::move(line);
                });
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text += '\n';
  }
  w.write_file("samples.jsonl", text);
}

bool axis_value(const std::string& axis, const std::string& token, double& numeric) {
  if (axis == "delta") {
    Frac f = Frac::parse(token);
    numeric = f.value();
    return true;
  }
  numeric = std::strtod(token.c_str(), nullptr);
  return true;
}

void apply_axis(ExperimentConfig& cfg, const std::string& axis, const std::string& token) {
  if (axis == "delta") {
    cfg.delta = Frac::parse(token);
    return;
  }
  if (axis == "p" || axis == "q" || axis == "eps") {
    const double v = std::strtod(token.c_str(), nullptr);
    if (axis == "p") cfg.p = v;
    if (axis == "q") cfg.q = v;
    if (axis == "eps") cfg.eps = v;
    return;
  }
  const long v = std::strtol(token.c_str(), nullptr, 10);
  if (axis == "L") cfg.big_l = v;
  if (axis == "N") cfg.big_n = v;
  if (axis == "M") cfg.big_m = v;
  if (axis == "K") cfg.big_k = v;
  if (axis == "C") cfg.c_factor = v;
}

void sweep_cmd(const ExperimentConfig& cfg, RunWriter& w) {
  std::vector<double> xs, ys, es;
  for (const auto& token : cfg.values) {
    ExperimentConfig one = cfg;
    one.subcommand = "estimate";
    apply_axis(one, cfg.axis, token);
    one.validate();
    EstimatorResult r = run_one(one);
    double xv = 0;
    axis_value(cfg.axis, token, xv);
    xs.push_back(xv);
    ys.push_back(r.estimate);
    es.push_back(r.stderr_value);
    w.add(r);
  }
  w.write_file("sweep.svg",
               sweep_svg(cfg.experiment + " over " + cfg.axis, cfg.axis, xs, ys, es));
}

void surface_cmd(const ExperimentConfig& cfg, RunWriter& w) {
  w.add(wired_surface_tension_estimate(cfg.d, cfg.big_l, cfg.big_m, cfg.p, cfg.samples,
                                       cfg.mc_knobs()));
  if (cfg.beta <= 0) return;
  const SurfaceDerivativeReport rep =
      surface_derivative_check(cfg.d, cfg.big_l, cfg.big_m, cfg.beta, cfg.fd_step);
  EstimatorResult tau;
  tau.name = "surface-tau-exact";
  tau.samples = 0;
  tau.estimate = rep.tau;
  tau.params["d"] = std::to_string(cfg.d);
  tau.params["L"] = std::to_string(cfg.big_l);
  tau.params["M"] = std::to_string(cfg.big_m);
  tau.params["beta"] = format_double(cfg.beta);
  tau.params["bc"] = "split";
  EstimatorResult fd = tau;
  fd.name = "surface-derivative-fd";
  fd.estimate = rep.fd;
  fd.params["h"] = format_double(cfg.fd_step);
  fd.derived = DerivedQuantity{"correlation_sum", rep.exact, 0, false};
  w.add(tau);
  w.add(fd);
}

void unique_cmd(const ExperimentConfig& cfg, RunWriter& w) {
  if (cfg.eps_grid.empty()) {
    w.add(unique_single(cfg, cfg.mc_knobs()));
    return;
  }
  const Region region = Region::box(cfg.d, cfg.big_l);
  RunSpec spec{&region, boundary_for(cfg, region), cfg.p, cfg.q, 0, cfg.mc_knobs()};
  const long m = cfg.delta.floor_times(cfg.big_l);
  const Coords origin = make_coords({});
  std::vector<EstimatorResult> rows = estimate_eps_grid(
      "unique-event", spec, cfg.samples, cfg.eps_grid,
      [&](const BondConfig& o, const BondConfig& g) {
        return unique_event(region, o, g, origin, m) ? 1.0 : 0.0;
      });
  for (auto& r : rows) {
    r.params["d"] = std::to_string(cfg.d);
    r.params["L"] = std::to_string(cfg.big_l);
    r.params["delta"] = cfg.delta.str();
    r.params["bc"] = cfg.bc;
    w.add(r);
  }
}

void usequence_cmd(const ExperimentConfig& cfg, RunWriter& w) {
  const Region region = Region::box(cfg.d, cfg.big_l);
  RunSpec spec{&region, boundary_for(cfg, region), cfg.p, cfg.q, cfg.eps, cfg.mc_knobs()};
  const long box_radius = cfg.delta.floor_times(cfg.big_l);
  const std::vector<long> radii = annulus_sequence(cfg.big_l, cfg.delta);
  const UTrajectoryReport rep = u_trajectory_report(spec, cfg.samples, box_radius, radii);
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    EstimatorResult r = make_mc_row(cfg, "usequence-count", rep.samples);
    r.params["d"] = std::to_string(cfg.d);
    r.params["L"] = std::to_string(cfg.big_l);
    r.params["delta"] = cfg.delta.str();
    r.params["ell"] = std::to_string(rep.radii[i]);
    r.estimate = rep.mean_counts[i];
    r.stderr_value = rep.count_stderr[i];
    if (i < rep.halving_freq.size())
      r.derived = DerivedQuantity{"halving_freq", rep.halving_freq[i], 0, false};
    w.add(r);
  }
}

std::string rle_row(const RenormField& f, long row) {
  const long side = f.side();
  std::string text;
  long start = 0;
  const auto* base = f.values.data() + row * side;
  while (start < side) {
    long stop = start;
    while (stop < side && base[stop] == base[start]) ++stop;
    if (!text.empty()) text += ' ';
    text += base[start] ? '1' : '0';
    text += '*';
    text += std::to_string(stop - start);
    start = stop;
  }
  return text;
}

void renorm_cmd(const ExperimentConfig& cfg, RunWriter& w) {
  std::vector<RenormField> fields;
  const RenormReport rep =
      renorm_pipeline(cfg.d, cfg.big_l, cfg.big_n, cfg.p, cfg.q, cfg.eps, cfg.delta, cfg.samples,
                      cfg.mc_knobs(), cfg.dump_fields ? &fields : nullptr);

  auto base_row = [&](const std::string& name, double value, double se) {
    EstimatorResult r = make_mc_row(cfg, name, rep.samples);
    r.params["d"] = std::to_string(cfg.d);
    r.params["L"] = std::to_string(cfg.big_l);
    r.params["N"] = std::to_string(cfg.big_n);
    r.params["delta"] = cfg.delta.str();
    r.params["bc"] = "free";
    r.estimate = value;
    r.stderr_value = se;
    return r;
  };

  w.add(base_row("renorm-mean-density", rep.stats.mean_density, 0));
  EstimatorResult alpha = base_row("renorm-alpha", rep.stats.alpha_hat, 0);
  alpha.derived =
      DerivedQuantity{"classes_kept", static_cast<double>(rep.stats.classes_kept), 0, false};
  if (!rep.stats.alpha_valid) alpha.params["flag"] = "no_class";
  w.add(alpha);
  w.add(base_row("renorm-far-link", rep.far_link_freq, binomial_se(rep.far_link_freq, rep.samples)));
  w.add(base_row("renorm-direct-far", rep.direct_far_freq,
                 binomial_se(rep.direct_far_freq, rep.samples)));
  w.add(base_row("renorm-glue-origin", rep.glue_origin_freq,
                 binomial_se(rep.glue_origin_freq, rep.samples)));
  w.add(base_row("renorm-glue-far", rep.glue_far_freq,
                 binomial_se(rep.glue_far_freq, rep.samples)));

  if (cfg.dump_fields) {
    std::string text;
    for (const auto& f : fields) {
      text += "{\"sample\":" + std::to_string(f.sample_id) + ",\"n\":" + std::to_string(f.n) +
              ",\"rows\":[";
      for (long row = 0; row < f.side(); ++row) {
        if (row > 0) text += ',';
        text += '"' + rle_row(f, row) + '"';
      }
      text += "]}\n";
    }
    w.write_file("fields.jsonl", text);
  }
}

int report_cmd(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir(cfg.run_dir);
  std::ifstream manifest(dir / "MANIFEST");
  if (!manifest) {
    err << "config error:\n  - run: no MANIFEST under " << cfg.run_dir << "\n";
    return 2;
  }
  out << "run " << cfg.run_dir << "\n";
  std::string line;
  while (std::getline(manifest, line)) out << "  " << line << "\n";

  std::ifstream csv(dir / "results.csv");
  if (!csv) {
    out << "  (no results.csv; the run never finished)\n";
    return 0;
  }
  std::getline(csv, line);  // header
  const bool color = use_color();
  double best_tau = 0;
  std::string best_tau_from;
  bool saw_tau = false;
  out << "rows:\n";
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream split(line);
    while (std::getline(split, cell, ',')) cells.push_back(cell);
    cells.resize(22);
    out << "  " << cells[0] << ": " << cells[16];
    if (!cells[17].empty() && cells[17] != "0") out << " +- " << cells[17];
    if (!cells[18].empty()) out << "  " << cells[18] << "=" << cells[19];
    if (!cells[21].empty()) {
      if (color)
        out << "  [\x1b[33m" << cells[21] << "\x1b[0m]";
      else
        out << "  [" << cells[21] << "]";
    }
    out << "\n";
    if (cells[18] == "tau_hat") {
      const double tau = std::strtod(cells[19].c_str(), nullptr);
      if (!saw_tau || tau > best_tau) {
        best_tau = tau;
        best_tau_from = cells[0] + " delta=" + cells[9] + " C=" + cells[10];
      }
      saw_tau = true;
    }
  }
  if (saw_tau)
    out << "max tau_hat: " << format_double(best_tau) << "  (" << best_tau_from << ")\n";
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    if (cfg.subcommand == "report") return report_cmd(cfg, out, err);

    RunWriter w(cfg);
    if (cfg.subcommand == "oracle")
      oracle_cmd(cfg, w, out);
    else if (cfg.subcommand == "sample")
      sample_cmd(cfg, w);
    else if (cfg.subcommand == "estimate")
      w.add(run_one(cfg));
    else if (cfg.subcommand == "sweep")
      sweep_cmd(cfg, w);
    else if (cfg.subcommand == "surface")
      surface_cmd(cfg, w);
    else if (cfg.subcommand == "unique")
      unique_cmd(cfg, w);
    else if (cfg.subcommand == "usequence")
      usequence_cmd(cfg, w);
    else if (cfg.subcommand == "renorm")
      renorm_cmd(cfg, w);
    else if (cfg.subcommand == "mixing")
      w.add(weak_mixing_gap(cfg.d, cfg.big_k, cfg.s, cfg.p, cfg.samples, cfg.mc_knobs()));
    w.finalize();

    bool bound = false;
    for (const auto& r : w.rows()) {
      const bool row_bound =
          (r.derived && r.derived->bound_only) || param_or_empty(r, "flag") == "bound_only";
      bound = bound || row_bound;
      out << r.name << ": " << format_double(r.estimate);
      if (r.stderr_value > 0) out << " +- " << format_double(r.stderr_value);
      if (r.derived) out << "  " << r.derived->name << "=" << format_double(r.derived->value);
      if (row_bound) out << "  [bound_only]";
      out << "\n";
    }
    out << "run dir: " << w.dir() << "\n";
    return bound ? 4 : 0;
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const auto& issue : e.issues()) err << "  - " << issue << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    err << "cap exceeded: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "config error:\n  - " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fklab
