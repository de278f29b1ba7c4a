#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fklab/estimators.hpp"
#include "fklab/geometry.hpp"

namespace fklab {

// Validation failure carrying every offending field at once, so one round
// trip reports the whole repair list.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// Everything a run needs, assembled from a JSON file and command-line flags.
// Flags win over the file; the SEED environment variable sits between them.
// Field defaults here are the documented defaults of the tool.
struct ExperimentConfig {
  std::string subcommand;
  std::string experiment = "disconnection";  // estimate and sweep dispatch
  std::string region = "box";                // oracle and sample geometry
  int d = 2;
  long big_l = 8;   // L
  long big_n = 0;   // N; 0 means "not set" where a subcommand requires it
  long big_m = 2;   // M
  long big_k = 4;   // K
  double p = 0.5;
  double q = 2.0;
  double eps = 0.0;
  std::vector<double> eps_grid;
  std::string bc = "free";
  double beta = 0.0;     // surface: nonzero adds the derivative cross-check
  double fd_step = 1e-4;
  std::string update = "heat-bath";  // or "sw"
  int burn_in = 1000;
  int thinning = 10;
  int chains = 1;        // worker pool size; never affects results
  long samples = 1024;
  std::uint64_t seed = 1;
  Frac delta{1, 2};
  long c_factor = 1;     // C
  long ell = 0;          // 0 means the C0-controlled default
  double c0 = 1.0;
  std::vector<long> x;   // connection target; empty means the far corner
  double s = 0.5;        // mixing boundary intensity
  int edge = 0;          // oracle edge index
  std::string observable = "edge-marginal";
  std::string axis;                 // sweep
  std::vector<std::string> values;  // sweep; raw tokens, parsed per axis
  std::string out_dir = "runs";
  std::string run_dir;   // report target
  bool dump_samples = false;
  bool dump_fields = false;

  // Parsing collects unknown keys and type mismatches into a ConfigError;
  // it never half-applies a broken file.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);

  // Canonical serialization persisted into every run directory.  Stable key
  // order, delta as a fraction string, so equal configs give equal bytes.
  std::string to_json() const;

  // Throws ConfigError listing every problem, not just the first.
  void validate() const;

  // Geometry for the oracle and sample subcommands.
  Region make_region() const;

  // Sampler knobs with the shared seed threaded through.
  McKnobs mc_knobs() const;

  // ell, or ceil(c0 * (log L)^(1/(d-1))) when unset.
  long ell_value() const;

  // x padded to kMaxDim; the far slab corner (0,..,0,N,N) when empty.
  Coords x_coords() const;
};

}  // namespace fklab
