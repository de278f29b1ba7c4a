#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fklab/config.hpp"
#include "fklab/estimators.hpp"

namespace fklab {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

// 64-bit FNV-1a digest as 16 hex characters; keys run directories to the
// exact config text that produced them.
std::string content_hash(std::string_view text);

std::string utc_timestamp();  // 2026-08-18T07:00:00Z

// Fixed result schema, version 1.  Every estimator row becomes one line;
// cells a row has no value for stay empty.  Rows are pure functions of the
// estimator output, so identical runs give identical bytes regardless of
// the worker pool.
std::string csv_header();
std::string csv_row(const EstimatorResult& r);

// One timestamped directory under out_dir holding config.json, MANIFEST,
// results.csv and any dumps.  The MANIFEST says "incomplete" from creation
// until finalize, so interrupted runs stay visibly partial.
class RunWriter {
 public:
  explicit RunWriter(const ExperimentConfig& cfg);
  const std::string& dir() const { return dir_; }
  void add(const EstimatorResult& row) { rows_.push_back(row); }
  const std::vector<EstimatorResult>& rows() const { return rows_; }
  std::string csv_text() const;
  void write_file(const std::string& name, const std::string& content) const;
  void finalize();

 private:
  void write_manifest(bool complete) const;

  ExperimentConfig cfg_;
  std::string dir_;
  std::string started_;
  std::vector<EstimatorResult> rows_;
  bool finalized_ = false;
};

// Standalone SVG: ys over xs with a +-2*err band, markers on the points.
std::string sweep_svg(const std::string& title, const std::string& x_label,
                      const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<double>& errs);

// Executes a validated config end to end: builds the run directory, writes
// every output file, prints a short summary to out.  Returns the process
// exit code: 0 done, 2 config error, 3 enumeration cap exceeded, 4 at least
// one result is a rare-event bound rather than an estimate.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace fklab
