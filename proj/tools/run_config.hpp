#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodbell/rodbell.hpp"

namespace rodbell::cli {

/// Malformed or invalid run configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& what)
      : std::runtime_error(format(key, line, what)), key_(key), line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string s = "config error";
    if (!key.empty()) s += " at '" + key + "'";
    if (line > 0) s += " (line " + std::to_string(line) + ")";
    return s + ": " + what;
  }
  std::string key_;
  int line_;
};

struct DetectorEntry {
  Region shape = Region::box({}, {1, 1, 1});
  Vec3 reading;
};

struct ExperimentEntry {
  Region v1 = Region::box({-1, 0, 0}, {0.5, 0.5, 0.5});
  Region v2 = Region::box({1, 0, 0}, {0.5, 0.5, 0.5});
  DetectorEntry detector_x;
  DetectorEntry detector_y;
  SmearingKernel kernel;
  Vec3 origin_offset;
};

struct LogRange {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;
};

struct SweepEntry {
  std::optional<std::vector<double>> distances;
  std::optional<LogRange> log_range;
  Vec3 direction{1, 0, 0};

  /// Explicit list, or the log-spaced expansion of log_range.
  std::vector<double> resolved_distances() const;
};

struct SizeStudyEntry {
  std::vector<double> scales;
};

struct ProbabilityEntry {
  std::vector<SpinComponent> components;
  DetectorEntry detector;
  SmearingKernel kernel;
};

enum class OutputFormat { Csv, Jsonl };

struct OutputEntry {
  std::string path;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;
};

/*!
 * Parsed run configuration.
 *
 * The file format is YAML restricted to the documented keys; see
 * configs/README.md for the grammar. Unknown keys are rejected.
 */
struct RunConfig {
  std::string units = "desk";  // desk | si
  std::optional<ExperimentEntry> experiment;
  Engine engine;
  std::optional<SweepEntry> sweep;
  std::optional<SizeStudyEntry> size_study;
  std::optional<ProbabilityEntry> probability;
  OutputEntry output;

  /// Validated experiment; throws ConfigError when absent or inconsistent.
  ExperimentConfig experiment_config() const;
  SingleParticleState probability_state() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Canonical YAML: fixed key order, shortest round-trip numbers.
std::string to_canonical_yaml(const RunConfig& cfg, bool include_output = true);

/// FNV-1a 64 over the canonical form without the output section, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::string format_number(double v);

}  // namespace rodbell::cli
