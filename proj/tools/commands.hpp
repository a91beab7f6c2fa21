#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "run_config.hpp"

namespace rodbell::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<EngineMethod> method;
  std::optional<double> n_sigma;
  std::optional<std::string> out;
  std::optional<OutputFormat> format;
  int jobs = 1;
};

void apply(RunConfig& cfg, const Overrides& ov);

// Each command reads the config, writes its records to the configured output
// (or `out` when no path is set) and reports problems on `err`.
int run_chsh(const std::string& config_path, const Overrides& ov, std::ostream& out,
             std::ostream& err);
int run_sweep(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err);
int run_size_study(const std::string& config_path, const Overrides& ov, std::ostream& out,
                   std::ostream& err);
int run_probability(const std::string& config_path, const Overrides& ov, std::ostream& out,
                    std::ostream& err);

struct SuppressionArgs {
  double delta = 0.0;
  double d = 0.0;
  double planck_length = kPlanckLengthSI;
  std::optional<double> delta_to;  // log-spaced grid in delta up to this value
  std::optional<double> d_to;      // log-spaced grid in d up to this value
  int steps = 1;
  bool nuclear_inputs = false;  // delta = 1e-15 m, d = 1e9 m, CODATA planck length
  OutputFormat format = OutputFormat::Csv;
};

int run_suppression(const SuppressionArgs& args, std::ostream& out, std::ostream& err);

}  // namespace rodbell::cli
