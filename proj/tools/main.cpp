#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace rodbell::cli;

int main(int argc, char** argv) {
  CLI::App app{"CHSH violation with smeared detector positions", "rodbell"};
  app.set_version_flag("--version", std::string(rodbell::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string method, format;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
  std::optional<double> n_sigma;
  std::optional<std::string> out;
  int jobs = 1;

  app.add_option("--config", config_path, "Run configuration file (YAML)");
  app.add_option("--seed", seed, "Master seed (u64)");
  app.add_option("--samples", samples, "Monte Carlo samples per integral");
  app.add_option("--method", method, "auto | closed | quadrature | mc")
      ->check(CLI::IsMember({"auto", "closed", "quadrature", "mc"}));
  app.add_option("--n-sigma", n_sigma, "Quadrature truncation in standard deviations");
  app.add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output file (default: standard output)");
  app.add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* chsh = app.add_subcommand("chsh", "Evaluate the CHSH combination for one configuration");
  auto* sweep = app.add_subcommand("sweep", "CHSH as the rod origin recedes");
  auto* size = app.add_subcommand("size-study", "CHSH against detector size");
  auto* prob = app.add_subcommand("prob", "Spin probabilities given a rod reading");
  auto* supp = app.add_subcommand("suppression", "Four-particle suppression factor table");
  for (auto* sub : {chsh, sweep, size, prob, supp}) sub->fallthrough();

  SuppressionArgs sa;
  supp->add_option("--delta", sa.delta, "Intra-pair separation");
  supp->add_option("--d", sa.d, "Inter-pair separation");
  supp->add_option("--planck-length", sa.planck_length, "Planck length (default: CODATA, metres)");
  supp->add_option("--delta-to", sa.delta_to, "Log-spaced grid in delta up to this value");
  supp->add_option("--d-to", sa.d_to, "Log-spaced grid in d up to this value");
  supp->add_option("--steps", sa.steps, "Grid points per varied axis");
  supp->add_flag("--nuclear-inputs", sa.nuclear_inputs,
                 "delta = 1e-15 m, d = 1e9 m with the CODATA planck length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Overrides ov;
  ov.seed = seed;
  ov.samples = samples;
  ov.n_sigma = n_sigma;
  ov.out = out;
  ov.jobs = jobs;
  static const std::map<std::string, rodbell::EngineMethod> methods{
      {"auto", rodbell::EngineMethod::Auto},
      {"closed", rodbell::EngineMethod::Closed},
      {"quadrature", rodbell::EngineMethod::Quadrature},
      {"mc", rodbell::EngineMethod::MonteCarlo}};
  if (!method.empty()) ov.method = methods.at(method);
  if (!format.empty()) ov.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Jsonl;

  if (supp->parsed()) {
    if (ov.format) sa.format = *ov.format;
    return run_suppression(sa, std::cout, std::cerr);
  }
  if (config_path.empty()) {
    std::cerr << "--config is required for this subcommand\n";
    return kExitConfig;
  }
  if (chsh->parsed()) return run_chsh(config_path, ov, std::cout, std::cerr);
  if (sweep->parsed()) return run_sweep(config_path, ov, std::cout, std::cerr);
  if (size->parsed()) return run_size_study(config_path, ov, std::cout, std::cerr);
  return run_probability(config_path, ov, std::cout, std::cerr);
}
