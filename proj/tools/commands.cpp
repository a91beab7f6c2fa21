#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>

#include "records.hpp"

namespace rodbell::cli {
namespace {

/// Runs a command body, mapping failures onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InternalInconsistency: return kExitNumerical;
      default: return kExitConfig;
    }
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

/// Destination stream: the configured file, or `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ConfigError("output.path", 0, "cannot open '" + path + "' for writing");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

RunConfig load(const std::string& path, const Overrides& ov) {
  RunConfig cfg = load_run_config(path);
  apply(cfg, ov);
  return cfg;
}

std::string method_label(const Estimate& e) { return std::string(to_string(e.method)); }

int write_sweep(const RunConfig& cfg, const std::vector<SweepRecord>& recs,
                const std::string& param_column, std::ostream& fallback, std::ostream& err) {
  Sink sink(cfg.output.path, fallback);
  RecordWriter w(sink.stream(), cfg.output.format,
                 {param_column, "chsh", "chsh_stderr", "deficit", "method", "seed"},
                 config_hash(cfg));
  bool failed = false;
  for (const auto& r : recs) {
    const std::string method = r.error ? "error" : method_label(r.chsh);
    w.row({r.parameter, r.chsh.value, r.chsh.std_error, r.deficit, method, r.seed});
    if (r.error) {
      err << param_column << '=' << format_number(r.parameter) << ": " << *r.error << '\n';
      failed = true;
    }
  }
  return failed ? kExitNumerical : kExitOk;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> log_grid(double from, std::optional<double> to, int steps) {
  if (!to || steps <= 1) return {from};
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    out.push_back(from * std::pow(*to / from, static_cast<double>(i) / (steps - 1)));
  }
  return out;
}

}  // namespace

void apply(RunConfig& cfg, const Overrides& ov) {
  if (ov.seed) cfg.engine.seed = *ov.seed;
  if (ov.samples) {
    if (*ov.samples <= 0) throw ConfigError("--samples", 0, "must be positive");
    cfg.engine.samples = *ov.samples;
  }
  if (ov.method) cfg.engine.method = *ov.method;
  if (ov.n_sigma) {
    if (!(*ov.n_sigma > 0)) throw ConfigError("--n-sigma", 0, "must be positive");
    cfg.engine.n_sigma = *ov.n_sigma;
  }
  if (ov.out) cfg.output.path = *ov.out;
  if (ov.format) cfg.output.format = *ov.format;
  if (ov.jobs < 1) throw ConfigError("--jobs", 0, "must be at least 1");
}

int run_chsh(const std::string& config_path, const Overrides& ov, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(config_path, ov);
    const ExperimentConfig exp = cfg.experiment_config();
    const ChshResult r = chsh_value(exp, cfg.engine);
    const SpacelikeReport sl = spacelike_check(exp);
    if (!sl.ok) {
      err << "warning: detector diameters (" << format_number(sl.diameter_x) << ", "
          << format_number(sl.diameter_y) << ") not below half the particle separation ("
          << format_number(sl.separation / 2) << ")\n";
    }
    Sink sink(cfg.output.path, out);
    RecordWriter w(sink.stream(), cfg.output.format,
                   {"chsh", "chsh_stderr", "chsh_direct", "chsh_direct_stderr", "deficit",
                    "corr_zz", "corr_zz_stderr", "corr_xx", "corr_xx_stderr", "corr_zx", "qs",
                    "rs", "rt", "qt", "method", "seed", "spacelike"},
                   config_hash(cfg));
    w.row({r.chsh.value, r.chsh.std_error, r.chsh_direct.value, r.chsh_direct.std_error,
           r.deficit, r.corr_zz.value, r.corr_zz.std_error, r.corr_xx.value,
           r.corr_xx.std_error, corr_zx(exp).value, r.qs.value, r.rs.value, r.rt.value,
           r.qt.value, method_label(r.chsh), cfg.engine.seed, sl.ok});
    return std::isfinite(r.chsh.value) ? kExitOk : kExitNumerical;
  });
}

int run_sweep(const std::string& config_path, const Overrides& ov, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(config_path, ov);
    if (!cfg.sweep) throw ConfigError("sweep", 0, "missing sweep section");
    const auto distances = cfg.sweep->resolved_distances();
    if (distances.empty()) throw ConfigError("sweep.distances", 0, "empty distance list");
    const auto recs =
        origin_sweep(cfg.experiment_config(), distances, cfg.sweep->direction, cfg.engine, ov.jobs);
    return write_sweep(cfg, recs, "origin_distance", out, err);
  });
}

int run_size_study(const std::string& config_path, const Overrides& ov, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(config_path, ov);
    if (!cfg.size_study) throw ConfigError("size_study", 0, "missing size_study section");
    const auto recs =
        detector_size_study(cfg.experiment_config(), cfg.size_study->scales, cfg.engine, ov.jobs);
    return write_sweep(cfg, recs, "scale_factor", out, err);
  });
}

int run_probability(const std::string& config_path, const Overrides& ov, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(config_path, ov);
    const SingleParticleState state = cfg.probability_state();
    const auto& p = *cfg.probability;
    const DetectorSpec det(p.detector.shape, p.detector.reading);
    const Estimate up = conditional_probability(state, +1, det, p.kernel, cfg.engine);
    const Estimate down = conditional_probability(state, -1, det, p.kernel, cfg.engine);
    Sink sink(cfg.output.path, out);
    RecordWriter w(sink.stream(), cfg.output.format,
                   {"p_plus", "p_plus_stderr", "p_minus", "p_minus_stderr", "method"},
                   config_hash(cfg));
    w.row({up.value, up.std_error, down.value, down.std_error,
           std::string(to_string(combine(up.method, down.method)))});
    return kExitOk;
  });
}

int run_suppression(const SuppressionArgs& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SuppressionArgs args = in;
    if (args.nuclear_inputs) {
      args.delta = 1e-15;
      args.d = 1e9;
      args.planck_length = kPlanckLengthSI;
    }
    for (double v : {args.delta, args.d, args.planck_length}) {
      if (!(v > 0) || !std::isfinite(v)) {
        throw ConfigError("suppression", 0, "delta, d and planck length must be positive");
      }
    }
    if ((args.delta_to && !(*args.delta_to > 0)) || (args.d_to && !(*args.d_to > 0))) {
      throw ConfigError("suppression", 0, "grid end points must be positive");
    }
    if (args.steps < 1) throw ConfigError("--steps", 0, "must be at least 1");

    const std::string key = format_number(args.delta) + ';' + format_number(args.d) + ';' +
                            format_number(args.planck_length) + ';' +
                            format_number(args.delta_to.value_or(0)) + ';' +
                            format_number(args.d_to.value_or(0)) + ';' +
                            std::to_string(args.steps);
    RecordWriter w(out, args.format,
                   {"delta", "d", "planck_length", "exponent", "factor", "one_minus_factor"},
                   fnv1a_hex(key));
    auto note = [&](const std::string& text) {
      if (args.format == OutputFormat::Csv) out << "# note: " << text << '\n';
      else err << "note: " << text << '\n';
    };
    for (double delta : log_grid(args.delta, args.delta_to, args.steps)) {
      for (double d : log_grid(args.d, args.d_to, args.steps)) {
        const FourPairConfig fp{delta, d, args.planck_length};
        const double x = suppression_exponent(fp);
        w.row({delta, d, args.planck_length, x, std::exp(-x), -std::expm1(-x)});
        if (std::exp(-x) == 0.0) {
          note("factor underflows double precision at delta=" + format_number(delta) +
               ", d=" + format_number(d) + "; log10(factor) = " +
               format_number(-x / std::numbers::ln10));
        }
      }
    }
    if (args.nuclear_inputs) {
      note("nuclear-scale delta with d of a million kilometres gives an exponent of " +
           format_number(suppression_exponent({args.delta, args.d, args.planck_length})) +
           ", not an effect of order 1e-6; both factor and 1 - factor are listed");
    }
    return kExitOk;
  });
}

}  // namespace rodbell::cli
