#include "run_config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace rodbell::cli {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) throw ConfigError(path, line_of(n), "expected a mapping");
}

void check_keys(const YAML::Node& n, const std::string& path,
                std::initializer_list<const char*> allowed) {
  require_map(n, path);
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!keys.contains(key)) throw ConfigError(join(path, key), line_of(kv.first), "unknown key");
  }
}

YAML::Node required(const YAML::Node& n, const std::string& path, const std::string& key) {
  const YAML::Node child = n[key];
  if (!child) throw ConfigError(join(path, key), line_of(n), "missing required key");
  return child;
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path, line_of(n), "expected a scalar value");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, line_of(n), "cannot convert '" + n.Scalar() + "'");
  }
}

double real(const YAML::Node& n, const std::string& path) {
  const double v = scalar<double>(n, path);
  if (!std::isfinite(v)) throw ConfigError(path, line_of(n), "value must be finite");
  return v;
}

Vec3 vec3(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 3) {
    throw ConfigError(path, line_of(n), "expected a list of three numbers");
  }
  return {real(n[0], path), real(n[1], path), real(n[2], path)};
}

std::vector<double> real_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path, line_of(n), "expected a list of numbers");
  std::vector<double> out;
  for (const auto& item : n) out.push_back(real(item, path));
  return out;
}

/// Runs `f`, turning library validation errors into config errors at `n`.
template <typename F>
auto validated(const YAML::Node& n, const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(path, line_of(n), e.what());
  }
}

Region region(const YAML::Node& n, const std::string& path, bool centered_template) {
  require_map(n, path);
  const auto shape = scalar<std::string>(required(n, path, "shape"), join(path, "shape"));
  Vec3 center;
  if (n["center"]) center = vec3(n["center"], join(path, "center"));
  if (centered_template && center != Vec3{}) {
    throw ConfigError(join(path, "center"), line_of(n["center"]),
                      "detector templates are centered at the origin");
  }
  if (shape == "box") {
    check_keys(n, path, {"shape", "center", "half_extents"});
    const Vec3 h = vec3(required(n, path, "half_extents"), join(path, "half_extents"));
    return validated(n, path, [&] { return Region::box(center, h); });
  }
  if (shape == "sphere") {
    check_keys(n, path, {"shape", "center", "radius"});
    const double r = real(required(n, path, "radius"), join(path, "radius"));
    return validated(n, path, [&] { return Region::sphere(center, r); });
  }
  throw ConfigError(join(path, "shape"), line_of(n["shape"]), "shape must be 'box' or 'sphere'");
}

DetectorEntry detector(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"template", "reading"});
  return {region(required(n, path, "template"), join(path, "template"), true),
          vec3(required(n, path, "reading"), join(path, "reading"))};
}

SmearingKernel kernel(const YAML::Node& n, const std::string& path, const std::string& units) {
  require_map(n, path);
  const auto law = scalar<std::string>(required(n, path, "law"), join(path, "law"));
  if (law == "delta") {
    check_keys(n, path, {"law"});
    return SmearingKernel::delta();
  }
  if (law == "fixed_width") {
    check_keys(n, path, {"law", "variance"});
    const double var = real(required(n, path, "variance"), join(path, "variance"));
    return validated(n, path, [&] { return SmearingKernel::fixed_width(var); });
  }
  if (law == "ng_van_dam") {
    check_keys(n, path, {"law", "planck_length", "dispersion_floor"});
    double lp = units == "si" ? kPlanckLengthSI : 1.0;
    double floor = 0.0;
    if (n["planck_length"]) lp = real(n["planck_length"], join(path, "planck_length"));
    if (n["dispersion_floor"]) floor = real(n["dispersion_floor"], join(path, "dispersion_floor"));
    return validated(n, path, [&] { return SmearingKernel::ng_van_dam(lp, floor); });
  }
  throw ConfigError(join(path, "law"), line_of(n["law"]),
                    "law must be 'delta', 'fixed_width' or 'ng_van_dam'");
}

EngineMethod engine_method(const YAML::Node& n, const std::string& path) {
  const auto s = scalar<std::string>(n, path);
  if (s == "auto") return EngineMethod::Auto;
  if (s == "closed") return EngineMethod::Closed;
  if (s == "quadrature") return EngineMethod::Quadrature;
  if (s == "mc") return EngineMethod::MonteCarlo;
  throw ConfigError(path, line_of(n), "method must be auto, closed, quadrature or mc");
}

Engine engine(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"method", "samples", "nodes", "n_sigma", "seed"});
  Engine e;
  if (n["method"]) e.method = engine_method(n["method"], join(path, "method"));
  if (n["samples"]) e.samples = scalar<std::int64_t>(n["samples"], join(path, "samples"));
  if (n["nodes"]) e.nodes = scalar<int>(n["nodes"], join(path, "nodes"));
  if (n["n_sigma"]) e.n_sigma = real(n["n_sigma"], join(path, "n_sigma"));
  if (n["seed"]) e.seed = scalar<std::uint64_t>(n["seed"], join(path, "seed"));
  if (e.samples <= 0) throw ConfigError(join(path, "samples"), line_of(n), "must be positive");
  if (e.nodes <= 0) throw ConfigError(join(path, "nodes"), line_of(n), "must be positive");
  if (!(e.n_sigma > 0)) throw ConfigError(join(path, "n_sigma"), line_of(n), "must be positive");
  return e;
}

SweepEntry sweep(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"distances", "log_range", "direction"});
  SweepEntry s;
  if (n["distances"] && n["log_range"]) {
    throw ConfigError(path, line_of(n), "give either 'distances' or 'log_range', not both");
  }
  if (n["distances"]) {
    s.distances = real_list(n["distances"], join(path, "distances"));
    if (s.distances->empty()) {
      throw ConfigError(join(path, "distances"), line_of(n["distances"]), "empty distance list");
    }
  } else if (n["log_range"]) {
    const auto lr = n["log_range"];
    const auto lp = join(path, "log_range");
    check_keys(lr, lp, {"start", "stop", "count"});
    LogRange r{real(required(lr, lp, "start"), join(lp, "start")),
               real(required(lr, lp, "stop"), join(lp, "stop")),
               scalar<int>(required(lr, lp, "count"), join(lp, "count"))};
    if (!(r.start > 0) || !(r.stop >= r.start) || r.count < 1) {
      throw ConfigError(lp, line_of(lr), "need 0 < start <= stop and count >= 1");
    }
    s.log_range = r;
  } else {
    throw ConfigError(join(path, "distances"), line_of(n), "missing 'distances' or 'log_range'");
  }
  if (n["direction"]) s.direction = vec3(n["direction"], join(path, "direction"));
  if (s.direction == Vec3{}) {
    throw ConfigError(join(path, "direction"), line_of(n), "direction must be non-zero");
  }
  const auto d = s.resolved_distances();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 0 || (i > 0 && d[i] < d[i - 1])) {
      throw ConfigError(join(path, "distances"), line_of(n),
                        "distances must be non-negative and ascending");
    }
  }
  return s;
}

SizeStudyEntry size_study(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"scales"});
  SizeStudyEntry s{real_list(required(n, path, "scales"), join(path, "scales"))};
  if (s.scales.empty()) throw ConfigError(join(path, "scales"), line_of(n), "empty scale list");
  for (double v : s.scales) {
    if (!(v > 0)) throw ConfigError(join(path, "scales"), line_of(n), "scales must be positive");
  }
  return s;
}

ProbabilityEntry probability(const YAML::Node& n, const std::string& path,
                             const std::string& units) {
  check_keys(n, path, {"components", "detector", "kernel"});
  ProbabilityEntry p;
  const auto comps = required(n, path, "components");
  const auto cpath = join(path, "components");
  if (!comps.IsSequence() || comps.size() == 0) {
    throw ConfigError(cpath, line_of(comps), "expected a non-empty list of components");
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto c = comps[i];
    const auto ip = cpath + "[" + std::to_string(i) + "]";
    check_keys(c, ip, {"region", "spin", "weight"});
    p.components.push_back({region(required(c, ip, "region"), join(ip, "region"), false),
                            scalar<int>(required(c, ip, "spin"), join(ip, "spin")),
                            real(required(c, ip, "weight"), join(ip, "weight"))});
  }
  p.detector = detector(required(n, path, "detector"), join(path, "detector"));
  p.kernel = kernel(required(n, path, "kernel"), join(path, "kernel"), units);
  validated(n, path, [&] { return SingleParticleState(p.components); });
  return p;
}

OutputEntry output(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"path", "format"});
  OutputEntry o;
  if (n["path"]) o.path = scalar<std::string>(n["path"], join(path, "path"));
  if (n["format"]) {
    const auto f = scalar<std::string>(n["format"], join(path, "format"));
    if (f == "csv") o.format = OutputFormat::Csv;
    else if (f == "jsonl") o.format = OutputFormat::Jsonl;
    else throw ConfigError(join(path, "format"), line_of(n["format"]), "format must be csv or jsonl");
  }
  return o;
}

//---------------------------------------------------------------------------//
// Canonical emission
//---------------------------------------------------------------------------//

void emit_vec(YAML::Emitter& out, const Vec3& v) {
  out << YAML::Flow << YAML::BeginSeq << format_number(v.x) << format_number(v.y)
      << format_number(v.z) << YAML::EndSeq;
}

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << format_number(x);
  out << YAML::EndSeq;
}

void emit_region(YAML::Emitter& out, const Region& r, bool with_center) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "shape" << YAML::Value << (r.is_box() ? "box" : "sphere");
  if (with_center) {
    out << YAML::Key << "center" << YAML::Value;
    emit_vec(out, r.center());
  }
  if (r.is_box()) {
    out << YAML::Key << "half_extents" << YAML::Value;
    emit_vec(out, r.as_box().half_extents);
  } else {
    out << YAML::Key << "radius" << YAML::Value << format_number(r.as_sphere().radius);
  }
  out << YAML::EndMap;
}

void emit_detector(YAML::Emitter& out, const DetectorEntry& d) {
  out << YAML::BeginMap << YAML::Key << "template" << YAML::Value;
  emit_region(out, d.shape, false);
  out << YAML::Key << "reading" << YAML::Value;
  emit_vec(out, d.reading);
  out << YAML::EndMap;
}

void emit_kernel(YAML::Emitter& out, const SmearingKernel& k) {
  out << YAML::Flow << YAML::BeginMap;
  if (const auto* fw = std::get_if<law::FixedWidth>(&k.law())) {
    out << YAML::Key << "law" << YAML::Value << "fixed_width";
    out << YAML::Key << "variance" << YAML::Value << format_number(fw->variance);
  } else if (const auto* nv = std::get_if<law::NgVanDam>(&k.law())) {
    out << YAML::Key << "law" << YAML::Value << "ng_van_dam";
    out << YAML::Key << "planck_length" << YAML::Value << format_number(nv->planck_length);
    out << YAML::Key << "dispersion_floor" << YAML::Value
        << format_number(k.dispersion_floor());
  } else {
    out << YAML::Key << "law" << YAML::Value << "delta";
  }
  out << YAML::EndMap;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::vector<double> SweepEntry::resolved_distances() const {
  if (distances) return *distances;
  std::vector<double> out;
  if (!log_range) return out;
  const auto& r = *log_range;
  for (int i = 0; i < r.count; ++i) {
    const double t = r.count == 1 ? 0.0 : static_cast<double>(i) / (r.count - 1);
    out.push_back(r.start * std::pow(r.stop / r.start, t));
  }
  return out;
}

ExperimentConfig RunConfig::experiment_config() const {
  if (!experiment) throw ConfigError("experiment", 0, "missing experiment section");
  const auto& e = *experiment;
  try {
    return ExperimentConfig{PairState(e.v1, e.v2),
                            DetectorSpec(e.detector_x.shape, e.detector_x.reading),
                            DetectorSpec(e.detector_y.shape, e.detector_y.reading), e.kernel,
                            e.origin_offset};
  } catch (const Error& err) {
    throw ConfigError("experiment", 0, err.what());
  }
}

SingleParticleState RunConfig::probability_state() const {
  if (!probability) throw ConfigError("probability", 0, "missing probability section");
  try {
    return SingleParticleState(probability->components);
  } catch (const Error& err) {
    throw ConfigError("probability", 0, err.what());
  }
}

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError("", 0, "empty configuration");
  check_keys(root, "",
             {"units", "experiment", "engine", "sweep", "size_study", "probability", "output"});
  RunConfig cfg;
  if (root["units"]) {
    cfg.units = scalar<std::string>(root["units"], "units");
    if (cfg.units != "desk" && cfg.units != "si") {
      throw ConfigError("units", line_of(root["units"]), "units must be 'desk' or 'si'");
    }
  }
  if (const auto n = root["experiment"]) {
    check_keys(n, "experiment", {"v1", "v2", "detector_x", "detector_y", "kernel", "origin_offset"});
    ExperimentEntry e;
    e.v1 = region(required(n, "experiment", "v1"), "experiment.v1", false);
    e.v2 = region(required(n, "experiment", "v2"), "experiment.v2", false);
    e.detector_x = detector(required(n, "experiment", "detector_x"), "experiment.detector_x");
    e.detector_y = detector(required(n, "experiment", "detector_y"), "experiment.detector_y");
    e.kernel = kernel(required(n, "experiment", "kernel"), "experiment.kernel", cfg.units);
    if (n["origin_offset"]) e.origin_offset = vec3(n["origin_offset"], "experiment.origin_offset");
    if (!detail::disjoint(e.v1, e.v2)) {
      throw ConfigError("experiment.v2", line_of(n["v2"]),
                        "particle regions v1 and v2 must be disjoint");
    }
    cfg.experiment = e;
  }
  if (root["engine"]) cfg.engine = engine(root["engine"], "engine");
  if (root["sweep"]) cfg.sweep = sweep(root["sweep"], "sweep");
  if (root["size_study"]) cfg.size_study = size_study(root["size_study"], "size_study");
  if (root["probability"]) {
    cfg.probability = probability(root["probability"], "probability", cfg.units);
  }
  if (root["output"]) cfg.output = output(root["output"], "output");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_canonical_yaml(const RunConfig& cfg, bool include_output) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "units" << YAML::Value << cfg.units;
  if (cfg.experiment) {
    const auto& e = *cfg.experiment;
    out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "v1" << YAML::Value;
    emit_region(out, e.v1, true);
    out << YAML::Key << "v2" << YAML::Value;
    emit_region(out, e.v2, true);
    out << YAML::Key << "detector_x" << YAML::Value;
    emit_detector(out, e.detector_x);
    out << YAML::Key << "detector_y" << YAML::Value;
    emit_detector(out, e.detector_y);
    out << YAML::Key << "kernel" << YAML::Value;
    emit_kernel(out, e.kernel);
    out << YAML::Key << "origin_offset" << YAML::Value;
    emit_vec(out, e.origin_offset);
    out << YAML::EndMap;
  }
  out << YAML::Key << "engine" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << std::string(to_string(cfg.engine.method));
  out << YAML::Key << "samples" << YAML::Value << std::to_string(cfg.engine.samples);
  out << YAML::Key << "nodes" << YAML::Value << std::to_string(cfg.engine.nodes);
  out << YAML::Key << "n_sigma" << YAML::Value << format_number(cfg.engine.n_sigma);
  out << YAML::Key << "seed" << YAML::Value << std::to_string(cfg.engine.seed);
  out << YAML::EndMap;
  if (cfg.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    if (cfg.sweep->distances) {
      out << YAML::Key << "distances" << YAML::Value;
      emit_list(out, *cfg.sweep->distances);
    } else if (cfg.sweep->log_range) {
      const auto& r = *cfg.sweep->log_range;
      out << YAML::Key << "log_range" << YAML::Value << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "start" << YAML::Value << format_number(r.start);
      out << YAML::Key << "stop" << YAML::Value << format_number(r.stop);
      out << YAML::Key << "count" << YAML::Value << std::to_string(r.count);
      out << YAML::EndMap;
    }
    out << YAML::Key << "direction" << YAML::Value;
    emit_vec(out, cfg.sweep->direction);
    out << YAML::EndMap;
  }
  if (cfg.size_study) {
    out << YAML::Key << "size_study" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "scales" << YAML::Value;
    emit_list(out, cfg.size_study->scales);
    out << YAML::EndMap;
  }
  if (cfg.probability) {
    const auto& p = *cfg.probability;
    out << YAML::Key << "probability" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "components" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : p.components) {
      out << YAML::BeginMap;
      out << YAML::Key << "region" << YAML::Value;
      emit_region(out, c.region, true);
      out << YAML::Key << "spin" << YAML::Value << std::to_string(c.spin);
      out << YAML::Key << "weight" << YAML::Value << format_number(c.weight);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "detector" << YAML::Value;
    emit_detector(out, p.detector);
    out << YAML::Key << "kernel" << YAML::Value;
    emit_kernel(out, p.kernel);
    out << YAML::EndMap;
  }
  if (include_output) {
    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << cfg.output.path;
    out << YAML::Key << "format" << YAML::Value
        << (cfg.output.format == OutputFormat::Csv ? "csv" : "jsonl");
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const RunConfig& cfg) {
  const std::string canon = to_canonical_yaml(cfg, false);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rodbell::cli
