#pragma once

// Config-driven experiments: parse and resolve a JSON config, run one of the five experiment
// kinds, write JSON/CSV reports and return an exit status (0 pass, 1 a verdict failed).
// Configuration problems throw ConfigError naming the offending field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mourre/grid.hpp"
#include "mourre/hypotheses.hpp"
#include "mourre/io.hpp"
#include "mourre/operators.hpp"
#include "mourre/parallel.hpp"
#include "mourre/rho.hpp"
#include "mourre/scattering.hpp"
#include "mourre/spectral.hpp"

namespace mourre::experiment {

using io::Json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Read-only view of one JSON object with its dotted path, for error messages.
class Section {
 public:
  Section(const Json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] bool has(const std::string& key) const { return j_ && j_->contains(key); }

  [[nodiscard]] Section sub(const std::string& key) const {
    return has(key) ? Section(&j_->at(key), field(key)) : Section(nullptr, field(key));
  }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    try {
      return j_->at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key), "has the wrong type");
    }
  }

  [[nodiscard]] double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "+inf" || s == "inf") return kInfinity;
      if (s == "-inf") return -kInfinity;
    }
    throw ConfigError(field(key), "expected a number");
  }

  [[nodiscard]] double positive(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field(key), "must be a positive finite number");
    return v;
  }

  [[nodiscard]] std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_->at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  void reject_unknown(const std::vector<std::string>& known) const {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
        throw ConfigError(field(it.key()), "unknown field");
      }
    }
  }

 private:
  const Json* j_;
  std::string path_;
};

enum class Kind { rho_scan, transfer, hypotheses, scatter, completeness };

inline std::string to_string(Kind k) {
  switch (k) {
    case Kind::rho_scan: return "rho-scan";
    case Kind::transfer: return "transfer";
    case Kind::hypotheses: return "hypotheses";
    case Kind::scatter: return "scatter";
    case Kind::completeness: return "completeness";
  }
  return "?";
}

inline std::optional<Kind> kind_from_string(const std::string& s) {
  for (Kind k : {Kind::rho_scan, Kind::transfer, Kind::hypotheses, Kind::scatter, Kind::completeness})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct BumpSpec {
  double center = 0.0;
  double half_width = 1.0;
  double height = -3.0;
};

struct PotentialSpec {
  double v_minus = 0.0;
  double v_plus = 1.0;
  ProfileKind profile = ProfileKind::smooth_step_plus_bump;
  std::optional<BumpSpec> bump = BumpSpec{};
};

enum class CutoffKind { mollifier, partition_of_unity_squares, partition_of_unity };

inline std::string to_string(CutoffKind k) {
  switch (k) {
    case CutoffKind::mollifier: return "mollifier";
    case CutoffKind::partition_of_unity_squares: return "partition_of_unity_squares";
    case CutoffKind::partition_of_unity: return "partition_of_unity";
  }
  return "?";
}

struct RhoScanSpec {
  double lambda_min = -0.5;
  double lambda_max = 3.0;
  double lambda_step = 0.1;
  double eps = 0.1;
  std::string estimator = "eta";  // eta | window
  CommutatorForm form = CommutatorForm::open_boundary;
  double tol = 0.2;
};

struct TransferSpec {
  std::vector<double> lambdas{0.3, 0.5, 1.5, 2.0};
  double eps = 0.1;
  double tol = 0.2;
  std::size_t virial_count = 20;
  double virial_tol = 1e-10;
};

struct HypothesesSpec {
  std::vector<std::size_t> levels{801, 1601, 3201};
  double eta_center = 0.5;
  double eta_width = 0.4;
  Complex z{0.0, 1.0};
  double smoothing_delta = 0.01;
  double smoothing_e_max = 4.0;
  double smoothing_ramp = 0.25;
  CompactnessThresholds thresholds;
  double min_separation = 100.0;
  std::size_t c1_size = 801;
  std::size_t c1_states = 4;
  std::vector<double> c1_steps = default_c1_steps();
  double c1_tol = 1e-3;
  double step1_tol = 1e-8;
};

struct ScatterSpec {
  std::vector<double> lambdas{2.0};
  ScatteringRun run;
  std::string oracle = "averaged";  // averaged | plain | none
  double rel_tol = 0.02;
  double flux_tol = 1e-2;
};

struct CompletenessSpec {
  double x0 = 6.0;
  double k0 = 1.5;
  double sigma = 1.5;
  std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0};
  Direction direction = Direction::outgoing;
  double delta = 0.01;
  double decay = 0.05;
  bool bound_state_control = true;
  BumpSpec control_well{0.0, 1.0, -3.0};
};

struct Config {
  Kind kind = Kind::transfer;
  double half_length = 40.0;
  std::size_t size = 1601;
  PotentialSpec potential;
  CutoffKind cutoffs = CutoffKind::mollifier;
  DiscardPolicy discard;
  std::uint64_t seed = 1;
  RhoScanSpec rho_scan;
  TransferSpec transfer;
  HypothesesSpec hypotheses;
  ScatterSpec scatter;
  CompletenessSpec completeness;
};

namespace detail {

inline BumpSpec parse_bump(const Section& s, BumpSpec d) {
  s.reject_unknown({"center", "half_width", "height"});
  d.center = s.number("center", d.center);
  d.half_width = s.positive("half_width", d.half_width);
  d.height = s.number("height", d.height);
  return d;
}

inline Complex parse_complex(const Section& s, const std::string& key, Complex fallback) {
  const auto v = s.numbers(key, {fallback.real(), fallback.imag()});
  if (v.size() != 2) throw ConfigError(s.field(key), "expected [re, im]");
  return {v[0], v[1]};
}

inline std::size_t parse_size(const Section& s, const std::string& key, std::size_t fallback) {
  const double v = s.number(key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(s.field(key), "must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

/// Per-experiment defaults before the file is applied.
inline Config defaults(Kind kind) {
  Config c;
  c.kind = kind;
  if (kind == Kind::scatter) {
    c.half_length = 120.0;
    c.size = 4801;
    c.potential = {0.0, 1.0, ProfileKind::sharp_step, std::nullopt};
  }
  if (kind == Kind::completeness || kind == Kind::hypotheses) {
    c.potential = {0.0, 1.0, ProfileKind::smooth_step, std::nullopt};
  }
  return c;
}

}  // namespace detail

/// Builds the resolved configuration; `kind_override` comes from the command line.
inline Config parse_config(const Json& root, std::optional<Kind> kind_override = std::nullopt) {
  const Section top(&root, "");
  top.reject_unknown({"schema_version", "experiment", "grid", "potential", "cutoffs", "discard", "seed", "rho_scan",
                      "transfer", "hypotheses", "scatter", "completeness"});
  if (top.has("schema_version") && top.get<int>("schema_version", io::kSchemaVersion) != io::kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version (expected " + std::to_string(io::kSchemaVersion) + ")");
  }
  std::optional<Kind> kind = kind_override;
  if (top.has("experiment")) {
    const auto tag = top.get<std::string>("experiment", "");
    const auto parsed = kind_from_string(tag);
    if (!parsed) throw ConfigError("experiment", "unknown experiment '" + tag + "'");
    if (kind && *kind != *parsed) {
      throw ConfigError("experiment", "config names '" + tag + "' but '" + to_string(*kind) + "' was requested");
    }
    kind = parsed;
  }
  if (!kind) throw ConfigError("experiment", "missing experiment tag");
  Config c = detail::defaults(*kind);

  const Section grid = top.sub("grid");
  grid.reject_unknown({"L", "n"});
  c.half_length = grid.positive("L", c.half_length);
  c.size = detail::parse_size(grid, "n", c.size);
  if (c.size < 16 || c.size % 2 == 0) throw ConfigError("grid.n", "must be odd and at least 16");

  const Section pot = top.sub("potential");
  pot.reject_unknown({"v_minus", "v_plus", "profile", "bump"});
  c.potential.v_minus = pot.number("v_minus", c.potential.v_minus);
  c.potential.v_plus = pot.number("v_plus", c.potential.v_plus);
  if (pot.has("profile")) {
    try {
      c.potential.profile = profile_from_string(pot.get<std::string>("profile", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("potential.profile", e.what());
    }
    if (c.potential.profile == ProfileKind::custom) throw ConfigError("potential.profile", "custom samples are not configurable");
    if (c.potential.profile != ProfileKind::smooth_step_plus_bump) c.potential.bump.reset();
  }
  if (pot.has("bump")) {
    if (c.potential.profile != ProfileKind::smooth_step_plus_bump) {
      throw ConfigError("potential.bump", "only allowed with profile smooth_step_plus_bump");
    }
    c.potential.bump = detail::parse_bump(pot.sub("bump"), c.potential.bump.value_or(BumpSpec{}));
  } else if (c.potential.profile == ProfileKind::smooth_step_plus_bump && !c.potential.bump) {
    c.potential.bump = BumpSpec{};
  }

  const Section cut = top.sub("cutoffs");
  cut.reject_unknown({"kind"});
  if (cut.has("kind")) {
    const auto k = cut.get<std::string>("kind", "");
    if (k == "mollifier") c.cutoffs = CutoffKind::mollifier;
    else if (k == "partition_of_unity_squares") c.cutoffs = CutoffKind::partition_of_unity_squares;
    else if (k == "partition_of_unity") c.cutoffs = CutoffKind::partition_of_unity;
    else throw ConfigError("cutoffs.kind", "unknown cutoff kind '" + k + "'");
  }

  const Section dis = top.sub("discard");
  dis.reject_unknown({"enabled", "mass_threshold", "interaction_radius", "boundary_width"});
  c.discard.enabled = dis.get<bool>("enabled", c.discard.enabled);
  c.discard.mass_threshold = dis.positive("mass_threshold", c.discard.mass_threshold);
  c.discard.interaction_radius = dis.positive("interaction_radius", c.discard.interaction_radius);
  c.discard.boundary_width = dis.positive("boundary_width", c.discard.boundary_width);

  c.seed = static_cast<std::uint64_t>(detail::parse_size(top, "seed", c.seed));

  const Section rs = top.sub("rho_scan");
  rs.reject_unknown({"lambda_min", "lambda_max", "lambda_step", "eps", "estimator", "commutator_form", "tol"});
  c.rho_scan.lambda_min = rs.number("lambda_min", c.rho_scan.lambda_min);
  c.rho_scan.lambda_max = rs.number("lambda_max", c.rho_scan.lambda_max);
  c.rho_scan.lambda_step = rs.positive("lambda_step", c.rho_scan.lambda_step);
  if (c.rho_scan.lambda_max < c.rho_scan.lambda_min) throw ConfigError("rho_scan.lambda_max", "must be >= lambda_min");
  c.rho_scan.eps = rs.positive("eps", c.rho_scan.eps);
  c.rho_scan.estimator = rs.get<std::string>("estimator", c.rho_scan.estimator);
  if (c.rho_scan.estimator != "eta" && c.rho_scan.estimator != "window") {
    throw ConfigError("rho_scan.estimator", "expected 'eta' or 'window'");
  }
  const auto form = rs.get<std::string>("commutator_form", to_string(c.rho_scan.form));
  if (form == "open_boundary") c.rho_scan.form = CommutatorForm::open_boundary;
  else if (form == "dirichlet_box") c.rho_scan.form = CommutatorForm::dirichlet_box;
  else throw ConfigError("rho_scan.commutator_form", "expected 'open_boundary' or 'dirichlet_box'");
  c.rho_scan.tol = rs.positive("tol", c.rho_scan.tol);

  const Section tr = top.sub("transfer");
  tr.reject_unknown({"lambdas", "eps", "tol", "virial_count", "virial_tol"});
  c.transfer.lambdas = tr.numbers("lambdas", c.transfer.lambdas);
  if (c.transfer.lambdas.empty()) throw ConfigError("transfer.lambdas", "must not be empty");
  c.transfer.eps = tr.positive("eps", c.transfer.eps);
  c.transfer.tol = tr.positive("tol", c.transfer.tol);
  c.transfer.virial_count = detail::parse_size(tr, "virial_count", c.transfer.virial_count);
  c.transfer.virial_tol = tr.positive("virial_tol", c.transfer.virial_tol);

  const Section hy = top.sub("hypotheses");
  hy.reject_unknown({"levels", "eta_center", "eta_width", "z", "smoothing_delta", "smoothing_e_max", "smoothing_ramp",
                     "thresholds", "min_separation", "c1_size", "c1_states", "c1_steps", "c1_tol", "step1_tol"});
  if (hy.has("levels")) {
    c.hypotheses.levels.clear();
    for (double v : hy.numbers("levels", {})) {
      if (v < 16 || v != std::floor(v) || static_cast<long long>(v) % 2 == 0) {
        throw ConfigError("hypotheses.levels", "every level must be an odd integer >= 16");
      }
      c.hypotheses.levels.push_back(static_cast<std::size_t>(v));
    }
    if (c.hypotheses.levels.size() < 2) throw ConfigError("hypotheses.levels", "at least two levels required");
    if (!std::is_sorted(c.hypotheses.levels.begin(), c.hypotheses.levels.end())) {
      throw ConfigError("hypotheses.levels", "levels must be ordered coarse to fine");
    }
  }
  c.hypotheses.eta_center = hy.number("eta_center", c.hypotheses.eta_center);
  c.hypotheses.eta_width = hy.positive("eta_width", c.hypotheses.eta_width);
  c.hypotheses.z = detail::parse_complex(hy, "z", c.hypotheses.z);
  if (c.hypotheses.z.imag() == 0.0) throw ConfigError("hypotheses.z", "must be non-real");
  c.hypotheses.smoothing_delta = hy.positive("smoothing_delta", c.hypotheses.smoothing_delta);
  c.hypotheses.smoothing_e_max = hy.number("smoothing_e_max", c.hypotheses.smoothing_e_max);
  c.hypotheses.smoothing_ramp = hy.positive("smoothing_ramp", c.hypotheses.smoothing_ramp);
  const Section th = hy.sub("thresholds");
  th.reject_unknown({"keep", "drift_count", "tail_index", "max_drift", "compact_tail", "noncompact_tail"});
  auto& t = c.hypotheses.thresholds;
  t.keep = detail::parse_size(th, "keep", t.keep);
  t.drift_count = detail::parse_size(th, "drift_count", t.drift_count);
  t.tail_index = detail::parse_size(th, "tail_index", t.tail_index);
  t.max_drift = th.positive("max_drift", t.max_drift);
  t.compact_tail = th.positive("compact_tail", t.compact_tail);
  t.noncompact_tail = th.positive("noncompact_tail", t.noncompact_tail);
  if (t.tail_index == 0 || t.tail_index > t.keep) throw ConfigError("hypotheses.thresholds.tail_index", "must lie in [1, keep]");
  if (t.drift_count == 0 || t.drift_count > t.keep) throw ConfigError("hypotheses.thresholds.drift_count", "must lie in [1, keep]");
  c.hypotheses.min_separation = hy.positive("min_separation", c.hypotheses.min_separation);
  c.hypotheses.c1_size = detail::parse_size(hy, "c1_size", c.hypotheses.c1_size);
  if (c.hypotheses.c1_size < 16 || c.hypotheses.c1_size % 2 == 0) throw ConfigError("hypotheses.c1_size", "must be odd and at least 16");
  c.hypotheses.c1_states = detail::parse_size(hy, "c1_states", c.hypotheses.c1_states);
  c.hypotheses.c1_steps = hy.numbers("c1_steps", c.hypotheses.c1_steps);
  for (std::size_t k = 0; k < c.hypotheses.c1_steps.size(); ++k) {
    if (!(c.hypotheses.c1_steps[k] > 0.0) || (k > 0 && !(c.hypotheses.c1_steps[k] < c.hypotheses.c1_steps[k - 1]))) {
      throw ConfigError("hypotheses.c1_steps", "must be positive and strictly decreasing");
    }
  }
  if (c.hypotheses.c1_steps.size() < 2) throw ConfigError("hypotheses.c1_steps", "need at least two steps");
  c.hypotheses.c1_tol = hy.positive("c1_tol", c.hypotheses.c1_tol);
  c.hypotheses.step1_tol = hy.positive("step1_tol", c.hypotheses.step1_tol);

  const Section sc = top.sub("scatter");
  sc.reject_unknown({"lambdas", "x0", "sigma", "time_step", "max_time", "interaction_radius", "separation_mass", "oracle",
                     "rel_tol", "flux_tol"});
  c.scatter.lambdas = sc.numbers("lambdas", c.scatter.lambdas);
  if (c.scatter.lambdas.empty()) throw ConfigError("scatter.lambdas", "must not be empty");
  c.scatter.run.x0 = sc.number("x0", c.scatter.run.x0);
  c.scatter.run.sigma = sc.positive("sigma", c.scatter.run.sigma);
  c.scatter.run.time_step = sc.positive("time_step", c.scatter.run.time_step);
  c.scatter.run.max_time = sc.positive("max_time", c.scatter.run.max_time);
  c.scatter.run.interaction_radius = sc.positive("interaction_radius", c.scatter.run.interaction_radius);
  c.scatter.run.separation_mass = sc.positive("separation_mass", c.scatter.run.separation_mass);
  c.scatter.oracle = sc.get<std::string>("oracle", c.scatter.oracle);
  if (c.scatter.oracle != "averaged" && c.scatter.oracle != "plain" && c.scatter.oracle != "none") {
    throw ConfigError("scatter.oracle", "expected 'averaged', 'plain' or 'none'");
  }
  c.scatter.rel_tol = sc.positive("rel_tol", c.scatter.rel_tol);
  c.scatter.flux_tol = sc.positive("flux_tol", c.scatter.flux_tol);

  const Section co = top.sub("completeness");
  co.reject_unknown({"x0", "k0", "sigma", "times", "direction", "delta", "decay", "bound_state_control", "control_well"});
  c.completeness.x0 = co.number("x0", c.completeness.x0);
  c.completeness.k0 = co.number("k0", c.completeness.k0);
  if (c.completeness.k0 == 0.0) throw ConfigError("completeness.k0", "must be nonzero");
  c.completeness.sigma = co.positive("sigma", c.completeness.sigma);
  c.completeness.times = co.numbers("times", c.completeness.times);
  if (c.completeness.times.empty()) throw ConfigError("completeness.times", "must not be empty");
  for (std::size_t k = 0; k < c.completeness.times.size(); ++k) {
    if (c.completeness.times[k] < 0.0 || (k > 0 && !(c.completeness.times[k] > c.completeness.times[k - 1]))) {
      throw ConfigError("completeness.times", "must be nonnegative and strictly increasing");
    }
  }
  if (co.has("direction")) {
    try {
      c.completeness.direction = direction_from_string(co.get<std::string>("direction", "+"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("completeness.direction", e.what());
    }
  }
  c.completeness.delta = co.positive("delta", c.completeness.delta);
  c.completeness.decay = co.positive("decay", c.completeness.decay);
  c.completeness.bound_state_control = co.get<bool>("bound_state_control", c.completeness.bound_state_control);
  if (co.has("control_well")) c.completeness.control_well = detail::parse_bump(co.sub("control_well"), c.completeness.control_well);
  return c;
}

inline Json bump_json(const BumpSpec& b) {
  return {{"center", io::number(b.center)}, {"half_width", io::number(b.half_width)}, {"height", io::number(b.height)}};
}

/// The fully resolved configuration (every default made explicit).
inline Json to_json(const Config& c) {
  Json j;
  j["schema_version"] = io::kSchemaVersion;
  j["experiment"] = to_string(c.kind);
  j["grid"] = {{"L", io::number(c.half_length)}, {"n", c.size}};
  Json pot = {{"v_minus", io::number(c.potential.v_minus)},
              {"v_plus", io::number(c.potential.v_plus)},
              {"profile", to_string(c.potential.profile)}};
  if (c.potential.bump) pot["bump"] = bump_json(*c.potential.bump);
  j["potential"] = pot;
  j["cutoffs"] = {{"kind", to_string(c.cutoffs)}};
  j["discard"] = {{"enabled", c.discard.enabled},
                  {"mass_threshold", io::number(c.discard.mass_threshold)},
                  {"interaction_radius", io::number(c.discard.interaction_radius)},
                  {"boundary_width", io::number(c.discard.boundary_width)}};
  j["seed"] = c.seed;
  switch (c.kind) {
    case Kind::rho_scan:
      j["rho_scan"] = {{"lambda_min", io::number(c.rho_scan.lambda_min)},
                       {"lambda_max", io::number(c.rho_scan.lambda_max)},
                       {"lambda_step", io::number(c.rho_scan.lambda_step)},
                       {"eps", io::number(c.rho_scan.eps)},
                       {"estimator", c.rho_scan.estimator},
                       {"commutator_form", to_string(c.rho_scan.form)},
                       {"tol", io::number(c.rho_scan.tol)}};
      break;
    case Kind::transfer:
      j["transfer"] = {{"lambdas", io::numbers(c.transfer.lambdas)},
                       {"eps", io::number(c.transfer.eps)},
                       {"tol", io::number(c.transfer.tol)},
                       {"virial_count", c.transfer.virial_count},
                       {"virial_tol", io::number(c.transfer.virial_tol)}};
      break;
    case Kind::hypotheses: {
      const auto& h = c.hypotheses;
      const auto& t = h.thresholds;
      j["hypotheses"] = {{"levels", h.levels},
                         {"eta_center", io::number(h.eta_center)},
                         {"eta_width", io::number(h.eta_width)},
                         {"z", {io::number(h.z.real()), io::number(h.z.imag())}},
                         {"smoothing_delta", io::number(h.smoothing_delta)},
                         {"smoothing_e_max", io::number(h.smoothing_e_max)},
                         {"smoothing_ramp", io::number(h.smoothing_ramp)},
                         {"thresholds",
                          {{"keep", t.keep},
                           {"drift_count", t.drift_count},
                           {"tail_index", t.tail_index},
                           {"max_drift", io::number(t.max_drift)},
                           {"compact_tail", io::number(t.compact_tail)},
                           {"noncompact_tail", io::number(t.noncompact_tail)}}},
                         {"min_separation", io::number(h.min_separation)},
                         {"c1_size", h.c1_size},
                         {"c1_states", h.c1_states},
                         {"c1_steps", io::numbers(h.c1_steps)},
                         {"c1_tol", io::number(h.c1_tol)},
                         {"step1_tol", io::number(h.step1_tol)}};
      break;
    }
    case Kind::scatter:
      j["scatter"] = {{"lambdas", io::numbers(c.scatter.lambdas)},
                      {"x0", io::number(c.scatter.run.x0)},
                      {"sigma", io::number(c.scatter.run.sigma)},
                      {"time_step", io::number(c.scatter.run.time_step)},
                      {"max_time", io::number(c.scatter.run.max_time)},
                      {"interaction_radius", io::number(c.scatter.run.interaction_radius)},
                      {"separation_mass", io::number(c.scatter.run.separation_mass)},
                      {"oracle", c.scatter.oracle},
                      {"rel_tol", io::number(c.scatter.rel_tol)},
                      {"flux_tol", io::number(c.scatter.flux_tol)}};
      break;
    case Kind::completeness:
      j["completeness"] = {{"x0", io::number(c.completeness.x0)},
                           {"k0", io::number(c.completeness.k0)},
                           {"sigma", io::number(c.completeness.sigma)},
                           {"times", io::numbers(c.completeness.times)},
                           {"direction", to_string(c.completeness.direction)},
                           {"delta", io::number(c.completeness.delta)},
                           {"decay", io::number(c.completeness.decay)},
                           {"bound_state_control", c.completeness.bound_state_control},
                           {"control_well", bump_json(c.completeness.control_well)}};
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------------------------
// Model construction

inline CutoffPair build_cutoffs(const Grid& g, CutoffKind k) {
  switch (k) {
    case CutoffKind::mollifier: return make_cutoffs(g);
    case CutoffKind::partition_of_unity_squares: return make_partition_of_unity_squares(g);
    case CutoffKind::partition_of_unity: return make_partition_of_unity(g);
  }
  throw std::invalid_argument("unknown cutoff kind");
}

inline PotentialField build_potential(const Grid& g, const PotentialSpec& p) {
  std::optional<Bump> bump;
  if (p.bump) bump = make_bump(g, p.bump->center, p.bump->half_width, p.bump->height);
  return make_steplike(g, p.v_minus, p.v_plus, p.profile, bump);
}

inline OperatorSet build_model(const Config& c, std::size_t n) {
  const Grid g = make_grid(c.half_length, n);
  return build_pair(g, build_potential(g, c.potential), build_cutoffs(g, c.cutoffs));
}

// ---------------------------------------------------------------------------------------------
// Report fragments

inline Json to_json(const RhoEstimate& e, bool with_log = true) {
  Json j = {{"lambda", io::number(e.lambda)},
            {"eps", io::number(e.eps)},
            {"localisation", e.localisation},
            {"pair", e.pair},
            {"commutator_form", e.commutator_form},
            {"raw_min", io::number(e.raw_min)},
            {"corrected", io::number(e.corrected)},
            {"n_discarded", e.n_discarded},
            {"rank", e.rank},
            {"empty_window", e.empty_window},
            {"compression_spectrum", io::numbers(e.compression_spectrum)}};
  if (with_log) {
    Json log = Json::array();
    for (const auto& d : e.discard_log) {
      log.push_back({{"eigenvalue", io::number(d.eigenvalue)},
                     {"interaction_mass", io::number(d.interaction_mass)},
                     {"boundary_mass", io::number(d.boundary_mass)},
                     {"discarded", d.discarded}});
    }
    j["discard_log"] = log;
  }
  return j;
}

inline Json to_json(const CompactnessReport& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) levels.push_back({{"L", io::number(l.half_length)}, {"n", l.size}});
  Json sv = Json::array();
  for (const auto& s : r.singular_values) sv.push_back(io::numbers(s));
  return {{"operator_label", r.operator_label},
          {"refinement_levels", levels},
          {"singular_values", sv},
          {"tail_ratio", io::numbers(r.tail_ratio)},
          {"stability", io::number(r.stability)},
          {"verdict", to_string(r.verdict)},
          {"notes", r.notes}};
}

inline Json envelope(const Config& c, Json report, bool verdict) {
  return {{"schema_version", io::kSchemaVersion},
          {"experiment", to_string(c.kind)},
          {"config", to_json(c)},
          {"report", std::move(report)},
          {"verdict", verdict}};
}

/// Margin of an estimate against the analytic value with the +-inf conventions.
inline double rho_margin(double estimate, double analytic) {
  if (std::isinf(analytic) && analytic > 0) return std::isinf(estimate) && estimate > 0 ? kInfinity : -kInfinity;
  return estimate - analytic;
}

inline std::vector<double> lambda_grid(const RhoScanSpec& s) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((s.lambda_max - s.lambda_min) / s.lambda_step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(std::round((s.lambda_min + i * s.lambda_step) * 1e12) / 1e12);
  return out;
}

struct Outcome {
  bool verdict = false;
  std::vector<std::filesystem::path> files;
  std::string summary;
};

// ---------------------------------------------------------------------------------------------
// Experiments

inline Outcome run_rho_scan(const Config& c, const std::filesystem::path& out, unsigned threads) {
  const OperatorSet set = build_model(c, c.size);
  const Spectra sp = decompose(set);
  const auto& rs = c.rho_scan;
  const auto lambdas = lambda_grid(rs);
  auto estimates = parallel_map(lambdas.size(), threads, [&](std::size_t i) {
    const double l = lambdas[i];
    if (rs.estimator == "window") {
      return estimate_rho_window(set, sp, PairKind::perturbed, EnergyWindow(l, rs.eps), c.discard, rs.form);
    }
    try {
      return estimate_rho_eta(set, sp, PairKind::perturbed, SmoothingFunction::bump(l, rs.eps), c.discard, rs.form);
    } catch (const std::domain_error&) {
      RhoEstimate e;
      e.lambda = l;
      e.eps = rs.eps;
      e.localisation = SmoothingFunction::bump(l, rs.eps).description;
      e.pair = to_string(PairKind::perturbed);
      e.commutator_form = to_string(rs.form);
      e.empty_window = true;
      return e;
    }
  });
  io::CsvTable csv({"lambda", "rho0_analytic", "rho_raw", "rho_corrected", "n_discarded", "margin"});
  Json list = Json::array();
  bool verdict = true;
  int checked = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& e = estimates[i];
    const double rho0 = analytic_rho(c.potential.v_minus, c.potential.v_plus, lambdas[i]);
    const double margin = rho_margin(e.corrected, rho0);
    const bool near_threshold = std::abs(lambdas[i] - c.potential.v_minus) < 2 * rs.eps ||
                                std::abs(lambdas[i] - c.potential.v_plus) < 2 * rs.eps;
    if (!near_threshold) {
      ++checked;
      verdict = verdict && margin >= -rs.tol;
    }
    csv.row() << lambdas[i] << rho0 << e.raw_min << e.corrected << e.n_discarded << margin;
    Json j = to_json(e);
    j["rho0_analytic"] = io::number(rho0);
    j["margin"] = io::number(margin);
    j["near_threshold"] = near_threshold;
    list.push_back(j);
  }
  Outcome o;
  o.verdict = verdict && checked > 0;
  csv.write(out / "rho_scan.csv");
  io::write_json(out / "rho_estimate.json",
                 envelope(c, {{"estimates", list}, {"samples_checked", checked}, {"tolerance", io::number(rs.tol)}},
                          o.verdict));
  o.files = {out / "rho_scan.csv", out / "rho_estimate.json"};
  o.summary = "rho-scan: " + std::to_string(lambdas.size()) + " samples, " + std::to_string(checked) +
              " checked against the analytic curve";
  return o;
}

inline Outcome run_transfer(const Config& c, const std::filesystem::path& out, unsigned threads) {
  const OperatorSet set = build_model(c, c.size);
  const Spectra sp = decompose(set);
  const auto& tr = c.transfer;
  const TransferReport rep = transfer_verify(set, sp, tr.lambdas, tr.eps, tr.tol, c.discard, threads);

  const double cnorm = linalg::hermitian_norm(set.commutator_iHA);
  io::CsvTable virial({"index", "eigenvalue", "defect"});
  Json vir = Json::array();
  double worst = 0.0;
  const auto count = static_cast<Eigen::Index>(std::min<std::size_t>(tr.virial_count, static_cast<std::size_t>(set.dim())));
  for (Eigen::Index k = 0; k < count; ++k) {
    const double d = virial_defect(set, sp, k, cnorm);
    worst = std::max(worst, d);
    virial.row() << static_cast<long long>(k) << sp.H.eigenvalues()[k] << d;
    vir.push_back({{"index", k}, {"eigenvalue", io::number(sp.H.eigenvalues()[k])}, {"defect", io::number(d)}});
  }
  // Closest pair of eigenvalues in the whole spectrum.
  Eigen::Index pair = 0;
  const RealVector& ev = sp.H.eigenvalues();
  for (Eigen::Index k = 1; k + 1 < ev.size(); ++k)
    if (ev[k + 1] - ev[k] < ev[pair + 1] - ev[pair]) pair = k;
  const double offdiag = virial_offdiagonal(set, sp, pair, pair + 1, cnorm);

  io::CsvTable csv({"lambda", "rho0_analytic", "rho_raw", "rho_corrected", "n_discarded", "margin"});
  Json samples = Json::array();
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    csv.row() << s.lambda << s.rho0_analytic << s.rho_H.raw_min << s.rho_H.corrected << s.rho_H.n_discarded << s.margin;
    samples.push_back({{"lambda", io::number(s.lambda)},
                       {"rho0_analytic", io::number(s.rho0_analytic)},
                       {"rho_H_estimate", to_json(s.rho_H, false)},
                       {"margin", io::number(s.margin)},
                       {"eone_residual_norm", io::number(rep.eone_residual_norm[i])},
                       {"eone_singular_values", io::numbers(rep.eone_singular_values[i])}});
  }
  const bool virial_ok = worst <= tr.virial_tol;
  Outcome o;
  o.verdict = rep.verdict && virial_ok;
  Json report = {{"samples", samples},
                 {"excluded_lambdas", io::numbers(rep.excluded)},
                 {"eps", io::number(rep.eps)},
                 {"tolerance", io::number(rep.tolerance)},
                 {"transfer_verdict", rep.verdict},
                 {"commutator_form", to_string(CommutatorForm::open_boundary)},
                 {"virial",
                  {{"eigenvectors", vir},
                   {"max_defect", io::number(worst)},
                   {"tolerance", io::number(tr.virial_tol)},
                   {"closest_pair", {pair, pair + 1}},
                   {"closest_gap", io::number(ev[pair + 1] - ev[pair])},
                   {"closest_pair_offdiagonal", io::number(offdiag)},
                   {"verdict", virial_ok}}}};
  csv.write(out / "transfer.csv");
  virial.write(out / "virial.csv");
  io::write_json(out / "transfer_report.json", envelope(c, report, o.verdict));
  o.files = {out / "transfer.csv", out / "virial.csv", out / "transfer_report.json"};
  o.summary = "transfer: " + std::to_string(rep.samples.size()) + " samples, " + std::to_string(rep.excluded.size()) +
              " excluded, max virial defect " + io::format_double(worst);
  return o;
}

inline Outcome run_hypotheses(const Config& c, const std::filesystem::path& out, unsigned threads) {
  const auto& h = c.hypotheses;
  const std::vector<std::string> labels{"ii", "iii", "iv", "short_range", "long_range", "identity_control"};
  std::vector<RefinementLevel> levels;
  for (auto n : h.levels) levels.push_back({c.half_length, n});
  const auto eta = SmoothingFunction::bump(h.eta_center, h.eta_width);
  std::string smoothing;

  // One pass per level computes every operator from a single set of decompositions.
  auto per_level = parallel_map(levels.size(), threads, [&](std::size_t li) {
    try {
      const OperatorSet set = build_model(c, levels[li].size);
      const Spectra sp = decompose(set);
      const auto keep = h.thresholds.keep;
      const auto sm = SmoothingFunction::plateau(std::min(c.potential.v_minus, c.potential.v_plus) + h.smoothing_delta,
                                                 h.smoothing_e_max, h.smoothing_ramp);
      std::vector<std::vector<double>> sv;
      sv.push_back(linalg::top_singular_values(assumption_operator(set, sp, Assumption::ii, eta), keep));
      sv.push_back(linalg::top_singular_values(assumption_operator(set, sp, Assumption::iii, eta), keep));
      sv.push_back(linalg::top_singular_values(assumption_operator(set, sp, Assumption::iv, eta), keep));
      sv.push_back(linalg::top_singular_values(short_range_operator(set, sp, h.z, sm).matrix, keep));
      sv.push_back(linalg::top_singular_values(long_range_operator(set, sp), keep));
      sv.push_back(std::vector<double>(keep, 1.0));  // singular values of the identity
      return std::make_pair(sv, sm.description);
    } catch (const std::exception& e) {
      throw std::runtime_error("level " + std::to_string(li) + " (n=" + std::to_string(levels[li].size) + "): " + e.what());
    }
  });
  smoothing = per_level.front().second;

  std::vector<CompactnessReport> reports;
  for (std::size_t op = 0; op < labels.size(); ++op) {
    std::vector<std::vector<double>> sv;
    for (const auto& lvl : per_level) sv.push_back(lvl.first[op]);
    reports.push_back(classify_singular_values(labels[op], levels, std::move(sv), h.thresholds));
  }

  bool compact_ok = true;
  double worst_tail = 0.0;
  for (std::size_t op = 0; op + 1 < reports.size(); ++op) {
    compact_ok = compact_ok && reports[op].verdict == CompactnessVerdict::compact_consistent;
    worst_tail = std::max(worst_tail, reports[op].tail_ratio.back());
  }
  const auto& control = reports.back();
  const bool control_ok = control.verdict == CompactnessVerdict::non_compact;
  const double separation = worst_tail > 0.0 ? control.tail_ratio.back() / worst_tail : kInfinity;

  // Regularity at a single (coarse) level.
  const OperatorSet set = build_model(c, h.c1_size);
  const Spectra sp = decompose(set);
  const SpectralDecomposition dec_a = eigendecompose(set.A);
  const auto states = random_interior_states(set.grid, h.c1_states, c.seed);
  const C1Report c1 = c1_probe(set, sp, dec_a, h.z, states, h.c1_steps, h.c1_tol);
  const ResolventIdentityReport step1 = resolvent_commutator_identity(set, sp, h.z, h.step1_tol);

  Json comp = Json::array();
  for (const auto& r : reports) {
    comp.push_back(to_json(r));
    io::CsvTable t({"level", "k", "sigma_k"});
    for (std::size_t l = 0; l < r.singular_values.size(); ++l)
      for (std::size_t k = 0; k < r.singular_values[l].size(); ++k) t.row() << l << (k + 1) << r.singular_values[l][k];
    t.write(out / ("compactness_" + r.operator_label + ".csv"));
  }
  Json dq = Json::array();
  for (const auto& row : c1.difference_quotient_norms) dq.push_back(io::numbers(row));
  Json report = {
      {"compactness", comp},
      {"eta", eta.description},
      {"short_range_smoothing", smoothing},
      {"separation", io::number(separation)},
      {"c1",
       {{"z", {io::number(c1.z.real()), io::number(c1.z.imag())}},
        {"n", h.c1_size},
        {"test_states", c1.n_states},
        {"steps", io::numbers(c1.steps)},
        {"difference_quotient_norms", dq},
        {"cauchy_defect", io::numbers(c1.cauchy_defect)},
        {"min_decade_ratio", io::number(c1.min_decade_ratio)},
        {"limit_mismatch", io::number(c1.limit_mismatch)},
        {"richardson_mismatch", io::number(c1.richardson_mismatch)},
        {"verdict", c1.verdict}}},
      {"resolvent_commutator_identity",
       {{"z", {io::number(step1.z.real()), io::number(step1.z.imag())}},
        {"residual", io::number(step1.residual)},
        {"commutator_norm", io::number(step1.lhs_norm)},
        {"tolerance", io::number(h.step1_tol)},
        {"verdict", step1.verdict}}}};
  Outcome o;
  o.verdict = compact_ok && control_ok && separation >= h.min_separation && c1.verdict && step1.verdict;
  io::write_json(out / "hypotheses_report.json", envelope(c, report, o.verdict));
  o.files.push_back(out / "hypotheses_report.json");
  for (const auto& r : reports) o.files.push_back(out / ("compactness_" + r.operator_label + ".csv"));
  o.summary = "hypotheses: separation " + io::format_double(separation) + ", step1 residual " +
              io::format_double(step1.residual);
  return o;
}

inline Outcome run_scatter(const Config& c, const std::filesystem::path& out, unsigned threads) {
  const OperatorSet set = build_model(c, c.size);
  const auto& sc = c.scatter;
  // Fail fast on closed channels before the expensive decomposition.
  for (double l : sc.lambdas) {
    const double k0 = l > c.potential.v_minus ? std::sqrt(l - c.potential.v_minus) : 0.0;
    if (!(l > std::max(c.potential.v_minus, c.potential.v_plus) + packet_energy_width(k0, sc.run.sigma))) {
      throw std::domain_error("scatter: closed channel at lambda=" + io::format_double(l) +
                              " (needs lambda > max(v_-, v_+) + packet energy width)");
    }
  }
  const Spectra sp = decompose(set);
  auto coeffs = parallel_map(sc.lambdas.size(), threads,
                             [&](std::size_t i) { return scattering_coefficients(set, sp, sc.lambdas[i], sc.run); });
  const bool sharp = c.potential.profile == ProfileKind::sharp_step;
  io::CsvTable csv({"lambda", "R", "T", "flux_defect", "R_oracle", "T_oracle", "relative_error", "time"});
  Json list = Json::array();
  bool verdict = true;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const auto& r = coeffs[i];
    std::optional<ScatteringCoefficients> oracle;
    if (sharp && sc.oracle == "averaged") {
      oracle = averaged_step_oracle(std::sqrt(r.energy - c.potential.v_minus), sc.run.sigma, c.potential.v_minus,
                                    c.potential.v_plus);
    } else if (sharp && sc.oracle == "plain") {
      oracle = sharp_step_oracle(r.energy, c.potential.v_minus, c.potential.v_plus);
    }
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (oracle) {
      rel = std::max(std::abs(r.reflection - oracle->reflection) / oracle->reflection,
                     std::abs(r.transmission - oracle->transmission) / oracle->transmission);
      verdict = verdict && rel <= sc.rel_tol;
    }
    verdict = verdict && r.flux_defect < sc.flux_tol;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv.row() << r.energy << r.reflection << r.transmission << r.flux_defect << (oracle ? oracle->reflection : nan)
              << (oracle ? oracle->transmission : nan) << rel << r.time;
    Json j = {{"energy", io::number(r.energy)},
              {"reflection_prob", io::number(r.reflection)},
              {"transmission_prob", io::number(r.transmission)},
              {"flux_defect", io::number(r.flux_defect)},
              {"time", io::number(r.time)},
              {"interaction_mass", io::number(r.interaction_mass)}};
    if (oracle) {
      j["oracle"] = {{"kind", sc.oracle},
                     {"reflection_prob", io::number(oracle->reflection)},
                     {"transmission_prob", io::number(oracle->transmission)}};
      j["relative_error"] = io::number(rel);
    }
    list.push_back(j);
  }
  Outcome o;
  o.verdict = verdict;
  csv.write(out / "scattering.csv");
  io::write_json(out / "scattering_report.json",
                 envelope(c, {{"coefficients", list}, {"flux_normalisation", "probability norms (implicit k'/k)"}},
                          verdict));
  o.files = {out / "scattering.csv", out / "scattering_report.json"};
  o.summary = "scatter: " + std::to_string(coeffs.size()) + " energies";
  return o;
}

inline Json to_json(const CompletenessReport& r) {
  std::vector<double> adm;
  for (bool b : r.admissible) adm.push_back(b ? 1.0 : 0.0);
  return {{"direction", to_string(r.direction)},
          {"times", io::numbers(r.times)},
          {"admissible", r.admissible},
          {"boundary_margin", io::numbers(r.boundary_margin)},
          {"froufrou_norms", io::numbers(r.froufrou_norms)},
          {"converse_norms", io::numbers(r.converse_norms)},
          {"scattering_threshold", io::number(r.scattering_threshold)},
          {"range_defect", io::number(r.range_defect)},
          {"chain_rule_defect", io::number(r.chain_rule_defect)},
          {"last_admissible_time", io::number(r.last_admissible_time)},
          {"decay_threshold", io::number(r.decay_threshold)},
          {"verdict", r.verdict}};
}

inline Outcome run_completeness(const Config& c, const std::filesystem::path& out, unsigned /*threads*/) {
  const auto& cs = c.completeness;
  const OperatorSet set = build_model(c, c.size);
  const Spectra sp = decompose(set);
  const Vector psi = gaussian_packet(set.grid, cs.x0, cs.k0, cs.sigma);
  const CompletenessReport main = completeness_probe(set, sp, psi, cs.direction, cs.times, cs.delta, cs.decay);

  // Wave-operator ladder for the same state seen from H0.
  const TwoSpaceState phi = initial_set_projection(set.J.adjoint_apply(psi), cs.direction);
  const WaveProbeReport wave = wave_operator_probe(set, sp, phi, cs.direction, cs.times);

  io::CsvTable csv({"t", "defect", "froufrou_norm", "converse_norm", "boundary_margin"});
  for (std::size_t k = 0; k < main.times.size(); ++k)
    csv.row() << main.times[k] << wave.defect[k] << main.froufrou_norms[k] << main.converse_norms[k]
              << main.boundary_margin[k];

  Json report = {{"packet", {{"x0", io::number(cs.x0)}, {"k0", io::number(cs.k0)}, {"sigma", io::number(cs.sigma)}}},
                 {"probe", to_json(main)},
                 {"p0_identification", "momentum sign per channel (k<0 in channel -, k>0 in channel + for W_+)"},
                 {"wave_operator",
                  {{"best_time", io::number(wave.best_time)},
                   {"ladder", io::numbers(wave.ladder)},
                   {"defect", io::numbers(wave.defect)},
                   {"isometry_ratio", io::number(wave.isometry_ratio)}}}};
  bool verdict = main.verdict;
  if (cs.bound_state_control) {
    Config cc = c;
    cc.potential.profile = ProfileKind::smooth_step_plus_bump;
    cc.potential.bump = cs.control_well;
    const OperatorSet cset = build_model(cc, c.size);
    const Spectra csp = decompose(cset);
    if (!(csp.H.eigenvalues()[0] < std::min(c.potential.v_minus, c.potential.v_plus))) {
      throw std::runtime_error("completeness: control well has no bound state below the lowest threshold");
    }
    const CompletenessReport ctl = completeness_probe(cset, csp, csp.H.vector(0), cs.direction, cs.times, cs.delta, cs.decay);
    report["bound_state_control"] = to_json(ctl);
    report["bound_state_control"]["eigenvalue"] = io::number(csp.H.eigenvalues()[0]);
    verdict = verdict && !ctl.verdict;
  }
  Outcome o;
  o.verdict = verdict;
  csv.write(out / "completeness_timeseries.csv");
  io::write_json(out / "completeness_report.json", envelope(c, report, verdict));
  o.files = {out / "completeness_timeseries.csv", out / "completeness_report.json"};
  o.summary = "completeness: last admissible t=" + io::format_double(main.last_admissible_time);
  return o;
}

inline Outcome run(const Config& c, const std::filesystem::path& out, unsigned threads = 1) {
  std::filesystem::create_directories(out);
  switch (c.kind) {
    case Kind::rho_scan: return run_rho_scan(c, out, threads);
    case Kind::transfer: return run_transfer(c, out, threads);
    case Kind::hypotheses: return run_hypotheses(c, out, threads);
    case Kind::scatter: return run_scatter(c, out, threads);
    case Kind::completeness: return run_completeness(c, out, threads);
  }
  throw std::invalid_argument("unknown experiment");
}

inline Json load_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

/// Writes H, A, J, i[H, A] in the text matrix format and the spectrum of H as CSV.
inline std::vector<std::filesystem::path> export_operators(const Config& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const OperatorSet set = build_model(c, c.size);
  std::vector<std::filesystem::path> files{out / "H.txt", out / "A.txt", out / "J.txt", out / "commutator_iHA.txt",
                                           out / "eigenvalues_H.csv"};
  io::write_matrix_text(files[0], Matrix(set.H));
  io::write_matrix_text(files[1], Matrix(set.A));
  io::write_matrix_text(files[2], set.J.dense().entries);
  io::write_matrix_text(files[3], Matrix(set.commutator_iHA));
  io::eigenvalue_table(eigendecompose(set.H)).write(files[4]);
  return files;
}

}  // namespace mourre::experiment
