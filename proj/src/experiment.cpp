#include "hqc/experiment.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "hqc/format.hpp"

namespace hqc {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(std::string_view path, std::string_view message) {
  throw ConfigError("config." + std::string(path) + ": " + std::string(message));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<real> to_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const real v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// "<number> <unit>" or {"value": number, "unit": "..."}
std::pair<real, std::string> value_and_unit(std::string_view path, const json& j) {
  if (j.is_object()) {
    for (const auto& [k, _] : j.items()) {
      if (k != "value" && k != "unit") fail(path, "unknown key '" + k + "'");
    }
    if (!j.contains("value") || !j["value"].is_number()) fail(path, "missing numeric 'value'");
    if (!j.contains("unit") || !j["unit"].is_string()) fail(path, "missing string 'unit'");
    return {j["value"].get<real>(), j["unit"].get<std::string>()};
  }
  if (!j.is_string()) fail(path, "expected a quantity such as \"7.5 ps\"");
  const std::string text = j.get<std::string>();
  const std::string_view s = trim(text);
  const auto split = s.find_first_of(" \t");
  if (split == std::string_view::npos) fail(path, "missing unit in '" + text + "'");
  const auto number = to_number(s.substr(0, split));
  if (!number) fail(path, "bad number in '" + text + "'");
  return {*number, std::string(trim(s.substr(split)))};
}

real parse_phase(std::string_view path, const json& j) {
  if (j.is_number()) return j.get<real>();
  if (!j.is_string()) fail(path, "expected radians or a string like \"pi/4\"");
  const std::string text = j.get<std::string>();
  std::string_view s = trim(text);
  if (const auto plain = to_number(s)) return *plain;
  const auto at = s.find("pi");
  if (at == std::string_view::npos) fail(path, "cannot parse phase '" + text + "'");
  real coeff = 1.0;
  std::string_view head = trim(s.substr(0, at));
  if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
  if (!head.empty()) {
    const auto c = to_number(head);
    if (!c) fail(path, "cannot parse phase '" + text + "'");
    coeff = *c;
  }
  std::string_view tail = trim(s.substr(at + 2));
  real denom = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') fail(path, "cannot parse phase '" + text + "'");
    const auto d = to_number(tail.substr(1));
    if (!d || *d == 0.0) fail(path, "cannot parse phase '" + text + "'");
    denom = *d;
  }
  return coeff * pi / denom;
}

real parse_positive(std::string_view path, real v) {
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

Experiment parse_experiment(std::string_view path, const json& j) {
  if (!j.is_string()) fail(path, "expected a string");
  const auto s = j.get<std::string>();
  if (s == "gate1") return Experiment::Gate1;
  if (s == "gate2") return Experiment::Gate2;
  if (s == "twoqubit") return Experiment::TwoQubit;
  if (s == "holonomy") return Experiment::Holonomy;
  if (s == "scan") return Experiment::Scan;
  fail(path, "unknown gate '" + s + "' (gate1, gate2, twoqubit, holonomy, scan)");
}

GateKind parse_map(std::string_view path, const json& j) {
  if (!j.is_string()) fail(path, "expected a string");
  const auto s = j.get<std::string>();
  if (s == "gate1") return GateKind::Gate1;
  if (s == "gate2") return GateKind::Gate2;
  if (s == "twoqubit") return GateKind::TwoQubit;
  fail(path, "unknown map '" + s + "' (gate1, gate2, twoqubit)");
}

void check_keys(std::string_view path, const json& j, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) {
      fail(path.empty() ? k : std::string(path) + "." + k, "unknown key");
    }
  }
}

LoopConfig parse_loop(const json& j) {
  check_keys("loop", j, {"theta_max", "phi_sweep", "ramp", "n_samples", "orientation"});
  LoopConfig loop;
  if (j.contains("theta_max")) loop.theta_max = parse_phase("loop.theta_max", j["theta_max"]);
  if (j.contains("phi_sweep")) loop.phi_sweep = parse_phase("loop.phi_sweep", j["phi_sweep"]);
  if (j.contains("ramp")) {
    const auto& r = j["ramp"];
    if (r == "linear") {
      loop.ramp = Ramp::Linear;
    } else if (r == "smoothstep") {
      loop.ramp = Ramp::SmoothStep;
    } else {
      fail("loop.ramp", "expected \"linear\" or \"smoothstep\"");
    }
  }
  if (j.contains("n_samples")) {
    const auto& n = j["n_samples"];
    if (!n.is_number_integer() || n.get<long long>() < 0) {
      fail("loop.n_samples", "expected a non-negative integer");
    }
    loop.n_samples = n.get<std::size_t>();
  }
  if (j.contains("orientation")) {
    const auto& o = j["orientation"];
    if (o == "positive") {
      loop.orientation = Orientation::Positive;
    } else if (o == "negative") {
      loop.orientation = Orientation::Negative;
    } else {
      fail("loop.orientation", "expected \"positive\" or \"negative\"");
    }
  }
  return loop;
}

System system_of(Experiment e, GateKind map) {
  if (e == Experiment::TwoQubit) return System::TwoExciton;
  if (e == Experiment::Holonomy) return system_for(map);
  return System::SingleExciton;
}

Vector parse_initial_state(const json& j, System system, std::string& label) {
  if (j.is_string()) {
    label = j.get<std::string>();
    try {
      return StateVector::basis_state(system, label).amplitudes();
    } catch (const PreconditionError& e) {
      fail("initial_state", e.what());
    }
  }
  if (!j.is_array()) fail("initial_state", "expected a basis label or a list of [re, im] pairs");
  const auto dim = dimension(system);
  if (j.size() != dim) fail("initial_state", "expected " + std::to_string(dim) + " amplitudes");
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    const auto& a = j[i];
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
      fail("initial_state[" + std::to_string(i) + "]", "expected [re, im]");
    }
    v(static_cast<Eigen::Index>(i)) = cplx(a[0].get<real>(), a[1].get<real>());
  }
  label.clear();
  try {
    StateVector check(system, v);
  } catch (const PreconditionError& e) {
    fail("initial_state", e.what());
  }
  return v;
}

Experiment effective(const ExperimentConfig& c) {
  return c.gate == Experiment::Scan ? c.scan->base : c.gate;
}

WedgeOverrides overrides_of(const LoopConfig& loop) {
  return {loop.theta_max, loop.ramp, loop.n_samples, loop.orientation};
}

WedgeLoopSpec explicit_loop(const LoopConfig& loop, Orientation default_orientation) {
  WedgeLoopSpec spec;
  spec.theta_max = *loop.theta_max;
  spec.phi_sweep = *loop.phi_sweep;
  spec.ramp = loop.ramp;
  spec.n_samples = loop.n_samples;
  spec.orientation = loop.orientation.value_or(default_orientation);
  return spec;
}

WedgeLoopSpec two_qubit_loop(const LoopConfig& loop) {
  if (loop.theta_max && loop.phi_sweep) return explicit_loop(loop, Orientation::Positive);
  auto spec = canonical_two_qubit_loop();
  spec.ramp = loop.ramp;
  spec.n_samples = loop.n_samples;
  spec.orientation = loop.orientation.value_or(Orientation::Positive);
  return spec;
}

void validate_for(Experiment e, ExperimentConfig& c, const json& j) {
  const bool has_loop_shape = c.loop.theta_max.has_value() || c.loop.phi_sweep.has_value();
  switch (e) {
    case Experiment::Gate1:
    case Experiment::Gate2:
      if (!c.phase_target) fail("phase_target", "required for " + std::string(experiment_name(e)));
      if (!j.contains("omega")) fail("omega", "required");
      if (!j.contains("t_ad")) fail("t_ad", "required");
      if (c.loop.phi_sweep) fail("loop.phi_sweep", "derived from phase_target for single-qubit gates");
      if (c.delta_meV) fail("delta", "only used by twoqubit");
      break;
    case Experiment::TwoQubit:
      if (!j.contains("omega")) fail("omega", "required");
      if (!j.contains("t_ad")) fail("t_ad", "required");
      if (!c.delta_meV) fail("delta", "required for twoqubit");
      if (c.phase_target) fail("phase_target", "the two-qubit phase is set by the loop");
      if (has_loop_shape && !(c.loop.theta_max && c.loop.phi_sweep)) {
        fail("loop", "twoqubit loops need both theta_max and phi_sweep");
      }
      break;
    case Experiment::Holonomy:
      if (!j.contains("omega")) c.omega = 0.02;
      if (!j.contains("t_ad")) c.t_ad = 7500.0;
      if (c.holonomy_map == GateKind::TwoQubit && !c.delta_meV) c.delta_meV = 5.0;
      if (c.loop.theta_max && c.loop.phi_sweep) {
        if (c.phase_target) fail("phase_target", "conflicts with an explicit loop");
      } else if (c.holonomy_map == GateKind::TwoQubit) {
        if (c.phase_target) fail("phase_target", "not defined for the twoqubit map");
      } else if (!c.phase_target) {
        fail("loop", "holonomy needs phase_target or loop.theta_max and loop.phi_sweep");
      } else if (c.loop.phi_sweep) {
        fail("loop.phi_sweep", "derived from phase_target");
      }
      break;
    case Experiment::Scan:
      fail("scan.gate", "a scan cannot wrap another scan");
  }
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Gate1: return "gate1";
    case Experiment::Gate2: return "gate2";
    case Experiment::TwoQubit: return "twoqubit";
    case Experiment::Holonomy: return "holonomy";
    case Experiment::Scan: return "scan";
  }
  return "unknown";
}

real parse_quantity(std::string_view field, const json& value) {
  if (field == "phase_target") return parse_phase(field, value);
  if (field == "t_ad" || field == "dt") {
    if (value.is_number()) return parse_positive(field, value.get<real>());
    const auto [v, unit] = value_and_unit(field, value);
    if (unit == "fs") return parse_positive(field, v);
    if (unit == "ps") return parse_positive(field, v * 1e3);
    if (unit == "ns") return parse_positive(field, v * 1e6);
    fail(field, "unknown time unit '" + unit + "' (fs, ps, ns)");
  }
  if (field == "delta") {
    if (value.is_number()) return parse_positive(field, value.get<real>());
    const auto [v, unit] = value_and_unit(field, value);
    if (unit == "meV") return parse_positive(field, v);
    fail(field, "unknown energy unit '" + unit + "' (meV)");
  }
  if (field == "omega") {
    const auto [v, unit] = value_and_unit(field, value);
    parse_positive(field, v);
    if (unit == "rad/fs" || unit == "1/fs") return v;
    if (unit == "meV") return meV_to_rad_per_fs(v);
    // The value is the inverse Rabi frequency, e.g. "50 fs".
    if (unit == "fs" || unit == "inverse-fs") return 1.0 / v;
    fail(field, "unknown unit '" + unit + "' (rad/fs, meV, fs, inverse-fs)");
  }
  fail(field, "not a scannable quantity");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys("", j,
             {"gate", "phase_target", "omega", "delta", "t_ad", "dt", "trace_stride", "loop",
              "map", "initial_state", "output_dir", "scan"});
  if (!j.contains("gate")) fail("gate", "required");

  ExperimentConfig c;
  c.gate = parse_experiment("gate", j["gate"]);
  if (j.contains("phase_target")) c.phase_target = parse_quantity("phase_target", j["phase_target"]);
  if (j.contains("omega")) c.omega = parse_quantity("omega", j["omega"]);
  if (j.contains("delta")) c.delta_meV = parse_quantity("delta", j["delta"]);
  if (j.contains("t_ad")) c.t_ad = parse_quantity("t_ad", j["t_ad"]);
  if (j.contains("dt")) c.dt = parse_quantity("dt", j["dt"]);
  if (j.contains("trace_stride")) {
    const auto& s = j["trace_stride"];
    if (!s.is_number_integer() || s.get<long long>() < 1) {
      fail("trace_stride", "expected a positive integer");
    }
    c.trace_stride = s.get<std::size_t>();
  }
  if (j.contains("loop")) c.loop = parse_loop(j["loop"]);
  if (j.contains("map")) {
    if (c.gate != Experiment::Holonomy) fail("map", "only used by the holonomy command");
    c.holonomy_map = parse_map("map", j["map"]);
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir", "expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("scan")) {
    const auto& s = j["scan"];
    check_keys("scan", s, {"gate", "parameter", "values"});
    ScanConfig sc;
    if (s.contains("gate")) {
      sc.base = parse_experiment("scan.gate", s["gate"]);
    } else if (c.gate != Experiment::Scan) {
      sc.base = c.gate;
    } else {
      fail("scan.gate", "required when gate is \"scan\"");
    }
    if (sc.base == Experiment::Holonomy || sc.base == Experiment::Scan) {
      fail("scan.gate", "scans wrap gate1, gate2 or twoqubit");
    }
    if (!s.contains("parameter") || !s["parameter"].is_string()) fail("scan.parameter", "required");
    sc.parameter = s["parameter"].get<std::string>();
    static const std::set<std::string> scannable{"t_ad", "omega", "dt", "phase_target", "delta"};
    if (!scannable.contains(sc.parameter)) {
      fail("scan.parameter", "unknown parameter '" + sc.parameter + "'");
    }
    if (!s.contains("values") || !s["values"].is_array() || s["values"].empty()) {
      fail("scan.values", "expected a non-empty list");
    }
    for (std::size_t i = 0; i < s["values"].size(); ++i) {
      sc.values.push_back(parse_quantity(sc.parameter, s["values"][i]));
    }
    c.scan = std::move(sc);
  } else if (c.gate == Experiment::Scan) {
    fail("scan", "required when gate is \"scan\"");
  }

  const Experiment e = effective(c);
  // Scanned parameters need not be present in the base block.
  json present = j;
  if (c.scan) present[c.scan->parameter] = true;
  if (c.scan && c.scan->parameter == "phase_target" && !c.phase_target) c.phase_target = 0.0;
  if (c.scan && c.scan->parameter == "delta" && !c.delta_meV) c.delta_meV = 1.0;
  validate_for(e, c, present);

  const System system = system_of(e, c.holonomy_map);
  if (j.contains("initial_state")) {
    c.initial_state = parse_initial_state(j["initial_state"], system, c.initial_state_label);
  } else {
    c.initial_state_label = system == System::SingleExciton ? "Eplus" : "EplusEplus";
    c.initial_state = StateVector::basis_state(system, c.initial_state_label).amplitudes();
  }
  return c;
}

LoopSchedule build_schedule(const ExperimentConfig& c) {
  switch (effective(c)) {
    case Experiment::Gate1:
      return gate1_schedule(*c.phase_target, c.omega, c.t_ad, overrides_of(c.loop));
    case Experiment::Gate2:
      return gate2_schedule(*c.phase_target, c.omega, c.t_ad, overrides_of(c.loop));
    case Experiment::TwoQubit:
      return two_qubit_schedule(two_qubit_loop(c.loop), c.omega, *c.delta_meV, c.t_ad);
    case Experiment::Holonomy: {
      const GateKind map = c.holonomy_map;
      std::optional<BiexcitonShift> shift;
      if (map == GateKind::TwoQubit) shift = BiexcitonShift::from_meV(*c.delta_meV);
      if (map == GateKind::TwoQubit && !(c.loop.theta_max && c.loop.phi_sweep)) {
        const auto spec = two_qubit_loop(c.loop);
        return LoopSchedule(map, c.omega, wedge_path(spec, c.t_ad), shift, spec);
      }
      if (c.loop.theta_max && c.loop.phi_sweep) {
        const auto spec = explicit_loop(
            c.loop, map == GateKind::Gate2 ? Orientation::Negative : Orientation::Positive);
        return LoopSchedule(map, c.omega, wedge_path(spec, c.t_ad), shift, spec);
      }
      if (map == GateKind::Gate1) {
        return gate1_schedule(*c.phase_target, c.omega, c.t_ad, overrides_of(c.loop));
      }
      return gate2_schedule(*c.phase_target, c.omega, c.t_ad, overrides_of(c.loop));
    }
    case Experiment::Scan: break;
  }
  throw Error("unreachable experiment kind");
}

ExperimentConfig resolve(const ExperimentConfig& config, const LoopSchedule& schedule) {
  ExperimentConfig c = config;
  if (!c.dt) c.dt = max_time_step(schedule);
  if (!c.trace_stride) {
    const auto steps = static_cast<std::size_t>(std::ceil(c.t_ad / *c.dt - 1e-9));
    c.trace_stride = std::max<std::size_t>(1, (steps + 1999) / 2000);
  }
  if (const auto& spec = schedule.loop()) {
    c.loop.theta_max = spec->theta_max;
    c.loop.phi_sweep = spec->phi_sweep;
    c.loop.ramp = spec->ramp;
    c.loop.n_samples = spec->n_samples;
    c.loop.orientation = spec->orientation;
  }
  return c;
}

ojson to_json(const ExperimentConfig& c) {
  auto opt = [](const std::optional<real>& v) {
    return v ? ojson(round_significant(*v)) : ojson(nullptr);
  };
  ojson j;
  j["gate"] = experiment_name(c.gate);
  if (c.gate == Experiment::Holonomy) j["map"] = gate_kind_name(c.holonomy_map);
  j["phase_target_rad"] = opt(c.phase_target);
  j["omega_rad_per_fs"] = round_significant(c.omega);
  j["delta_meV"] = opt(c.delta_meV);
  j["t_ad_fs"] = round_significant(c.t_ad);
  j["dt_fs"] = opt(c.dt);
  j["trace_stride"] = c.trace_stride ? ojson(*c.trace_stride) : ojson(nullptr);
  ojson loop;
  loop["theta_max"] = opt(c.loop.theta_max);
  loop["phi_sweep"] = opt(c.loop.phi_sweep);
  loop["ramp"] = ramp_name(c.loop.ramp);
  loop["n_samples"] = c.loop.n_samples;
  loop["orientation"] =
      c.loop.orientation ? ojson(orientation_name(*c.loop.orientation)) : ojson(nullptr);
  j["loop"] = loop;
  ojson state;
  state["label"] = c.initial_state_label.empty() ? ojson(nullptr) : ojson(c.initial_state_label);
  auto amps = ojson::array();
  for (Eigen::Index i = 0; i < c.initial_state.size(); ++i) {
    amps.push_back({round_significant(c.initial_state(i).real()),
                    round_significant(c.initial_state(i).imag())});
  }
  state["amplitudes"] = amps;
  j["initial_state"] = state;
  j["output_dir"] = c.output_dir;
  if (c.scan) {
    ojson s;
    s["gate"] = experiment_name(c.scan->base);
    s["parameter"] = c.scan->parameter;
    auto values = ojson::array();
    for (const real v : c.scan->values) values.push_back(round_significant(v));
    s["values"] = values;
    j["scan"] = s;
  }
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Experiment e = effective(config);
  if (e == Experiment::Holonomy) throw ConfigError("config.gate: use the holonomy command");
  const auto schedule = build_schedule(config);
  ExperimentConfig c = resolve(config, schedule);
  c.gate = e;
  c.scan.reset();
  GateRunOptions options;
  options.dt = c.dt;
  options.stride = *c.trace_stride;
  const System system = schedule.system();
  const StateVector psi0(system, c.initial_state);
  switch (e) {
    case Experiment::Gate1:
      return {c, run_gate1(*c.phase_target, c.omega, c.t_ad, psi0, options, overrides_of(config.loop))};
    case Experiment::Gate2:
      return {c, run_gate2(*c.phase_target, c.omega, c.t_ad, psi0, options, overrides_of(config.loop))};
    default:
      return {c, run_two_qubit(two_qubit_loop(config.loop), c.omega, *c.delta_meV, c.t_ad, psi0,
                               options)};
  }
}

ojson report_json(const ExperimentResult& r) {
  const auto& run = r.run;
  const System system = run.schedule.system();
  ojson j;
  j["experiment"] = experiment_name(r.resolved.gate);
  j["report"] = to_json(run.report);
  ojson pops;
  const auto labels = basis_labels(system);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pops[std::string(labels[i])] = round_significant(run.trace.max_population(i));
  }
  j["max_population"] = pops;
  auto final_state = ojson::array();
  for (std::size_t i = 0; i < run.final_state.size(); ++i) {
    final_state.push_back(
        {round_significant(run.final_state[i].real()), round_significant(run.final_state[i].imag())});
  }
  j["final_state"] = final_state;
  j["step_count"] = run.trace.step_count;
  if (run.holonomy) {
    j["wilson_line"] = to_json(run.holonomy->wilson);
    j["dynamical_unitary"] = matrix_to_json(run.holonomy->dynamical);
  }
  auto warnings = ojson::array();
  for (const auto& w : run.schedule.warnings()) warnings.push_back(w);
  j["warnings"] = warnings;
  return j;
}

ojson holonomy_report(const ExperimentConfig& config) {
  const auto schedule = build_schedule(config);
  const auto frames = dark_frames(schedule);
  const auto result = wilson_line(frames);
  const auto angles = schedule.angles();
  const real solid = solid_angle(angles);
  const Matrix& w = result.unitary.matrix();
  const GateKind map = schedule.gate_kind();

  ojson j;
  j["map"] = gate_kind_name(map);
  j["solid_angle_numeric"] = round_significant(solid);
  if (schedule.loop()) {
    const real analytic = schedule.loop()->solid_angle();
    j["solid_angle_analytic"] = round_significant(
        schedule.loop()->orientation == Orientation::Positive ? analytic : -analytic);
  }
  j["holonomy"] = to_json(result);
  if (map == GateKind::TwoQubit) {
    const cplx amp = w(2, 2);
    j["phase"] = round_significant(std::arg(amp));
    j["return_amplitude"] = round_significant(std::abs(amp));
    j["return_fidelity"] = round_significant(std::norm(amp));
  } else {
    real phase = 0.0;
    UnitaryOperator predicted = UnitaryOperator::identity(2);
    if (map == GateKind::Gate1) {
      // Counterclockwise loops give exp(+i solid/2 |E+><E+|).
      phase = relative_phase(w);
      predicted = predicted_gate(GateKind::Gate1, 0.5 * solid);
    } else {
      // Clockwise loops give exp(+i |solid| sigma_y).
      phase = std::atan2(w(0, 1).real(), w(0, 0).real());
      predicted = predicted_gate(GateKind::Gate2, -solid);
    }
    j["phase"] = round_significant(phase);
    j["predicted_gate"] = matrix_to_json(predicted.matrix());
    j["distance_to_predicted"] = round_significant(max_abs(w - predicted.matrix()));
  }
  return j;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

ojson manifest(std::string_view command, const ExperimentConfig& c) {
  ojson m;
  m["tool"] = "hqc";
  m["version"] = tool_version;
  m["command"] = command;
  m["config"] = to_json(c);
  return m;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "hqc: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

struct EntryOutcome {
  int code = 0;
  std::string messages;
  std::optional<FidelityReport> report;
};

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PreconditionError*>(&e)) return 2;
  return 1;
}

int run(const ExperimentConfig& config, std::ostream& err) {
  if (config.gate == Experiment::Holonomy) return holonomy_only(config, err);
  if (config.gate == Experiment::Scan) return scan(config, err);
  return guarded(err, [&] {
    const auto result = run_experiment(config);
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    for (const auto& w : result.run.schedule.warnings()) err << "hqc: warning: " << w << '\n';
    std::ostringstream trace, schedule;
    write_trace_csv(trace, result.run.trace);
    write_schedule_csv(schedule, result.run.schedule);
    write_text(dir / "trace.csv", trace.str());
    write_text(dir / "schedule.csv", schedule.str());
    write_json(dir / "report.json", report_json(result));
    write_json(dir / "manifest.json", manifest("run", result.resolved));
    return 0;
  });
}

int holonomy_only(const ExperimentConfig& config, std::ostream& err) {
  return guarded(err, [&] {
    if (config.gate != Experiment::Holonomy) {
      throw ConfigError("config.gate: the holonomy command needs gate \"holonomy\"");
    }
    const auto schedule = build_schedule(config);
    ExperimentConfig resolved = config;
    if (const auto& spec = schedule.loop()) {
      resolved.loop.theta_max = spec->theta_max;
      resolved.loop.phi_sweep = spec->phi_sweep;
      resolved.loop.orientation = spec->orientation;
    }
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);
    std::ostringstream csv;
    write_schedule_csv(csv, schedule);
    write_text(dir / "schedule.csv", csv.str());
    write_json(dir / "holonomy.json", holonomy_report(config));
    write_json(dir / "manifest.json", manifest("holonomy", resolved));
    return 0;
  });
}

int scan(const ExperimentConfig& config, std::ostream& err) {
  return guarded(err, [&] {
    if (!config.scan) throw ConfigError("config.scan: required for the scan command");
    const auto& sc = *config.scan;
    const fs::path dir = config.output_dir;
    fs::create_directories(dir);

    std::vector<std::future<EntryOutcome>> jobs;
    for (std::size_t i = 0; i < sc.values.size(); ++i) {
      ExperimentConfig entry = config;
      entry.gate = sc.base;
      entry.scan.reset();
      const real v = sc.values[i];
      if (sc.parameter == "t_ad") entry.t_ad = v;
      if (sc.parameter == "omega") entry.omega = v;
      if (sc.parameter == "dt") entry.dt = v;
      if (sc.parameter == "phase_target") entry.phase_target = v;
      if (sc.parameter == "delta") entry.delta_meV = v;
      char name[32];
      std::snprintf(name, sizeof name, "entry_%03zu", i);
      entry.output_dir = (dir / name).string();
      jobs.push_back(std::async(std::launch::async, [entry] {
        EntryOutcome out;
        std::ostringstream messages;
        out.code = guarded(messages, [&] {
          const auto result = run_experiment(entry);
          const fs::path edir = entry.output_dir;
          fs::create_directories(edir);
          std::ostringstream trace, schedule;
          write_trace_csv(trace, result.run.trace);
          write_schedule_csv(schedule, result.run.schedule);
          write_text(edir / "trace.csv", trace.str());
          write_text(edir / "schedule.csv", schedule.str());
          write_json(edir / "report.json", report_json(result));
          write_json(edir / "manifest.json", manifest("run", result.resolved));
          out.report = result.run.report;
          return 0;
        });
        out.messages = messages.str();
        return out;
      }));
    }

    std::ostringstream summary;
    summary << "index," << sc.parameter << ",fidelity,leakage_max,holonomy_distance,final_phase\n";
    int code = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto out = jobs[i].get();
      err << out.messages;
      code = std::max(code, out.code);
      summary << i << ',' << format_number(sc.values[i]) << ',';
      if (out.report) {
        const auto& r = *out.report;
        summary << format_number(r.fidelity) << ',' << format_number(r.leakage_max) << ','
                << (r.holonomy_distance ? format_number(*r.holonomy_distance) : "") << ','
                << (r.final_phase ? format_number(*r.final_phase) : "");
      } else {
        summary << ",,,";
      }
      summary << '\n';
    }
    write_text(dir / "summary.csv", summary.str());
    write_json(dir / "manifest.json", manifest("scan", config));
    return code;
  });
}

}  // namespace hqc
