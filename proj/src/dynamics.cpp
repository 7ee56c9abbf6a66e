#include "hqc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hqc/format.hpp"

namespace hqc {

namespace {

class ScheduleInterpolator {
public:
  explicit ScheduleInterpolator(const LoopSchedule& schedule) : samples_(schedule.samples()) {}

  // Queries must be non-decreasing in t.
  SphereAngles angles_at(real t) {
    const std::size_t last = samples_.size() - 1;
    while (cursor_ + 1 < last && samples_[cursor_ + 1].t <= t) ++cursor_;
    const auto& a = samples_[cursor_];
    const auto& b = samples_[cursor_ + 1];
    const real w = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    return {a.angles.theta + w * (b.angles.theta - a.angles.theta),
            a.angles.phi + w * (b.angles.phi - a.angles.phi)};
  }

private:
  const std::vector<ScheduleSample>& samples_;
  std::size_t cursor_ = 0;
};

real spectral_radius(const HermitianOperator& h) {
  return eigensystem(h).values.cwiseAbs().maxCoeff();
}

// Population outside the dark space: ground state plus the normalized bright
// state H|ground>.
real leakage(const Matrix& h, const Eigen::Ref<const Vector>& psi) {
  const Vector bright = h.col(0);
  const real nb = bright.norm();
  real leak = std::norm(psi(0));
  if (nb > 0.0) leak += std::norm(bright.dot(psi)) / (nb * nb);
  return leak;
}

struct StepObserver {
  virtual ~StepObserver() = default;
  virtual void on_step(std::size_t step, real t, const Matrix& h, const Matrix& psi) = 0;
};

// Returns the final states; `observer` sees the state at the start of every step
// and once more at the end.
Matrix integrate(const LoopSchedule& schedule, Matrix psi, real dt,
                 const HamiltonianBuilder& builder, StepObserver* observer,
                 std::size_t* steps_out) {
  const real total = schedule.total_duration();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be positive");
  const real limit = max_time_step(schedule);
  if (dt > limit * (1.0 + 1e-12)) {
    throw PreconditionError("time step " + format_number(dt) + " fs exceeds the limit " +
                            format_number(limit) + " fs");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(total / dt - 1e-9));
  const real h = total / static_cast<real>(steps);
  ScheduleInterpolator interp(schedule);
  auto hamiltonian_at = [&](real t) {
    return builder(schedule.control_at(interp.angles_at(t))).matrix();
  };

  Matrix h0 = hamiltonian_at(0.0);
  Matrix k1, k2, k3, k4;
  for (std::size_t n = 0; n < steps; ++n) {
    const real t = h * static_cast<real>(n);
    if (observer) observer->on_step(n, t, h0, psi);
    const Matrix hm = hamiltonian_at(t + 0.5 * h);
    const Matrix h1 = hamiltonian_at(n + 1 == steps ? total : t + h);
    k1 = -I * (h0 * psi);
    k2 = -I * (hm * (psi + (0.5 * h) * k1));
    k3 = -I * (hm * (psi + (0.5 * h) * k2));
    k4 = -I * (h1 * (psi + h * k3));
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    h0 = h1;
  }
  if (observer) observer->on_step(steps, total, h0, psi);
  if (steps_out) *steps_out = steps;
  return psi;
}

class DriftTracker : public StepObserver {
public:
  explicit DriftTracker(const Matrix& initial) : initial_norms_(initial.colwise().norm()) {}

  void on_step(std::size_t, real, const Matrix&, const Matrix& psi) override {
    const Eigen::RowVectorXd norms = psi.colwise().norm();
    drift = std::max(drift, (norms - initial_norms_).cwiseAbs().maxCoeff());
  }

  real drift = 0.0;

private:
  Eigen::RowVectorXd initial_norms_;
};

class TraceRecorder : public DriftTracker {
public:
  TraceRecorder(const Matrix& initial, System system, const EvolveOptions& options)
      : DriftTracker(initial), options_(options) {
    trace.system = system;
  }

  void on_step(std::size_t step, real t, const Matrix& h, const Matrix& psi) override {
    DriftTracker::on_step(step, t, h, psi);
    const auto col = psi.col(0);
    trace.leakage_max = std::max(trace.leakage_max, leakage(h, col));
    trace.max_ground_population = std::max(trace.max_ground_population, std::norm(col(0)));
    if (step % options_.stride != 0 && t != last_time_) return;
    trace.times.push_back(t);
    std::vector<real> pops(static_cast<std::size_t>(col.size()));
    for (Eigen::Index i = 0; i < col.size(); ++i) pops[static_cast<std::size_t>(i)] = std::norm(col(i));
    trace.populations.push_back(std::move(pops));
    trace.norm.push_back(col.norm());
    if (trace.system == System::TwoExciton) {
      const cplx overlap = std::conj(col(two::EplusEplus));
      trace.phase_plus.push_back(std::abs(overlap) >= options_.phase_threshold
                                     ? std::optional<real>(std::arg(overlap))
                                     : std::nullopt);
    }
  }

  void set_final_time(real t) { last_time_ = t; }

  SimulationTrace trace;

private:
  EvolveOptions options_;
  real last_time_ = std::numeric_limits<real>::quiet_NaN();
};

void check_drift(real drift) {
  if (drift > max_norm_drift_allowed) {
    throw PreconditionError("step size too large: norm drift " + format_number(drift));
  }
}

real wrap_phase(real x) { return std::arg(std::exp(I * x)); }

Vector embed_qubit(System system, const Vector& qubit) {
  return computational_dark_basis(system) * qubit;
}

Vector qubit_components(const StateVector& psi) {
  const auto& a = psi.amplitudes();
  if (std::norm(a(single::G)) + std::norm(a(single::E0)) > 1e-12) {
    throw PreconditionError("initial state must lie in the qubit subspace {Eminus, Eplus}");
  }
  Vector q(2);
  q << a(single::Eminus), a(single::Eplus);
  return q;
}

FidelityReport base_report(const EvolutionResult& ev) {
  FidelityReport r;
  r.leakage_max = ev.trace.leakage_max;
  r.norm_drift = ev.trace.max_norm_drift;
  r.max_ground_population = ev.trace.max_ground_population;
  return r;
}

GateRun single_qubit_run(LoopSchedule schedule, GateKind kind, real phase,
                         const StateVector& psi0, const GateRunOptions& options) {
  if (psi0.system() != System::SingleExciton) {
    throw PreconditionError("single-qubit gates act on single-exciton states");
  }
  const real dt = options.dt.value_or(max_time_step(schedule));
  const Vector q0 = qubit_components(psi0);
  const Vector target = embed_qubit(System::SingleExciton, predicted_gate(kind, phase).matrix() * q0);

  auto ev = evolve(schedule, psi0, {dt, options.stride, 1e-3});
  auto report = base_report(ev);
  const Vector& final_amp = ev.final_state.amplitudes();
  report.fidelity = std::norm(target.dot(final_amp));

  if (kind == GateKind::Gate1) {
    // E- is decoupled, so its amplitude is the phase reference.
    constexpr real defined = 1e-6;
    if (std::abs(q0(1)) > defined) {
      real phase_out = std::arg(final_amp(single::Eplus) / q0(1));
      if (std::abs(q0(0)) > defined) phase_out -= std::arg(final_amp(single::Eminus) / q0(0));
      report.final_phase = wrap_phase(phase_out);
    }
  }

  std::optional<HolonomyComparison> cmp;
  if (options.compare_holonomy) {
    cmp = dynamics_vs_holonomy(schedule, dt);
    report.holonomy_distance = cmp->distance;
  }
  return {std::move(schedule), report, std::move(ev.trace), std::move(ev.final_state),
          std::move(cmp)};
}

}  // namespace

real SimulationTrace::max_population(std::size_t index) const {
  real m = 0.0;
  for (const auto& row : populations) m = std::max(m, row.at(index));
  return m;
}

real max_time_step(const LoopSchedule& schedule) {
  real radius = 0.0;
  for (const auto& s : schedule.samples()) {
    radius = std::max(radius, spectral_radius(schedule.hamiltonian(s.cp)));
  }
  const real by_duration = schedule.total_duration() / 1e4;
  if (radius == 0.0) return by_duration;
  return std::min(0.05 / radius, by_duration);
}

EvolutionResult evolve(const LoopSchedule& schedule, const StateVector& psi0,
                       const EvolveOptions& options, const HamiltonianBuilder& builder) {
  if (psi0.system() != schedule.system()) {
    throw PreconditionError("initial state basis does not match the schedule");
  }
  if (options.stride == 0) throw PreconditionError("trace stride must be positive");
  const Matrix initial = psi0.amplitudes();
  TraceRecorder recorder(initial, schedule.system(), options);
  recorder.set_final_time(schedule.total_duration());
  std::size_t steps = 0;
  Matrix final_psi = integrate(schedule, initial, options.dt, builder, &recorder, &steps);
  recorder.trace.max_norm_drift = recorder.drift;
  recorder.trace.step_count = steps;
  check_drift(recorder.drift);
  return {StateVector::unchecked(schedule.system(), final_psi.col(0)), std::move(recorder.trace)};
}

EvolutionResult evolve(const LoopSchedule& schedule, const StateVector& psi0,
                       const EvolveOptions& options) {
  return evolve(schedule, psi0, options, schedule.builder());
}

Matrix evolve_columns(const LoopSchedule& schedule, const Matrix& states, real dt,
                      const HamiltonianBuilder& builder, real* max_norm_drift) {
  DriftTracker tracker(states);
  Matrix out = integrate(schedule, states, dt, builder, &tracker, nullptr);
  if (max_norm_drift) *max_norm_drift = tracker.drift;
  check_drift(tracker.drift);
  return out;
}

HolonomyComparison dynamics_vs_holonomy(const LoopSchedule& schedule, real dt) {
  const auto frames = dark_frames(schedule);
  auto wilson = wilson_line(frames);
  const Matrix& start = frames.front().frame;
  const Matrix evolved = evolve_columns(schedule, start, dt, schedule.builder());
  // The loop is closed, so the start frame also spans the end dark space.
  Matrix dynamical = start.adjoint() * evolved;
  const real distance = distance_mod_phase(dynamical, wilson.unitary.matrix());
  return {distance, std::move(dynamical), std::move(wilson)};
}

GateRun run_gate1(real phi1, real omega, real duration, const StateVector& psi0,
                  const GateRunOptions& options, const WedgeOverrides& loop) {
  return single_qubit_run(gate1_schedule(phi1, omega, duration, loop), GateKind::Gate1, phi1,
                          psi0, options);
}

GateRun run_gate2(real phi2, real omega, real duration, const StateVector& psi0,
                  const GateRunOptions& options, const WedgeOverrides& loop) {
  return single_qubit_run(gate2_schedule(phi2, omega, duration, loop), GateKind::Gate2, phi2,
                          psi0, options);
}

GateRun run_two_qubit(const WedgeLoopSpec& loop, real omega_tilde, real delta_meV, real duration,
                      const StateVector& psi0, const GateRunOptions& options) {
  auto schedule = two_qubit_schedule(loop, omega_tilde, delta_meV, duration);
  if (psi0.system() != System::TwoExciton) {
    throw PreconditionError("two-qubit gate acts on two-exciton states");
  }
  const real dt = options.dt.value_or(max_time_step(schedule));
  auto ev = evolve(schedule, psi0, {dt, options.stride, 1e-3});
  auto report = base_report(ev);
  const cplx amp = ev.final_state[two::EplusEplus];
  report.fidelity = std::norm(amp);
  report.final_phase = std::arg(amp);
  std::optional<HolonomyComparison> cmp;
  if (options.compare_holonomy) {
    cmp = dynamics_vs_holonomy(schedule, dt);
    report.holonomy_distance = cmp->distance;
  }
  return {std::move(schedule), report, std::move(ev.trace), std::move(ev.final_state),
          std::move(cmp)};
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace) {
  os << "t_fs";
  for (const auto label : basis_labels(trace.system)) os << ",pop_" << label;
  os << ",norm,phi_plus\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    os << format_number(trace.times[k]);
    for (const real p : trace.populations[k]) os << ',' << format_number(p);
    os << ',' << format_number(trace.norm[k]) << ',';
    if (k < trace.phase_plus.size() && trace.phase_plus[k]) os << format_number(*trace.phase_plus[k]);
    os << '\n';
  }
}

nlohmann::ordered_json to_json(const FidelityReport& r) {
  nlohmann::ordered_json j;
  j["fidelity"] = round_significant(r.fidelity);
  j["final_phase"] = r.final_phase ? nlohmann::ordered_json(round_significant(*r.final_phase))
                                   : nlohmann::ordered_json(nullptr);
  j["leakage_max"] = round_significant(r.leakage_max);
  j["holonomy_distance"] = r.holonomy_distance
                               ? nlohmann::ordered_json(round_significant(*r.holonomy_distance))
                               : nlohmann::ordered_json(nullptr);
  j["norm_drift"] = round_significant(r.norm_drift);
  j["max_ground_population"] = round_significant(r.max_ground_population);
  return j;
}

}  // namespace hqc
