#include "hqc/control_loops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hqc/format.hpp"

namespace hqc {

namespace {

real ease(Ramp ramp, real tau) {
  if (ramp == Ramp::Linear) return tau;
  return tau * tau * (3.0 - 2.0 * tau);
}

real cp_distance(const ControlPoint& a, const ControlPoint& b) {
  return std::max({std::abs(a.omega_minus - b.omega_minus), std::abs(a.omega_plus - b.omega_plus),
                   std::abs(a.omega_zero - b.omega_zero)});
}

// Splits `total` intervals proportionally to `weights`, at least one per leg,
// remainders assigned to the largest fractional parts.
std::array<std::size_t, 3> split_intervals(std::size_t total, const std::array<real, 3>& weights) {
  const real sum = weights[0] + weights[1] + weights[2];
  const std::size_t spare = total - 3;
  std::array<std::size_t, 3> counts{};
  std::array<real, 3> frac{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const real exact = static_cast<real>(spare) * weights[i] / sum;
    counts[i] = 1 + static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - std::floor(exact);
    used += counts[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; used < total; ++k, ++used) counts[order[k % 3]] += 1;
  return counts;
}

}  // namespace

std::string_view gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::Gate1: return "gate1";
    case GateKind::Gate2: return "gate2";
    case GateKind::TwoQubit: return "twoqubit";
  }
  return "unknown";
}

std::string_view ramp_name(Ramp ramp) { return ramp == Ramp::Linear ? "linear" : "smoothstep"; }

std::string_view orientation_name(Orientation o) {
  return o == Orientation::Positive ? "positive" : "negative";
}

System system_for(GateKind kind) {
  return kind == GateKind::TwoQubit ? System::TwoExciton : System::SingleExciton;
}

real WedgeLoopSpec::solid_angle() const { return phi_sweep * (1.0 - std::cos(theta_max)); }

void WedgeLoopSpec::validate() const {
  if (!std::isfinite(theta_max) || !std::isfinite(phi_sweep)) {
    throw PreconditionError("wedge loop has non-finite parameters");
  }
  if (theta_max <= 0.0 || phi_sweep <= 0.0) throw PreconditionError("zero-area loop");
  if (theta_max >= pi) {
    throw PreconditionError("wedge loops must not reach theta = pi");
  }
  if (phi_sweep > 2.0 * pi * (1.0 + 1e-12)) {
    throw PreconditionError("phi_sweep exceeds 2 pi");
  }
  if (n_samples < min_samples) {
    throw PreconditionError("wedge loop needs at least " + std::to_string(min_samples) +
                            " samples");
  }
}

std::vector<PathSample> wedge_path(const WedgeLoopSpec& spec, real duration) {
  spec.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw PreconditionError("loop duration must be positive");
  }
  const real th = spec.theta_max;
  const real sweep = spec.phi_sweep;
  const std::array<real, 3> arcs{th, sweep * std::sin(th), th};
  const real total_arc = arcs[0] + arcs[1] + arcs[2];
  const auto counts = split_intervals(spec.n_samples - 1, arcs);
  const bool positive = spec.orientation == Orientation::Positive;

  auto angles_on_leg = [&](std::size_t leg, real s) -> SphereAngles {
    switch (leg) {
      case 0: return {th * s, positive ? 0.0 : sweep};
      case 1: return {th, positive ? sweep * s : sweep * (1.0 - s)};
      default: return {th * (1.0 - s), positive ? sweep : 0.0};
    }
  };

  std::vector<PathSample> path;
  path.reserve(spec.n_samples);
  path.push_back({0.0, angles_on_leg(0, 0.0)});
  real arc_before = 0.0;
  for (std::size_t leg = 0; leg < 3; ++leg) {
    const real t0 = duration * arc_before / total_arc;
    const real t1 = leg == 2 ? duration : duration * (arc_before + arcs[leg]) / total_arc;
    const std::size_t n = counts[leg];
    for (std::size_t j = 1; j <= n; ++j) {
      const real tau = static_cast<real>(j) / static_cast<real>(n);
      const real t = j == n ? t1 : t0 + (t1 - t0) * tau;
      path.push_back({t, angles_on_leg(leg, j == n ? 1.0 : ease(spec.ramp, tau))});
    }
    arc_before += arcs[leg];
  }
  return path;
}

ControlPoint control_point(GateKind kind, real amplitude, const SphereAngles& a) {
  if (kind == GateKind::Gate2) {
    const real s = std::sin(a.theta);
    return {cplx(amplitude * s * std::cos(a.phi)), cplx(amplitude * s * std::sin(a.phi)),
            cplx(amplitude * std::cos(a.theta))};
  }
  const real half = 0.5 * a.theta;
  return {cplx{}, -amplitude * std::sin(half) * std::exp(I * a.phi),
          cplx(amplitude * std::cos(half))};
}

LoopSchedule::LoopSchedule(GateKind kind, real amplitude, std::vector<PathSample> path,
                           std::optional<BiexcitonShift> shift, std::optional<WedgeLoopSpec> loop)
    : kind_(kind), amplitude_(amplitude), shift_(shift), loop_(loop) {
  if (path.size() < 2) throw PreconditionError("schedule needs at least two samples");
  if (path.front().t != 0.0) throw PreconditionError("schedule must start at t = 0");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw PreconditionError("control amplitude must be non-negative");
  }
  if (kind == GateKind::TwoQubit && !shift_) {
    throw PreconditionError("two-qubit schedule requires a biexciton shift");
  }
  samples_.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k > 0 && !(path[k].t > path[k - 1].t)) {
      throw PreconditionError("schedule times must be strictly increasing");
    }
    samples_.push_back({path[k].t, control_at(path[k].angles), path[k].angles});
  }
  if (cp_distance(samples_.front().cp, samples_.back().cp) > closure_tolerance) {
    throw PreconditionError("schedule is not a closed loop");
  }
}

HermitianOperator LoopSchedule::hamiltonian(const ControlPoint& cp) const {
  if (kind_ == GateKind::TwoQubit) return build_two_exciton(cp, *shift_);
  return build_single(cp);
}

HamiltonianBuilder LoopSchedule::builder() const {
  if (kind_ == GateKind::TwoQubit) {
    return [shift = *shift_](const ControlPoint& cp) { return build_two_exciton(cp, shift); };
  }
  return [](const ControlPoint& cp) { return build_single(cp); };
}

std::vector<SphereAngles> LoopSchedule::angles() const {
  std::vector<SphereAngles> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.angles);
  return out;
}

LoopSchedule reversed(const LoopSchedule& schedule) {
  const auto& s = schedule.samples();
  const real total = schedule.total_duration();
  std::vector<PathSample> path;
  path.reserve(s.size());
  for (auto it = s.rbegin(); it != s.rend(); ++it) {
    path.push_back({it == s.rbegin() ? 0.0 : total - it->t, it->angles});
  }
  path.back().t = total;
  auto loop = schedule.loop();
  if (loop) {
    loop->orientation = loop->orientation == Orientation::Positive ? Orientation::Negative
                                                                   : Orientation::Positive;
  }
  return LoopSchedule(schedule.gate_kind(), schedule.amplitude(), std::move(path),
                      schedule.shift(), loop);
}

LoopSchedule concatenate_with_reverse(const LoopSchedule& schedule) {
  const auto back = reversed(schedule);
  const real offset = schedule.total_duration();
  std::vector<PathSample> path;
  path.reserve(2 * schedule.samples().size());
  for (const auto& s : schedule.samples()) path.push_back({s.t, s.angles});
  for (std::size_t k = 1; k < back.samples().size(); ++k) {
    path.push_back({offset + back.samples()[k].t, back.samples()[k].angles});
  }
  return LoopSchedule(schedule.gate_kind(), schedule.amplitude(), std::move(path),
                      schedule.shift());
}

LoopSchedule frozen_schedule(GateKind kind, real amplitude, real duration, std::size_t n_samples,
                             std::optional<BiexcitonShift> shift) {
  if (n_samples < 2) throw PreconditionError("schedule needs at least two samples");
  if (!(duration > 0.0)) throw PreconditionError("loop duration must be positive");
  std::vector<PathSample> path(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    path[k].t = k + 1 == n_samples
                    ? duration
                    : duration * static_cast<real>(k) / static_cast<real>(n_samples - 1);
  }
  return LoopSchedule(kind, amplitude, std::move(path), shift);
}

WedgeLoopSpec solve_wedge(real solid, const WedgeOverrides& overrides,
                          Orientation default_orientation) {
  if (!std::isfinite(solid)) throw PreconditionError("phase target must be finite");
  if (solid <= 1e-12) throw PreconditionError("zero-area loop");
  if (solid >= 4.0 * pi) {
    throw PreconditionError("unreachable phase target: needs solid angle >= 4 pi");
  }
  WedgeLoopSpec spec;
  spec.ramp = overrides.ramp.value_or(Ramp::SmoothStep);
  spec.n_samples = overrides.n_samples.value_or(spec.n_samples);
  spec.orientation = overrides.orientation.value_or(default_orientation);
  spec.theta_max = overrides.theta_max.value_or(pi / 2);
  if (spec.theta_max <= 0.0) throw PreconditionError("zero-area loop");
  spec.phi_sweep = solid / (1.0 - std::cos(spec.theta_max));
  if (spec.phi_sweep > 2.0 * pi) {
    if (overrides.theta_max) {
      throw PreconditionError("unreachable phase target for the given theta_max");
    }
    spec.phi_sweep = 2.0 * pi;
    spec.theta_max = std::acos(1.0 - solid / (2.0 * pi));
  }
  spec.validate();
  return spec;
}

namespace {

void check_gate_inputs(real omega, real duration) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw PreconditionError("Rabi amplitude must be positive");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw PreconditionError("loop duration must be positive");
  }
}

}  // namespace

LoopSchedule gate1_schedule(real phi1_target, real omega, real duration,
                            const WedgeOverrides& overrides) {
  check_gate_inputs(omega, duration);
  if (phi1_target >= 2.0 * pi) throw PreconditionError("unreachable phase target: phi1 >= 2 pi");
  const auto spec = solve_wedge(2.0 * phi1_target, overrides, Orientation::Positive);
  return LoopSchedule(GateKind::Gate1, omega, wedge_path(spec, duration), std::nullopt, spec);
}

LoopSchedule gate2_schedule(real phi2_target, real omega, real duration,
                            const WedgeOverrides& overrides) {
  check_gate_inputs(omega, duration);
  const auto spec = solve_wedge(phi2_target, overrides, Orientation::Negative);
  return LoopSchedule(GateKind::Gate2, omega, wedge_path(spec, duration), std::nullopt, spec);
}

real adiabaticity_ratio(real omega_tilde, const BiexcitonShift& shift, real duration) {
  return duration * omega_tilde * omega_tilde / shift.rad_per_fs();
}

LoopSchedule two_qubit_schedule(const WedgeLoopSpec& loop, real omega_tilde, real delta_meV,
                                real duration) {
  loop.validate();
  check_gate_inputs(omega_tilde, duration);
  const auto shift = BiexcitonShift::from_meV(delta_meV);
  const real ratio = adiabaticity_ratio(omega_tilde, shift, duration);
  if (ratio < min_adiabaticity_ratio) {
    throw PreconditionError("violates T_ad >> delta/|Omega|^2 (ratio " + format_number(ratio) +
                            " < " + format_number(min_adiabaticity_ratio) + ")");
  }
  LoopSchedule schedule(GateKind::TwoQubit, omega_tilde, wedge_path(loop, duration), shift, loop);
  if (ratio < warn_adiabaticity_ratio) {
    schedule.add_warning("weakly adiabatic: T_ad / (delta/|Omega|^2) = " + format_number(ratio));
  }
  return schedule;
}

WedgeLoopSpec canonical_two_qubit_loop() {
  WedgeLoopSpec spec;
  spec.theta_max = pi / 4;
  spec.phi_sweep = 2.0 * pi;
  return spec;
}

void write_schedule_csv(std::ostream& os, const LoopSchedule& schedule) {
  os << "t_fs,theta,phi,re_omega_minus,im_omega_minus,re_omega_plus,im_omega_plus,"
        "re_omega_zero,im_omega_zero\n";
  for (const auto& s : schedule.samples()) {
    os << format_number(s.t) << ',' << format_number(s.angles.theta) << ','
       << format_number(s.angles.phi);
    for (const cplx w : {s.cp.omega_minus, s.cp.omega_plus, s.cp.omega_zero}) {
      os << ',' << format_number(w.real()) << ',' << format_number(w.imag());
    }
    os << '\n';
  }
}

}  // namespace hqc
