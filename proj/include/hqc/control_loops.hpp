#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hqc/hamiltonians.hpp"

namespace hqc {

enum class GateKind { Gate1, Gate2, TwoQubit };
enum class Ramp { Linear, SmoothStep };
// Positive: counterclockwise about +z, i.e. phi increases along the parallel leg.
enum class Orientation { Positive, Negative };

std::string_view gate_kind_name(GateKind kind);
std::string_view ramp_name(Ramp ramp);
std::string_view orientation_name(Orientation orientation);
System system_for(GateKind kind);

// Polar/azimuthal coordinates on the control sphere. phi is not wrapped.
struct SphereAngles {
  real theta = 0.0;
  real phi = 0.0;
};

// Meridian-parallel-meridian loop starting and ending at the north pole.
struct WedgeLoopSpec {
  real theta_max = pi / 2;
  real phi_sweep = pi / 2;
  Ramp ramp = Ramp::SmoothStep;
  std::size_t n_samples = 10000;
  Orientation orientation = Orientation::Positive;

  static constexpr std::size_t min_samples = 100;

  // Unsigned enclosed solid angle phi_sweep * (1 - cos theta_max).
  real solid_angle() const;
  // Throws PreconditionError for degenerate or out-of-range parameters.
  void validate() const;
};

struct PathSample {
  real t = 0.0;  // fs
  SphereAngles angles;
};

// Samples are shared between legs at the corners; time per leg is proportional
// to its arc length and each leg is eased independently.
std::vector<PathSample> wedge_path(const WedgeLoopSpec& spec, real duration);

// Maps sphere angles onto Rabi frequencies for a given gate parametrization.
//   Gate1, TwoQubit: (0, -A sin(theta/2) e^{i phi}, A cos(theta/2))
//   Gate2:           (A sin(theta) cos(phi), A sin(theta) sin(phi), A cos(theta))
ControlPoint control_point(GateKind kind, real amplitude, const SphereAngles& angles);

struct ScheduleSample {
  real t = 0.0;
  ControlPoint cp;
  SphereAngles angles;
};

using HamiltonianBuilder = std::function<HermitianOperator(const ControlPoint&)>;

class LoopSchedule {
public:
  static constexpr real closure_tolerance = 1e-12;

  // Validates strictly increasing times from 0 and closure.
  LoopSchedule(GateKind kind, real amplitude, std::vector<PathSample> path,
               std::optional<BiexcitonShift> shift = std::nullopt,
               std::optional<WedgeLoopSpec> loop = std::nullopt);

  GateKind gate_kind() const { return kind_; }
  System system() const { return system_for(kind_); }
  real amplitude() const { return amplitude_; }
  real total_duration() const { return samples_.back().t; }
  const std::vector<ScheduleSample>& samples() const { return samples_; }
  const std::optional<BiexcitonShift>& shift() const { return shift_; }
  const std::optional<WedgeLoopSpec>& loop() const { return loop_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  ControlPoint control_at(const SphereAngles& angles) const {
    return control_point(kind_, amplitude_, angles);
  }
  HermitianOperator hamiltonian(const ControlPoint& cp) const;
  HamiltonianBuilder builder() const;

  std::vector<SphereAngles> angles() const;

private:
  GateKind kind_;
  real amplitude_;
  std::optional<BiexcitonShift> shift_;
  std::optional<WedgeLoopSpec> loop_;
  std::vector<ScheduleSample> samples_;
  std::vector<std::string> warnings_;
};

// Same loop traversed backwards in time.
LoopSchedule reversed(const LoopSchedule& schedule);
// Loop followed by its reverse.
LoopSchedule concatenate_with_reverse(const LoopSchedule& schedule);
// No motion: every sample sits at the north pole.
LoopSchedule frozen_schedule(GateKind kind, real amplitude, real duration,
                             std::size_t n_samples = 100,
                             std::optional<BiexcitonShift> shift = std::nullopt);

struct WedgeOverrides {
  std::optional<real> theta_max;
  std::optional<Ramp> ramp;
  std::optional<std::size_t> n_samples;
  std::optional<Orientation> orientation;
};

// Wedge with enclosed solid angle `solid` (default theta_max = pi/2; theta_max is
// raised with a full 2 pi sweep when the target does not fit).
WedgeLoopSpec solve_wedge(real solid, const WedgeOverrides& overrides,
                          Orientation default_orientation);

// Solid angle 2 * phi1. Positive orientation yields exp(+i phi1 |E+><E+|).
LoopSchedule gate1_schedule(real phi1_target, real omega, real duration,
                            const WedgeOverrides& overrides = {});
// Solid angle phi2. Negative orientation yields exp(+i phi2 sigma_y) on {E-, E+}.
LoopSchedule gate2_schedule(real phi2_target, real omega, real duration,
                            const WedgeOverrides& overrides = {});

// duration / (delta / omega_tilde^2), all in internal units.
real adiabaticity_ratio(real omega_tilde, const BiexcitonShift& shift, real duration);

inline constexpr real min_adiabaticity_ratio = 50.0;
inline constexpr real warn_adiabaticity_ratio = 100.0;

// Throws PreconditionError when the adiabaticity ratio is below 50; records a
// warning below 100.
LoopSchedule two_qubit_schedule(const WedgeLoopSpec& loop, real omega_tilde, real delta_meV,
                                real duration);

// Canonical controlled-phase loop: theta_max = pi/4 with a full azimuthal turn.
WedgeLoopSpec canonical_two_qubit_loop();

// Columns: t_fs, theta, phi, re/im of omega_minus, omega_plus, omega_zero.
void write_schedule_csv(std::ostream& os, const LoopSchedule& schedule);

}  // namespace hqc
