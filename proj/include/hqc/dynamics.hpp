#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "hqc/holonomy.hpp"

namespace hqc {

struct EvolveOptions {
  real dt = 0.0;              // fs; upper bound, the step is shrunk to divide T_ad evenly
  std::size_t stride = 1;     // record every `stride` steps (first and last always)
  real phase_threshold = 1e-3;
};

inline constexpr real max_norm_drift_allowed = 1e-6;

struct SimulationTrace {
  System system = System::SingleExciton;
  std::vector<real> times;
  std::vector<std::vector<real>> populations;  // one row per time, fixed basis order
  std::vector<real> norm;
  // Two-exciton runs only: Arg <Psi(t)|E+E+>, empty where the overlap is below threshold.
  std::vector<std::optional<real>> phase_plus;

  // Evaluated at every integration step, not only the recorded ones.
  real max_norm_drift = 0.0;
  real leakage_max = 0.0;  // population of the ground state plus the bright state
  real max_ground_population = 0.0;
  std::size_t step_count = 0;

  // Largest recorded population of one basis state.
  real max_population(std::size_t index) const;
};

struct EvolutionResult {
  StateVector final_state;
  SimulationTrace trace;
};

// Largest admissible step: min(0.05 / spectral radius, T_ad / 1e4).
real max_time_step(const LoopSchedule& schedule);

// Fixed-step classic RK4 for i dpsi/dt = H(t) psi with (theta, phi) interpolated
// linearly between schedule samples. The norm is never corrected; drift above
// 1e-6 throws "step size too large".
EvolutionResult evolve(const LoopSchedule& schedule, const StateVector& psi0,
                       const EvolveOptions& options, const HamiltonianBuilder& builder);
EvolutionResult evolve(const LoopSchedule& schedule, const StateVector& psi0,
                       const EvolveOptions& options);

// Propagates every column of `states` through the loop.
Matrix evolve_columns(const LoopSchedule& schedule, const Matrix& states, real dt,
                      const HamiltonianBuilder& builder, real* max_norm_drift = nullptr);

struct HolonomyComparison {
  real distance = 0.0;  // max-entry, global phase removed
  Matrix dynamical;     // start dark basis evolved and projected back onto it
  HolonomyResult wilson;
};

HolonomyComparison dynamics_vs_holonomy(const LoopSchedule& schedule, real dt);

struct FidelityReport {
  real fidelity = 0.0;
  std::optional<real> final_phase;
  real leakage_max = 0.0;
  std::optional<real> holonomy_distance;
  real norm_drift = 0.0;
  real max_ground_population = 0.0;
};

struct GateRun {
  LoopSchedule schedule;
  FidelityReport report;
  SimulationTrace trace;
  StateVector final_state;
  std::optional<HolonomyComparison> holonomy;
};

struct GateRunOptions {
  std::optional<real> dt;  // defaults to max_time_step(schedule)
  std::size_t stride = 1;
  bool compare_holonomy = true;
};

// Initial states must lie in span{Eminus, Eplus}. The target is predicted_gate * psi0.
GateRun run_gate1(real phi1, real omega, real duration, const StateVector& psi0,
                  const GateRunOptions& options = {}, const WedgeOverrides& loop = {});
GateRun run_gate2(real phi2, real omega, real duration, const StateVector& psi0,
                  const GateRunOptions& options = {}, const WedgeOverrides& loop = {});
// Target |E+E+>; final_phase = Arg <E+E+|psi(T_ad)>.
GateRun run_two_qubit(const WedgeLoopSpec& loop, real omega_tilde, real delta_meV,
                      real duration, const StateVector& psi0, const GateRunOptions& options = {});

// Header: t_fs, pop_<label>..., norm, phi_plus.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace);
nlohmann::ordered_json to_json(const FidelityReport& report);

}  // namespace hqc
