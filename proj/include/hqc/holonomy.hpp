#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "hqc/control_loops.hpp"

namespace hqc {

// Orthonormal, gauge-aligned basis of the zero-eigenvalue subspace at one sample.
struct DarkFrame {
  std::size_t sample_index = 0;
  Matrix frame;  // dim x d_dark, columns are the frame vectors
};

struct HolonomyResult {
  UnitaryOperator unitary;  // on the dark space, in the loop-start computational basis
  real unitarity_defect = 0.0;
  std::size_t step_count = 0;
  real cauchy_estimate = 0.0;  // max-entry change against the half-resolution transport
};

// 2 for the single-exciton system, 3 for the two-exciton system.
std::size_t expected_dark_dimension(System system);

// Columns {Eminus, Eplus} (single) or {E0Eplus, EplusE0, EplusEplus} (two-exciton):
// the dark space at the north pole of every loop.
Matrix computational_dark_basis(System system);

// Null spaces along the schedule, gauge-aligned sample to sample through the
// polar factor of the overlap with the previous frame. The first frame is aligned
// to computational_dark_basis.
// Errors: "degeneracy crossing" when the dark dimension changes, "sampling too
// coarse" when consecutive frames are nearly orthogonal.
std::vector<DarkFrame> dark_frames(const LoopSchedule& schedule, const HamiltonianBuilder& builder);
std::vector<DarkFrame> dark_frames(const LoopSchedule& schedule);

// Dark-space null basis of a single Hamiltonian (unaligned).
Matrix null_space(const HermitianOperator& h, std::size_t expected_dim);

// Discrete path-ordered transport: product of polar-unitarized overlaps
// <D(t_{k+1})|D(t_k)>, closed with the overlap of the last frame on the first.
HolonomyResult wilson_line(std::span<const DarkFrame> frames);

// Oriented solid angle of a closed path, from the spherical excess of triangles
// fanned out of the north pole. Positive for counterclockwise loops about +z.
real solid_angle(std::span<const SphereAngles> path);

// Analytic gates on {Eminus, Eplus}:
//   Gate1: diag(1, e^{i phase});  Gate2: exp(i phase sigma_y).
UnitaryOperator predicted_gate(GateKind kind, real phase);

// arg(U_{++} / U_{--}) for a diagonal single-qubit holonomy.
real relative_phase(const Matrix& u);
// acos(Re tr(U) / 2) for a real rotation.
real rotation_angle(const Matrix& u);

// max-entry distance after removing the best global phase.
real distance_mod_phase(const Matrix& a, const Matrix& b);

nlohmann::ordered_json matrix_to_json(const Matrix& m);
nlohmann::ordered_json to_json(const HolonomyResult& result);

}  // namespace hqc
