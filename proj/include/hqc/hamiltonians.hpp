#pragma once

#include "hqc/quantum_core.hpp"

namespace hqc {

// Complex Rabi frequencies of the three polarizations, rad/fs.
struct ControlPoint {
  cplx omega_minus{};
  cplx omega_plus{};
  cplx omega_zero{};

  static constexpr real default_max_amplitude = 1.0;

  real squared_magnitude() const {
    return std::norm(omega_minus) + std::norm(omega_plus) + std::norm(omega_zero);
  }
  // Throws PreconditionError on non-finite entries or amplitudes above max_amplitude.
  void validate(real max_amplitude = default_max_amplitude) const;

  friend bool operator==(const ControlPoint&, const ControlPoint&) = default;
};

// Exciton-exciton energy shift of a neighbouring dot, stored in rad/fs.
class BiexcitonShift {
public:
  static BiexcitonShift from_meV(real meV);
  static BiexcitonShift from_rad_per_fs(real w);

  real rad_per_fs() const { return delta_; }
  real meV() const { return rad_per_fs_to_meV(delta_); }

private:
  explicit BiexcitonShift(real delta);
  real delta_;
};

// H = -sum_mu (Omega_mu |E^mu><G| + h.c.) on {G, Eminus, Eplus, E0}.
HermitianOperator build_single(const ControlPoint& cp,
                               real max_amplitude = ControlPoint::default_max_amplitude);

// Effective two-photon Hamiltonian on {GG, E0E0, E0Eplus, EplusE0, EplusEplus}:
// <E^a E^b|H|GG> = -(2/delta) Omega_a Omega_b for a, b in {0, +}.
// Throws PreconditionError when omega_minus is nonzero.
HermitianOperator build_two_exciton(const ControlPoint& cp, const BiexcitonShift& shift,
                                    real max_amplitude = ControlPoint::default_max_amplitude);

// Number of eigenvalues with |lambda| < rel_tol * max|lambda|.
std::size_t dark_dimension(const HermitianOperator& h, real rel_tol = 1e-9);

}  // namespace hqc
