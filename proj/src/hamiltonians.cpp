#include "hqc/hamiltonians.hpp"

#include <cmath>

namespace hqc {

void ControlPoint::validate(real max_amplitude) const {
  for (const cplx w : {omega_minus, omega_plus, omega_zero}) {
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
      throw PreconditionError("control point has non-finite Rabi frequency");
    }
    if (std::abs(w) > max_amplitude) {
      throw PreconditionError("Rabi frequency " + std::to_string(std::abs(w)) +
                              " rad/fs exceeds the configured maximum " +
                              std::to_string(max_amplitude) + " (unit mistake?)");
    }
  }
}

BiexcitonShift::BiexcitonShift(real delta) : delta_(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw PreconditionError("biexciton shift must be positive");
  }
}

BiexcitonShift BiexcitonShift::from_meV(real meV) {
  return BiexcitonShift(meV_to_rad_per_fs(meV));
}

BiexcitonShift BiexcitonShift::from_rad_per_fs(real w) { return BiexcitonShift(w); }

HermitianOperator build_single(const ControlPoint& cp, real max_amplitude) {
  cp.validate(max_amplitude);
  Matrix h = Matrix::Zero(4, 4);
  const std::pair<std::size_t, cplx> couplings[] = {
      {single::Eminus, cp.omega_minus},
      {single::Eplus, cp.omega_plus},
      {single::E0, cp.omega_zero},
  };
  for (const auto& [row, omega] : couplings) {
    const auto r = static_cast<Eigen::Index>(row);
    h(r, 0) = -omega;
    h(0, r) = -std::conj(omega);
  }
  return HermitianOperator(std::move(h));
}

HermitianOperator build_two_exciton(const ControlPoint& cp, const BiexcitonShift& shift,
                                    real max_amplitude) {
  cp.validate(max_amplitude);
  if (cp.omega_minus != cplx{}) {
    throw PreconditionError("two-photon model defined for {0,+} polarizations only");
  }
  const real scale = 2.0 / shift.rad_per_fs();
  const cplx w0 = cp.omega_zero;
  const cplx wp = cp.omega_plus;
  // Plain products, no conjugation; the Hermitian row is filled explicitly.
  const std::pair<std::size_t, cplx> couplings[] = {
      {two::E0E0, w0 * w0},
      {two::E0Eplus, w0 * wp},
      {two::EplusE0, wp * w0},
      {two::EplusEplus, wp * wp},
  };
  Matrix h = Matrix::Zero(5, 5);
  for (const auto& [row, product] : couplings) {
    const auto r = static_cast<Eigen::Index>(row);
    h(r, 0) = -scale * product;
    h(0, r) = std::conj(h(r, 0));
  }
  return HermitianOperator(std::move(h));
}

std::size_t dark_dimension(const HermitianOperator& h, real rel_tol) {
  const auto es = eigensystem(h);
  const real largest = es.values.cwiseAbs().maxCoeff();
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (largest == 0.0 || std::abs(es.values(i)) < rel_tol * largest) ++count;
  }
  return count;
}

}  // namespace hqc
