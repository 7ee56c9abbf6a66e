#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace hqc {

using real = double;
using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr real pi = 3.14159265358979323846;

// hbar in meV*fs. Internal units: time in fs, energies as angular frequencies in rad/fs.
inline constexpr real hbar_meV_fs = 658.2119;

constexpr real meV_to_rad_per_fs(real meV) { return meV / hbar_meV_fs; }
constexpr real rad_per_fs_to_meV(real w) { return w * hbar_meV_fs; }

// Base of all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied input violates an operation's precondition.
class PreconditionError : public Error {
public:
  using Error::Error;
};

enum class System { SingleExciton, TwoExciton };

// Fixed basis orders; every serialized trace uses them.
//   SingleExciton: G, Eminus, Eplus, E0
//   TwoExciton:    GG, E0E0, E0Eplus, EplusE0, EplusEplus
std::span<const std::string_view> basis_labels(System system);
std::size_t dimension(System system);
std::size_t basis_index(System system, std::string_view label);
std::string_view system_name(System system);

namespace single {
inline constexpr std::size_t G = 0, Eminus = 1, Eplus = 2, E0 = 3;
}
namespace two {
inline constexpr std::size_t GG = 0, E0E0 = 1, E0Eplus = 2, EplusE0 = 3, EplusEplus = 4;
}

class StateVector {
public:
  static constexpr real norm_tolerance = 1e-8;

  // Throws PreconditionError unless the squared norm is within norm_tolerance of 1.
  StateVector(System system, Vector amplitudes);

  static StateVector basis_state(System system, std::string_view label);
  static StateVector basis_state(System system, std::size_t index);

  // Skips the normalization check; used for integrator output whose drift is
  // reported separately.
  static StateVector unchecked(System system, Vector amplitudes);

  System system() const { return system_; }
  std::size_t size() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  cplx operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }
  real squared_norm() const { return amplitudes_.squaredNorm(); }

private:
  struct Unchecked {};
  StateVector(Unchecked, System system, Vector amplitudes);

  System system_;
  Vector amplitudes_;
};

// <a|b>, conjugate-linear in a.
cplx inner_product(const StateVector& a, const StateVector& b);

class HermitianOperator {
public:
  static constexpr real hermiticity_tolerance = 1e-12;

  explicit HermitianOperator(Matrix m);

  static HermitianOperator zero(std::size_t dim);

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

private:
  Matrix m_;
};

class UnitaryOperator {
public:
  static constexpr real unitarity_tolerance = 1e-8;

  explicit UnitaryOperator(Matrix m);

  static UnitaryOperator identity(std::size_t dim);

  const Matrix& matrix() const { return m_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  UnitaryOperator adjoint() const { return UnitaryOperator(m_.adjoint()); }

private:
  Matrix m_;
};

struct Eigensystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns, orthonormal
};

Eigensystem eigensystem(const HermitianOperator& h);
// Validates hermiticity first.
Eigensystem eigensystem(const Matrix& h);

// max_ij |m_ij|
real max_abs(const Matrix& m);
// max_ij |U^dagger U - I|
real unitarity_defect(const Matrix& u);
// Unitary factor of the polar decomposition m = Q P.
Matrix polar_unitary(const Matrix& m);

}  // namespace hqc
