#include "hqc/quantum_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hqc {

namespace {

constexpr std::array<std::string_view, 4> single_labels{"G", "Eminus", "Eplus", "E0"};
constexpr std::array<std::string_view, 5> two_labels{"GG", "E0E0", "E0Eplus", "EplusE0",
                                                     "EplusEplus"};

void check_hermitian(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw PreconditionError("operator is not square");
  }
  const real scale = max_abs(m);
  const real asym = max_abs(m - m.adjoint());
  if (asym > HermitianOperator::hermiticity_tolerance * scale) {
    throw PreconditionError("operator is not Hermitian (max |H - H^dagger| = " +
                            std::to_string(asym) + ")");
  }
}

}  // namespace

std::span<const std::string_view> basis_labels(System system) {
  if (system == System::SingleExciton) return single_labels;
  return two_labels;
}

std::size_t dimension(System system) { return basis_labels(system).size(); }

std::size_t basis_index(System system, std::string_view label) {
  const auto labels = basis_labels(system);
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw PreconditionError("unknown basis label '" + std::string(label) + "' for " +
                            std::string(system_name(system)) + " basis");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

std::string_view system_name(System system) {
  return system == System::SingleExciton ? "single_exciton" : "two_exciton";
}

StateVector::StateVector(System system, Vector amplitudes)
    : system_(system), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != dimension(system_)) {
    throw PreconditionError("state dimension does not match basis");
  }
  if (!amplitudes_.allFinite()) {
    throw PreconditionError("state has non-finite amplitudes");
  }
  const real n2 = amplitudes_.squaredNorm();
  if (std::abs(n2 - 1.0) > norm_tolerance) {
    throw PreconditionError("state is not normalized (|psi|^2 = " + std::to_string(n2) + ")");
  }
}

StateVector::StateVector(Unchecked, System system, Vector amplitudes)
    : system_(system), amplitudes_(std::move(amplitudes)) {}

StateVector StateVector::basis_state(System system, std::size_t index) {
  const auto d = dimension(system);
  if (index >= d) throw PreconditionError("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(system, std::move(v));
}

StateVector StateVector::basis_state(System system, std::string_view label) {
  return basis_state(system, basis_index(system, label));
}

StateVector StateVector::unchecked(System system, Vector amplitudes) {
  return StateVector(Unchecked{}, system, std::move(amplitudes));
}

cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.system() != b.system() || a.size() != b.size()) {
    throw PreconditionError("inner product of states in different bases");
  }
  return a.amplitudes().dot(b.amplitudes());
}

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) { check_hermitian(m_); }

HermitianOperator HermitianOperator::zero(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return HermitianOperator(Matrix::Zero(n, n));
}

UnitaryOperator::UnitaryOperator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw PreconditionError("operator is not square");
  const real defect = unitarity_defect(m_);
  if (!(defect <= unitarity_tolerance)) {
    throw PreconditionError("operator is not unitary (defect " + std::to_string(defect) + ")");
  }
}

UnitaryOperator UnitaryOperator::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return UnitaryOperator(Matrix::Identity(n, n));
}

Eigensystem eigensystem(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error("eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigensystem eigensystem(const Matrix& h) { return eigensystem(HermitianOperator(h)); }

real max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

real unitarity_defect(const Matrix& u) {
  return max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

Matrix polar_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace hqc
