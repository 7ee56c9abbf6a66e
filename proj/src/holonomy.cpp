#include "hqc/holonomy.hpp"

#include <algorithm>
#include <cmath>

#include "hqc/format.hpp"

namespace hqc {

namespace {

constexpr real null_rel_tol = 1e-9;
constexpr real min_overlap_singular_value = 0.9;
constexpr real closure_tol = 1e-8;

Eigen::Vector3d unit_vector(const SphereAngles& a) {
  const real s = std::sin(a.theta);
  return {s * std::cos(a.phi), s * std::sin(a.phi), std::cos(a.theta)};
}

real min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

Matrix transport(std::span<const DarkFrame> frames, std::size_t stride) {
  const auto d = frames.front().frame.cols();
  Matrix w = Matrix::Identity(d, d);
  std::size_t prev = 0;
  for (std::size_t k = stride; prev + 1 < frames.size(); k += stride) {
    const std::size_t next = std::min(k, frames.size() - 1);
    w = polar_unitary(frames[next].frame.adjoint() * frames[prev].frame) * w;
    prev = next;
  }
  // The end frame spans the start space; express the result in the start basis.
  return polar_unitary(frames.front().frame.adjoint() * frames.back().frame) * w;
}

}  // namespace

std::size_t expected_dark_dimension(System system) {
  return system == System::SingleExciton ? 2 : 3;
}

Matrix computational_dark_basis(System system) {
  const auto n = static_cast<Eigen::Index>(dimension(system));
  if (system == System::SingleExciton) {
    Matrix c = Matrix::Zero(n, 2);
    c(single::Eminus, 0) = 1.0;
    c(single::Eplus, 1) = 1.0;
    return c;
  }
  Matrix c = Matrix::Zero(n, 3);
  c(two::E0Eplus, 0) = 1.0;
  c(two::EplusE0, 1) = 1.0;
  c(two::EplusEplus, 2) = 1.0;
  return c;
}

Matrix null_space(const HermitianOperator& h, std::size_t expected_dim) {
  const auto es = eigensystem(h);
  const real largest = es.values.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (largest == 0.0 || std::abs(es.values(i)) < null_rel_tol * largest) idx.push_back(i);
  }
  if (idx.size() != expected_dim) {
    throw PreconditionError("degeneracy crossing: dark dimension " + std::to_string(idx.size()) +
                            ", expected " + std::to_string(expected_dim));
  }
  Matrix out(es.vectors.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = es.vectors.col(idx[j]);
  }
  return out;
}

std::vector<DarkFrame> dark_frames(const LoopSchedule& schedule,
                                   const HamiltonianBuilder& builder) {
  const auto expected = expected_dark_dimension(schedule.system());
  const auto& samples = schedule.samples();
  std::vector<DarkFrame> frames;
  frames.reserve(samples.size());
  Matrix previous = computational_dark_basis(schedule.system());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    Matrix raw;
    try {
      raw = null_space(builder(samples[k].cp), expected);
    } catch (const PreconditionError& e) {
      throw PreconditionError(std::string(e.what()) + " at sample " + std::to_string(k));
    }
    const Matrix overlap = previous.adjoint() * raw;
    if (min_singular_value(overlap) < min_overlap_singular_value) {
      throw PreconditionError(k == 0 ? "loop start dark space differs from the computational basis"
                                     : "sampling too coarse at sample " + std::to_string(k));
    }
    Matrix aligned = raw * polar_unitary(overlap).adjoint();
    frames.push_back({k, aligned});
    previous = std::move(aligned);
  }
  return frames;
}

std::vector<DarkFrame> dark_frames(const LoopSchedule& schedule) {
  return dark_frames(schedule, schedule.builder());
}

HolonomyResult wilson_line(std::span<const DarkFrame> frames) {
  if (frames.empty()) throw PreconditionError("no dark frames");
  const Matrix& first = frames.front().frame;
  const Matrix& last = frames.back().frame;
  if (first.cols() != last.cols() ||
      max_abs(first * first.adjoint() - last * last.adjoint()) > closure_tol) {
    throw PreconditionError("non-closed path: end dark space differs from the start");
  }
  const Matrix full = polar_unitary(transport(frames, 1));
  real cauchy = 0.0;
  if (frames.size() >= 3) cauchy = max_abs(full - transport(frames, 2));
  HolonomyResult result{UnitaryOperator(full), unitarity_defect(full), frames.size() - 1, cauchy};
  return result;
}

real solid_angle(std::span<const SphereAngles> path) {
  if (path.size() < 2) return 0.0;
  const Eigen::Vector3d north(0.0, 0.0, 1.0);
  if ((unit_vector(path.front()) - unit_vector(path.back())).norm() > 1e-9) {
    throw PreconditionError("open path: solid angle needs a closed loop");
  }
  real total = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto a = unit_vector(path[k]);
    const auto b = unit_vector(path[k + 1]);
    const real num = north.dot(a.cross(b));
    const real den = 1.0 + north.dot(a) + north.dot(b) + a.dot(b);
    total += 2.0 * std::atan2(num, den);
  }
  return total;
}

UnitaryOperator predicted_gate(GateKind kind, real phase) {
  Matrix u(2, 2);
  switch (kind) {
    case GateKind::Gate1:
      u << 1.0, 0.0, 0.0, std::exp(I * phase);
      break;
    case GateKind::Gate2: {
      const real c = std::cos(phase), s = std::sin(phase);
      // cos(phase) 1 + i sin(phase) sigma_y, sigma_y = [[0, -i], [i, 0]]
      u << c, s, -s, c;
      break;
    }
    case GateKind::TwoQubit:
      throw PreconditionError("no analytic single-qubit prediction for the two-qubit loop");
  }
  return UnitaryOperator(std::move(u));
}

real relative_phase(const Matrix& u) { return std::arg(u(1, 1) / u(0, 0)); }

real rotation_angle(const Matrix& u) {
  const real half_trace = std::clamp(0.5 * u.trace().real(), -1.0, 1.0);
  return std::acos(half_trace);
}

real distance_mod_phase(const Matrix& a, const Matrix& b) {
  const cplx t = (b.adjoint() * a).trace();
  const cplx phase = std::abs(t) > 0.0 ? t / std::abs(t) : cplx(1.0);
  return max_abs(a - phase * b);
}

nlohmann::ordered_json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({round_significant(m(i, j).real()), round_significant(m(i, j).imag())});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json to_json(const HolonomyResult& r) {
  nlohmann::ordered_json j;
  j["dimension"] = r.unitary.dim();
  j["unitary"] = matrix_to_json(r.unitary.matrix());
  j["unitarity_defect"] = round_significant(r.unitarity_defect);
  j["step_count"] = r.step_count;
  j["cauchy_estimate"] = round_significant(r.cauchy_estimate);
  return j;
}

}  // namespace hqc
