#pragma once

// Independent reference computations for the unit and acceptance suites. None of
// these go through the library's eigensolver, dark-frame or Wilson-line code.

#include <cmath>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "hqc/control_loops.hpp"

namespace oracle {

using hqc::cplx;
using hqc::Matrix;
using hqc::real;
using hqc::Vector;

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n, real scale = 1.0) {
  std::normal_distribution<real> g(0.0, scale);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

inline hqc::ControlPoint random_control_point(std::mt19937_64& rng, bool with_minus = true) {
  std::uniform_real_distribution<real> u(-0.05, 0.05);
  hqc::ControlPoint cp;
  if (with_minus) cp.omega_minus = cplx(u(rng), u(rng));
  cp.omega_plus = cplx(u(rng), u(rng));
  cp.omega_zero = cplx(u(rng), u(rng));
  return cp;
}

// Kernel from full-pivot LU, relative threshold on the pivots.
inline Matrix lu_null_space(const Matrix& m, real threshold = 1e-10) {
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(threshold);
  return lu.kernel();
}

inline Eigen::Index lu_rank(const Matrix& m, real threshold = 1e-10) {
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(threshold);
  return lu.rank();
}

// |det(H - lambda)| normalised by the largest scale, zero at an eigenvalue.
inline real char_poly(const Matrix& h, real lambda) {
  const Matrix shifted = h - lambda * Matrix::Identity(h.rows(), h.cols());
  return std::abs(shifted.determinant());
}

// Orthogonal projector onto the column span of m (columns need not be orthonormal).
inline Matrix projector(const Matrix& m) {
  return m * (m.adjoint() * m).inverse() * m.adjoint();
}

// Oriented solid angle as the line integral of (1 - cos theta) dphi, trapezoid
// rule on the sampled (theta, phi) path.
inline real line_integral_solid_angle(std::span<const hqc::SphereAngles> path) {
  real total = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const real f0 = 1.0 - std::cos(path[k].theta);
    const real f1 = 1.0 - std::cos(path[k + 1].theta);
    total += 0.5 * (f0 + f1) * (path[k + 1].phi - path[k].phi);
  }
  return total;
}

// Resonant two-level Rabi problem H = -Omega (|E0><G| + h.c.), psi(0) = |G>.
// Amplitudes on (G, E0) at time t.
inline std::pair<cplx, cplx> rabi(real omega, real t) {
  return {cplx(std::cos(omega * t)), cplx(0.0, std::sin(omega * t))};
}

}  // namespace oracle
