#include <doctest.h>

#include "hqc/hamiltonians.hpp"
#include "oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>

using namespace hqc;

TEST_CASE("inner products of basis kets") {
  const auto ep = StateVector::basis_state(System::SingleExciton, "Eplus");
  const auto em = StateVector::basis_state(System::SingleExciton, "Eminus");
  CHECK(inner_product(ep, ep) == cplx(1.0));
  CHECK(inner_product(ep, em) == cplx(0.0));
}

TEST_CASE("inner product is conjugate-linear in the first argument") {
  Vector a = Vector::Zero(4);
  a(single::Eplus) = 1.0 / std::sqrt(2.0);
  a(single::E0) = I / std::sqrt(2.0);
  const StateVector psi(System::SingleExciton, a);
  const auto phi = StateVector::basis_state(System::SingleExciton, "E0");
  const cplx got = inner_product(psi, phi);
  CHECK(std::abs(got - cplx(0.0, -1.0 / std::sqrt(2.0))) < 1e-15);
}

TEST_CASE("inner product rejects mismatched bases") {
  const auto a = StateVector::basis_state(System::SingleExciton, 0);
  const auto b = StateVector::basis_state(System::TwoExciton, 0);
  CHECK_THROWS_AS(inner_product(a, b), PreconditionError);
}

TEST_CASE("basis order is fixed") {
  const auto s = basis_labels(System::SingleExciton);
  REQUIRE(s.size() == 4);
  CHECK(s[0] == "G");
  CHECK(s[1] == "Eminus");
  CHECK(s[2] == "Eplus");
  CHECK(s[3] == "E0");
  const auto t = basis_labels(System::TwoExciton);
  REQUIRE(t.size() == 5);
  CHECK(t[0] == "GG");
  CHECK(t[4] == "EplusEplus");
  CHECK(basis_index(System::TwoExciton, "EplusE0") == two::EplusE0);
  CHECK_THROWS_AS(basis_index(System::SingleExciton, "GG"), PreconditionError);
}

TEST_CASE("state vectors must be normalized") {
  Vector v = Vector::Zero(4);
  v(0) = 1.0 + 1e-7;
  CHECK_THROWS_AS(StateVector(System::SingleExciton, v), PreconditionError);
  v(0) = 1.0 + 1e-10;
  CHECK_NOTHROW(StateVector(System::SingleExciton, v));
  CHECK_THROWS_AS(StateVector(System::SingleExciton, Vector::Zero(5)), PreconditionError);
}

TEST_CASE("inner_product(a, a) equals the squared norm for random states") {
  std::mt19937_64 rng(11);
  std::normal_distribution<real> g;
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(5);
    for (int i = 0; i < 5; ++i) v(i) = cplx(g(rng), g(rng));
    v.normalize();
    const StateVector a(System::TwoExciton, v);
    const cplx n = inner_product(a, a);
    CHECK(std::abs(n.imag()) <= 1e-12);
    CHECK(n.real() >= 0.0);
    CHECK(std::abs(n.real() - a.squared_norm()) <= 1e-12);

    Vector w(5);
    for (int i = 0; i < 5; ++i) w(i) = cplx(g(rng), g(rng));
    w.normalize();
    const StateVector b(System::TwoExciton, w);
    CHECK(std::abs(inner_product(a, b)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("hermiticity is enforced") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator{m}, PreconditionError);
  CHECK_THROWS_AS(eigensystem(m), PreconditionError);
  m(1, 0) = 1.0;
  CHECK_NOTHROW(HermitianOperator{m});
}

TEST_CASE("eigensystem of trivial operators") {
  const auto zero = eigensystem(HermitianOperator::zero(4));
  CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);

  Matrix d = Matrix::Zero(4, 4);
  d.diagonal() << 4.0, 2.0, 3.0, 1.0;
  const auto es = eigensystem(d);
  for (int i = 0; i < 4; ++i) CHECK(es.values(i) == doctest::Approx(i + 1.0));
}

TEST_CASE("eigensystem of the resonant single-exciton coupling") {
  ControlPoint cp;
  cp.omega_zero = 0.02;
  const auto h = build_single(cp);
  const auto es = eigensystem(h);
  const real expected[] = {-0.02, 0.0, 0.0, 0.02};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(es.values(i) - expected[i]) < 1e-15);
    // independent check: the characteristic polynomial vanishes there
    CHECK(oracle::char_poly(h.matrix(), expected[i]) < 1e-12);
  }
}

TEST_CASE("eigensystem residuals, orthonormality and reconstruction") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    for (Eigen::Index n : {4, 5}) {
      const Matrix h = oracle::random_hermitian(rng, n);
      const auto es = eigensystem(h);
      const real norm = h.norm();
      for (Eigen::Index i = 1; i < n; ++i) CHECK(es.values(i) >= es.values(i - 1));
      for (Eigen::Index i = 0; i < n; ++i) {
        const real residual = (h * es.vectors.col(i) - es.values(i) * es.vectors.col(i)).norm();
        CHECK(residual <= 1e-10 * norm);
      }
      CHECK(max_abs(es.vectors.adjoint() * es.vectors - Matrix::Identity(n, n)) <= 1e-10);
      const Matrix rebuilt = es.vectors * es.values.cast<cplx>().asDiagonal() * es.vectors.adjoint();
      CHECK(max_abs(rebuilt - h) <= 1e-9 * max_abs(h));
    }
  }
}

TEST_CASE("unitary operators and polar factors") {
  std::mt19937_64 rng(3);
  const Matrix h = oracle::random_hermitian(rng, 3);
  const Matrix u = (I * h).exp();
  CHECK_NOTHROW(UnitaryOperator{u});
  CHECK_THROWS_AS(UnitaryOperator{Matrix(2.0 * u)}, PreconditionError);
  // The polar factor of u * P, P positive definite, is u.
  const Matrix p = Matrix::Identity(3, 3) + 0.1 * oracle::random_hermitian(rng, 3);
  CHECK(max_abs(polar_unitary(u * p) - u) < 1e-12);
}

TEST_CASE("unit conversion") {
  CHECK(meV_to_rad_per_fs(5.0) == doctest::Approx(7.5964e-3).epsilon(1e-4));
  CHECK(rad_per_fs_to_meV(meV_to_rad_per_fs(1.25)) == doctest::Approx(1.25));
}
