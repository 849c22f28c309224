#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace unravel;

namespace {

// random valid density matrix: normalized Gram matrix, PSD by construction
DensityMatrix random_density(int dim, RngStream& rng) {
  ComplexMatrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    }
  }
  ComplexMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix{rho, DensityKind::Exact};
}

RealVector sorted_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> s(m);
  return s.eigenvalues();
}

}  // namespace

TEST_CASE("build_propagator of a diagonal hamiltonian") {
  RealVector eps(3);
  eps << -1.0, 0.5, 2.0;
  const auto H = validate_hamiltonian(3, eps, ComplexMatrix::Zero(3, 3));
  const ExactPropagator p = build_propagator(H);
  RealVector expected = eps;
  std::sort(expected.data(), expected.data() + 3);
  CHECK((p.eigenvalues - expected).norm() < 1e-12);
  // with distinct diagonal entries each eigenvector is a basis vector up to phase
  for (int k = 0; k < 3; ++k) {
    int big = 0;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(p.eigenvectors(i, k)) > 0.5) ++big;
    }
    CHECK(big == 1);
  }
}

TEST_CASE("build_propagator eigenvalues of the coupled presets") {
  SECTION("two-level, resonant") {
    const ExactPropagator p = build_propagator(two_level(0.0, 1.0).hamiltonian);
    CHECK(p.eigenvalues(0) == Catch::Approx(-1.0).margin(1e-12));
    CHECK(p.eigenvalues(1) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("three-level decay") {
    const double g = 0.7;
    const ExactPropagator p =
        build_propagator(epr_decay(0.0, 0.0, g).hamiltonian);
    CHECK(p.eigenvalues(0) == Catch::Approx(-g * std::sqrt(2.0)).margin(1e-12));
    CHECK(p.eigenvalues(1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(p.eigenvalues(2) == Catch::Approx(g * std::sqrt(2.0)).margin(1e-12));
  }
}

TEST_CASE("propagate at t = 0 is the identity") {
  RngStream rng(13);
  const auto H = random_hermitian(3, 5).hamiltonian;
  const ExactPropagator p = build_propagator(H);
  const DensityMatrix rho0 = random_density(3, rng);
  CHECK(frobenius_distance(propagate(p, rho0, 0.0), rho0) < 1e-12);
}

TEST_CASE("commuting initial states are stationary") {
  RealVector eps(2);
  eps << 0.4, 1.3;
  const auto H = validate_hamiltonian(2, eps, ComplexMatrix::Zero(2, 2));
  const ExactPropagator p = build_propagator(H);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 0.25;
  d(1, 1) = 0.75;
  const DensityMatrix rho0{d, DensityKind::Exact};
  CHECK(frobenius_distance(propagate(p, rho0, 3.1), rho0) < 1e-12);
}

TEST_CASE("resonant half oscillation maps E00 to E11") {
  const ExactPropagator p = build_propagator(two_level(0.0, 1.0).hamiltonian);
  ComplexMatrix e00 = ComplexMatrix::Zero(2, 2);
  e00(0, 0) = 1.0;
  const DensityMatrix rho =
      propagate(p, DensityMatrix{e00, DensityKind::Exact}, std::acos(-1.0) / 2.0);
  ComplexMatrix e11 = ComplexMatrix::Zero(2, 2);
  e11(1, 1) = 1.0;
  CHECK((rho.entries - e11).norm() < 1e-10);
}

TEST_CASE("propagate preserves trace, hermiticity and spectrum") {
  RngStream rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform() * 3.0);
    const auto H = random_hermitian(dim, 100 + trial).hamiltonian;
    const ExactPropagator p = build_propagator(H);
    const DensityMatrix rho0 = random_density(dim, rng);
    const DensityMatrix rho = propagate(p, rho0, 0.9);
    CHECK(std::abs(rho.entries.trace() - Complex(1.0)) < 1e-10);
    CHECK((rho.entries - rho.entries.adjoint().eval()).norm() < 1e-10);
    CHECK((sorted_eigenvalues(rho.entries) - sorted_eigenvalues(rho0.entries))
              .norm() < 1e-10);
  }
}

TEST_CASE("propagate satisfies the group property") {
  RngStream rng(29);
  const auto H = random_hermitian(3, 77).hamiltonian;
  const ExactPropagator p = build_propagator(H);
  const DensityMatrix rho0 = random_density(3, rng);
  const DensityMatrix once = propagate(p, rho0, 0.7 + 1.1);
  const DensityMatrix twice = propagate(p, propagate(p, rho0, 0.7), 1.1);
  CHECK(frobenius_distance(once, twice) < 1e-10);
}

TEST_CASE("centered difference matches the equation of motion at O(h^2)") {
  RngStream rng(37);
  const auto H = random_hermitian(3, 55).hamiltonian;
  const ExactPropagator p = build_propagator(H);
  const DensityMatrix rho0 = random_density(3, rng);
  const double t = 0.6;
  const ComplexMatrix rho_t = propagate(p, rho0, t).entries;
  const ComplexMatrix total = total_hamiltonian(H);
  const ComplexMatrix rhs =
      Complex(0.0, -1.0 / H.hbar) * (total * rho_t - rho_t * total);

  auto residual = [&](double h) {
    const ComplexMatrix plus = propagate(p, rho0, t + h).entries;
    const ComplexMatrix minus = propagate(p, rho0, t - h).entries;
    return ((plus - minus) / (2.0 * h) - rhs).norm();
  };
  const double r1 = residual(0.02);
  const double r2 = residual(0.01);
  CHECK(r1 / r2 >= 3.5);
}

TEST_CASE("frobenius_distance") {
  ComplexMatrix e00 = ComplexMatrix::Zero(2, 2);
  e00(0, 0) = 1.0;
  ComplexMatrix e11 = ComplexMatrix::Zero(2, 2);
  e11(1, 1) = 1.0;
  const DensityMatrix a{e00, DensityKind::Exact};
  const DensityMatrix b{e11, DensityKind::Exact};
  CHECK(frobenius_distance(a, a) == 0.0);
  CHECK(frobenius_distance(a, b) == Catch::Approx(std::sqrt(2.0)).margin(1e-15));

  RngStream rng(43);
  const DensityMatrix x = random_density(3, rng);
  const DensityMatrix y = random_density(3, rng);
  double hand = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      hand += std::norm(x.entries(i, j) - y.entries(i, j));
    }
  }
  CHECK(frobenius_distance(x, y) == Catch::Approx(std::sqrt(hand)).margin(1e-14));

  const DensityMatrix z{ComplexMatrix::Zero(4, 4), DensityKind::Exact};
  CHECK_THROWS_AS(frobenius_distance(a, z), DimensionMismatch);
}

TEST_CASE("eigencheck classifies the three cases") {
  ComplexMatrix a2 = ComplexMatrix::Zero(2, 2);
  a2(0, 0) = 2.0;
  a2(1, 1) = 5.0;

  SECTION("eigenprojector") {
    ComplexMatrix e00 = ComplexMatrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    const auto res = eigencheck(DensityMatrix{e00, DensityKind::Exact}, a2);
    REQUIRE(res.status == EigencheckStatus::Eigenvalue);
    CHECK(res.value == Catch::Approx(2.0).margin(1e-12));
    CHECK(res.eigenvalue().has_value());
  }
  SECTION("commuting mixture of distinct eigenvalues") {
    ComplexMatrix mix = ComplexMatrix::Zero(2, 2);
    mix(0, 0) = 0.5;
    mix(1, 1) = 0.5;
    const auto res = eigencheck(DensityMatrix{mix, DensityKind::Exact}, a2);
    CHECK(res.status == EigencheckStatus::CommutesWithoutEigenvalue);
    CHECK(!res.eigenvalue().has_value());
  }
  SECTION("the recovered rank-1 state is a +1 eigenstate of the flip") {
    ComplexMatrix half = ComplexMatrix::Constant(2, 2, Complex(0.5));
    ComplexMatrix flip(2, 2);
    flip << 0.0, 1.0, 1.0, 0.0;
    const auto res = eigencheck(DensityMatrix{half, DensityKind::Exact}, flip);
    REQUIRE(res.status == EigencheckStatus::Eigenvalue);
    CHECK(res.value == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("non-commuting observable") {
    ComplexMatrix e00 = ComplexMatrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    ComplexMatrix flip(2, 2);
    flip << 0.0, 1.0, 1.0, 0.0;
    const auto res = eigencheck(DensityMatrix{e00, DensityKind::Exact}, flip);
    CHECK(res.status == EigencheckStatus::DoesNotCommute);
  }
  SECTION("non-Hermitian observable is rejected") {
    ComplexMatrix bad(2, 2);
    bad << 0.0, 1.0, 0.0, 0.0;
    ComplexMatrix e00 = ComplexMatrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    CHECK_THROWS_AS(eigencheck(DensityMatrix{e00, DensityKind::Exact}, bad),
                    NonHermitianObservable);
  }
}

TEST_CASE("propagate rejects invalid inputs") {
  const ExactPropagator p = build_propagator(two_level(0.0, 1.0).hamiltonian);

  ComplexMatrix not_normalized = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(
      propagate(p, DensityMatrix{not_normalized, DensityKind::Exact}, 1.0),
      InvalidDensityMatrix);

  ComplexMatrix not_hermitian(2, 2);
  not_hermitian << 0.5, 1.0, 0.0, 0.5;
  CHECK_THROWS_AS(
      propagate(p, DensityMatrix{not_hermitian, DensityKind::Exact}, 1.0),
      InvalidDensityMatrix);

  ComplexMatrix not_psd(2, 2);
  not_psd << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(propagate(p, DensityMatrix{not_psd, DensityKind::Exact}, 1.0),
                  InvalidDensityMatrix);

  CHECK_THROWS_AS(
      propagate(p, DensityMatrix{ComplexMatrix::Zero(3, 3), DensityKind::Exact},
                1.0),
      DimensionMismatch);
}
