#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>

#include "state.hpp"

namespace unravel {

constexpr double kPropagatorTol = 1e-10;

inline ComplexMatrix total_hamiltonian(const SplitHamiltonian& H) {
  ComplexMatrix total = H.interaction;
  for (int b = 0; b < H.dim; ++b) {
    total(b, b) += H.free_energies(b);
  }
  return total;
}

// Eigendecomposition of the full Hermitian Hamiltonian; the exact reference
// dynamics is unitary conjugation with U(t) = V exp(-i lambda t / hbar) V^dag.
struct ExactPropagator {
  int dim = 0;
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
  double hbar = 1.0;
};

inline ExactPropagator build_propagator(const SplitHamiltonian& H) {
  const ComplexMatrix total = total_hamiltonian(H);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(total);
  if (solver.info() != Eigen::Success) {
    throw EigenFailure("eigendecomposition did not converge");
  }
  const RealVector lambda = solver.eigenvalues();
  const ComplexMatrix v = solver.eigenvectors();

  const double hnorm = total.norm();
  const double residual =
      (v * lambda.asDiagonal().toDenseMatrix().cast<Complex>() * v.adjoint() -
       total)
          .norm();
  if (residual > kPropagatorTol * std::max(hnorm, 1e-300)) {
    throw EigenFailure("eigendecomposition residual " +
                       std::to_string(residual) + " exceeds tolerance");
  }
  const double unitarity =
      (v.adjoint() * v - ComplexMatrix::Identity(H.dim, H.dim)).norm();
  if (unitarity > kPropagatorTol) {
    throw EigenFailure("eigenvector matrix is not unitary, residual " +
                       std::to_string(unitarity));
  }
  return ExactPropagator{H.dim, lambda, v, H.hbar};
}

// U(t) op U(t)^dag for an arbitrary operator; used on density matrices and,
// in tests, on raw dyads.
inline ComplexMatrix evolve_operator(const ExactPropagator& p,
                                     const ComplexMatrix& op, double t) {
  ComplexVector phases(p.dim);
  for (int k = 0; k < p.dim; ++k) {
    phases(k) = std::polar(1.0, -p.eigenvalues(k) * t / p.hbar);
  }
  const ComplexMatrix u = p.eigenvectors * phases.asDiagonal() *
                          p.eigenvectors.adjoint();
  return u * op * u.adjoint();
}

// Checks the exact-density invariants: Hermitian, unit trace, PSD.
inline void validate_exact_density(const ComplexMatrix& rho) {
  const double scale = std::max(rho.norm(), 1e-300);
  if ((rho - rho.adjoint().eval()).norm() > kHermitianTol * scale) {
    throw InvalidDensityMatrix("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > kDensityTraceTol) {
    throw InvalidDensityMatrix("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho);
  if (solver.info() != Eigen::Success) {
    throw InvalidDensityMatrix("density matrix eigenvalues unavailable");
  }
  if (solver.eigenvalues().minCoeff() < -kDensityPsdTol) {
    throw InvalidDensityMatrix("density matrix has eigenvalue " +
                               std::to_string(solver.eigenvalues().minCoeff()));
  }
}

// rho_t = U rho_0 U^dag. Trace, Hermiticity, and spectrum are preserved up to
// the factorization tolerance.
inline DensityMatrix propagate(const ExactPropagator& p,
                               const DensityMatrix& rho0, double t) {
  if (rho0.dim() != p.dim) {
    throw DimensionMismatch("density matrix dim " + std::to_string(rho0.dim()) +
                            " does not match propagator dim " +
                            std::to_string(p.dim));
  }
  validate_exact_density(rho0.entries);
  return DensityMatrix{evolve_operator(p, rho0.entries, t), DensityKind::Exact};
}

inline double frobenius_distance(const DensityMatrix& a,
                                 const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("cannot compare " + std::to_string(a.dim()) +
                            "- and " + std::to_string(b.dim()) +
                            "-dimensional matrices");
  }
  return (a.entries - b.entries).norm();
}

enum class EigencheckStatus { Eigenvalue, CommutesWithoutEigenvalue, DoesNotCommute };

struct EigencheckResult {
  EigencheckStatus status = EigencheckStatus::DoesNotCommute;
  double value = 0.0;  // meaningful only when status == Eigenvalue

  std::optional<double> eigenvalue() const {
    if (status == EigencheckStatus::Eigenvalue) return value;
    return std::nullopt;
  }
};

// Generalized-eigenstate test: rho commutes with A, and A rho = a rho with
// a = tr(A rho) / tr(rho). The candidate eigenvalue comes from the trace
// rather than a single matrix entry, so zero entries cannot spoil it.
inline EigencheckResult eigencheck(const DensityMatrix& rho,
                                   const ComplexMatrix& A, double tol = 1e-9) {
  if (A.rows() != rho.dim() || A.cols() != rho.dim()) {
    throw DimensionMismatch("observable dimension mismatch");
  }
  if ((A - A.adjoint().eval()).norm() >
      kHermitianTol * std::max(A.norm(), 1e-300)) {
    throw NonHermitianObservable("observable is not Hermitian");
  }
  const ComplexMatrix& r = rho.entries;
  const double commutator = (A * r - r * A).norm();
  if (commutator > tol * A.norm() * r.norm()) {
    return {EigencheckStatus::DoesNotCommute, 0.0};
  }
  const double a = (A * r).trace().real() / r.trace().real();
  if ((A * r - a * r).norm() > tol) {
    return {EigencheckStatus::CommutesWithoutEigenvalue, 0.0};
  }
  return {EigencheckStatus::Eigenvalue, a};
}

}  // namespace unravel
