#pragma once

// Test-only reference computations, kept independent of the library paths
// they check: direct enumerations of the jump law, closed-form solutions of
// the small models, and small matrix helpers.

#include <cmath>
#include <complex>
#include <vector>

#include <unravel/unravel.hpp>

namespace support {

using unravel::BasisState;
using unravel::Complex;
using unravel::ComplexMatrix;
using unravel::DyadSample;
using unravel::SplitHamiltonian;

inline ComplexMatrix unit_entry(int dim, int i, int j, Complex v = 1.0) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(i, j) = v;
  return m;
}

// Exact expectation of the dyad after one jump event, enumerated directly
// from the stated law: with probability 1/2 either side jumps; the target b'
// is drawn with probability |h(b',b)| / N_b and the prefactor is scaled by
// (-2i/(r hbar)) N_b h(b',b)/|h(b',b)| (conjugated through the bra on the
// psi side). A vanishing column gives the zero dyad.
inline ComplexMatrix one_event_expectation(const SplitHamiltonian& H,
                                           double rate, const DyadSample& s) {
  const int dim = H.dim;
  const Complex weight = s.phi.prefactor * std::conj(s.psi.prefactor);
  ComplexMatrix expectation = ComplexMatrix::Zero(dim, dim);

  auto column_sum = [&](int b) {
    double n = 0.0;
    for (int bp = 0; bp < dim; ++bp) n += std::abs(H.interaction(bp, b));
    return n;
  };

  // phi side
  {
    const int b = s.phi.index;
    const double n_b = column_sum(b);
    if (n_b > 0.0) {
      for (int bp = 0; bp < dim; ++bp) {
        const double mag = std::abs(H.interaction(bp, b));
        if (mag == 0.0) continue;
        const double prob = mag / n_b;
        const Complex factor = Complex(0.0, -2.0 / (rate * H.hbar)) * n_b *
                               (H.interaction(bp, b) / mag);
        expectation +=
            0.5 * prob * unit_entry(dim, bp, s.psi.index, weight * factor);
      }
    }
  }
  // psi side: the estimator carries conj(c_psi), so the factor conjugates
  {
    const int b = s.psi.index;
    const double n_b = column_sum(b);
    if (n_b > 0.0) {
      for (int bp = 0; bp < dim; ++bp) {
        const double mag = std::abs(H.interaction(bp, b));
        if (mag == 0.0) continue;
        const double prob = mag / n_b;
        const Complex factor = Complex(0.0, -2.0 / (rate * H.hbar)) * n_b *
                               (H.interaction(bp, b) / mag);
        expectation += 0.5 * prob *
                       unit_entry(dim, s.phi.index, bp,
                                  weight * std::conj(factor));
      }
    }
  }
  return expectation;
}

// r * (E[dyad'] - dyad), the jump part of the stochastic generator.
inline ComplexMatrix one_event_generator(const SplitHamiltonian& H,
                                         double rate, const DyadSample& s) {
  const ComplexMatrix dyad = unravel::dyad_to_matrix(s, H.dim);
  return rate * (one_event_expectation(H, rate, s) - dyad);
}

// -(i/hbar) [H_int, dyad] - r * dyad, the target the jump generator must hit.
inline ComplexMatrix commutator_target(const SplitHamiltonian& H, double rate,
                                       const DyadSample& s) {
  const ComplexMatrix dyad = unravel::dyad_to_matrix(s, H.dim);
  const ComplexMatrix comm =
      H.interaction * dyad - dyad * H.interaction;
  return Complex(0.0, -1.0 / H.hbar) * comm - rate * dyad;
}

// Closed-form population transfer 0 -> 1 of the two-level model with
// detuning eps and coupling delta (generalized Rabi formula), hbar = 1.
inline double rabi_population(double eps, double delta, double t) {
  const double omega = std::sqrt(delta * delta + 0.25 * eps * eps);
  if (omega == 0.0) return 0.0;
  const double s = std::sin(omega * t);
  return delta * delta / (omega * omega) * s * s;
}

// Closed-form survival of the excitation in the degenerate decay model:
// starting from basis 0 with couplings g to two pair states, hbar = 1.
inline double excitation_survival(double g, double t) {
  const double c = std::cos(std::sqrt(2.0) * g * t);
  return c * c;
}

}  // namespace support
