#pragma once

#include <string>
#include <vector>

#include "initial.hpp"
#include "rng.hpp"
#include "state.hpp"

namespace unravel {

// A named, ready-to-run model: validated Hamiltonian, default initial state,
// and human-readable basis labels for output.
struct ModelPreset {
  std::string name;
  SplitHamiltonian hamiltonian;
  InitialSpec default_initial;
  std::vector<std::string> basis_labels;
  std::string notes;
};

// Two-level system with detuning eps and coupling delta:
// free energies (0, eps), interaction delta * sigma_x.
inline ModelPreset two_level(double eps, double delta) {
  RealVector free(2);
  free << 0.0, eps;
  ComplexMatrix h = ComplexMatrix::Zero(2, 2);
  h(0, 1) = delta;
  h(1, 0) = delta;
  return ModelPreset{"two-level",
                     validate_hamiltonian(2, free, h),
                     BasisPure{0},
                     {"0", "1"},
                     "minimal coupled system"};
}

// Single-collision idealization of the photonic EPR experiment: an excitation
// (basis 0) decays into a pair of left- or right-circular photons (basis 1
// and 2) with real coupling g. The default initial state is the excitation
// itself, never a superposition.
inline ModelPreset epr_decay(double eps_e, double eps_p, double g) {
  RealVector free(3);
  free << eps_e, eps_p, eps_p;
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  h(1, 0) = g;
  h(0, 1) = g;
  h(2, 0) = g;
  h(0, 2) = g;
  return ModelPreset{"epr-decay",
                     validate_hamiltonian(3, free, h),
                     BasisPure{0},
                     {"Ca-excitation", "LL photon pair", "RR photon pair"},
                     "excitation decaying into polarization pair states"};
}

// Seeded random model for fuzzing estimator-vs-oracle agreement. Hermitian by
// construction: H_int = int_scale * (M + M^dagger)/2 with M uniform complex.
inline ModelPreset random_hermitian(int dim, std::uint64_t seed,
                                    double free_scale = 1.0,
                                    double int_scale = 1.0) {
  if (dim < 1) {
    throw DimensionMismatch("random_hermitian needs dim >= 1");
  }
  RngStream rng(splitmix64(seed));
  RealVector free(dim);
  for (int i = 0; i < dim; ++i) {
    free(i) = free_scale * (2.0 * rng.uniform() - 1.0);
  }
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m(i, j) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    }
  }
  ComplexMatrix h = 0.5 * int_scale * (m + m.adjoint());
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i) labels.push_back(std::to_string(i));
  return ModelPreset{"random",
                     validate_hamiltonian(dim, free, h),
                     BasisPure{0},
                     labels,
                     "seeded random Hermitian model"};
}

}  // namespace unravel
