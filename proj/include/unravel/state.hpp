#pragma once

#include <Eigen/Dense>
#include <complex>
#include <sstream>
#include <utility>

#include "errors.hpp"

namespace unravel {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

constexpr double kHermitianTol = 1e-12;   // relative to max |h|
constexpr double kDensityTraceTol = 1e-12;
constexpr double kDensityPsdTol = 1e-10;

// Hamiltonian split into a diagonal free part (basis energies) and a
// Hermitian interaction matrix, both expressed in the distinguished basis.
// interaction(bp, b) = <bp|H_int|b>. Immutable after validation.
struct SplitHamiltonian {
  int dim = 0;
  RealVector free_energies;
  ComplexMatrix interaction;
  double hbar = 1.0;

  bool zero_interaction() const { return interaction.isZero(0.0); }
};

// Validates and assembles a SplitHamiltonian. Never symmetrizes: a
// non-Hermitian interaction is an error, reported with the worst entry pair.
inline SplitHamiltonian validate_hamiltonian(int dim, RealVector free_energies,
                                             ComplexMatrix interaction,
                                             double hbar = 1.0) {
  if (dim < 1) {
    throw DimensionMismatch("dim must be >= 1, got " + std::to_string(dim));
  }
  if (free_energies.size() != dim) {
    throw DimensionMismatch("free_energies has " +
                            std::to_string(free_energies.size()) +
                            " entries, expected " + std::to_string(dim));
  }
  if (interaction.rows() != dim || interaction.cols() != dim) {
    throw DimensionMismatch("interaction is " +
                            std::to_string(interaction.rows()) + "x" +
                            std::to_string(interaction.cols()) +
                            ", expected " + std::to_string(dim) + "x" +
                            std::to_string(dim));
  }
  if (!(hbar > 0.0)) {
    throw NonPositiveHbar("hbar must be positive, got " +
                          std::to_string(hbar));
  }

  const double scale = interaction.cwiseAbs().maxCoeff();
  double worst = 0.0;
  int wi = 0, wj = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      const double r = std::abs(interaction(i, j) - std::conj(interaction(j, i)));
      if (r > worst) {
        worst = r;
        wi = i;
        wj = j;
      }
    }
  }
  if (worst > kHermitianTol * scale) {
    std::ostringstream msg;
    msg << "interaction is not Hermitian: h(" << wi << "," << wj << ") = "
        << interaction(wi, wj) << " vs conj(h(" << wj << "," << wi
        << ")) = " << std::conj(interaction(wj, wi)) << ", residual " << worst;
    throw NonHermitianInteraction(msg.str());
  }

  return SplitHamiltonian{dim, std::move(free_energies), std::move(interaction),
                          hbar};
}

// N_b = sum_bp |h(bp, b)|, the normalization of the jump target distribution
// out of basis vector b. Zero exactly when column b vanishes.
inline RealVector column_absolute_sums(const SplitHamiltonian& H) {
  return H.interaction.cwiseAbs().colwise().sum().transpose();
}

// A scalar multiple of one distinguished basis vector. Superpositions are
// unrepresentable by construction.
struct BasisState {
  int index = 0;
  Complex prefactor{0.0, 0.0};
};

// One trajectory snapshot: the (phi, psi) pair at time t, with the number of
// jump events that occurred up to t.
struct DyadSample {
  BasisState phi;
  BasisState psi;
  double t = 0.0;
  long jump_count = 0;
};

// Compressed trajectory state: all prefactors folded into one complex weight.
struct Triplet {
  Complex weight{0.0, 0.0};
  int phi_index = 0;
  int psi_index = 0;
};

enum class DensityKind { Exact, Estimated };

// Dense d x d density matrix. `kind` records whether the entries come from
// the exact propagator or from a Monte Carlo estimate; only exact matrices
// are held to the Hermitian/trace/PSD invariants deterministically.
struct DensityMatrix {
  ComplexMatrix entries;
  DensityKind kind = DensityKind::Exact;

  int dim() const { return static_cast<int>(entries.rows()); }
};

// Rank-1 contribution c_phi * conj(c_psi) * |b_phi><b_psi| of one sample.
// Exactly one entry can be nonzero.
inline ComplexMatrix dyad_to_matrix(const DyadSample& s, int dim) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(s.phi.index, s.psi.index) = s.phi.prefactor * std::conj(s.psi.prefactor);
  return m;
}

}  // namespace unravel
