#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include "rng.hpp"
#include "state.hpp"

namespace unravel {

constexpr double kInitialNormTol = 1e-12;

// Initial-state specification: a single basis vector, a normalized pure
// state given by amplitudes, or a convex mixture of pure states.
struct BasisPure {
  int index = 0;
};

struct PureAmplitudes {
  ComplexVector amplitudes;
};

struct MixtureBranch {
  double weight = 0.0;
  PureAmplitudes state;
};

struct Mixture {
  std::vector<MixtureBranch> branches;
};

using InitialSpec = std::variant<BasisPure, PureAmplitudes, Mixture>;

namespace detail {

inline void check_pure(const ComplexVector& a, int dim) {
  if (a.size() != dim) {
    throw DimensionMismatch("pure state has " + std::to_string(a.size()) +
                            " amplitudes, expected " + std::to_string(dim));
  }
  const double norm2 = a.squaredNorm();
  if (std::abs(norm2 - 1.0) > kInitialNormTol) {
    throw InvalidInitialSpec("pure state is not normalized: sum |a_i|^2 = " +
                             std::to_string(norm2));
  }
}

}  // namespace detail

inline void validate_initial(const InitialSpec& spec, int dim) {
  if (const auto* b = std::get_if<BasisPure>(&spec)) {
    if (b->index < 0 || b->index >= dim) {
      throw InvalidInitialSpec("basis index " + std::to_string(b->index) +
                               " out of range for dim " + std::to_string(dim));
    }
  } else if (const auto* p = std::get_if<PureAmplitudes>(&spec)) {
    detail::check_pure(p->amplitudes, dim);
  } else {
    const auto& mix = std::get<Mixture>(spec);
    if (mix.branches.empty()) {
      throw InvalidInitialSpec("mixture has no branches");
    }
    double total = 0.0;
    for (const auto& br : mix.branches) {
      if (br.weight < 0.0) {
        throw InvalidInitialSpec("mixture weight is negative");
      }
      detail::check_pure(br.state.amplitudes, dim);
      total += br.weight;
    }
    if (std::abs(total - 1.0) > kInitialNormTol) {
      throw InvalidInitialSpec("mixture weights sum to " +
                               std::to_string(total));
    }
  }
}

// The target rho_0 the sampled dyads must reproduce in expectation.
inline ComplexMatrix initial_density(const InitialSpec& spec, int dim) {
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  if (const auto* b = std::get_if<BasisPure>(&spec)) {
    rho(b->index, b->index) = 1.0;
  } else if (const auto* p = std::get_if<PureAmplitudes>(&spec)) {
    rho = p->amplitudes * p->amplitudes.adjoint();
  } else {
    for (const auto& br : std::get<Mixture>(spec).branches) {
      rho += br.weight * (br.state.amplitudes * br.state.amplitudes.adjoint());
    }
  }
  return rho;
}

// Draws index i with probability p_i = |a_i| / sum_k |a_k| and returns
// BasisState(i, a_i / p_i), so E[prefactor * e_i] = a exactly and the
// prefactor magnitude is the outcome-independent constant sum_k |a_k|.
inline BasisState sample_pure_vector(const ComplexVector& a, RngStream& rng) {
  const RealVector mags = a.cwiseAbs();
  const double total = mags.sum();
  if (total == 0.0) {
    throw AllZeroAmplitudes("cannot sample a state with all-zero amplitudes");
  }
  const int i = rng.pick(std::span<const double>(mags.data(),
                                                 static_cast<std::size_t>(mags.size())),
                         total);
  const double p = mags(i) / total;
  return BasisState{i, a(i) / p};
}

// Samples the initial (phi, psi) pair. For mixtures one branch is drawn and
// shared by both sides; phi and psi are then sampled independently, so
// E[phi psi^dagger] = rho_0 as a finite-outcome expectation.
inline std::pair<BasisState, BasisState> sample_initial_pair(
    const InitialSpec& spec, RngStream& rng) {
  if (const auto* b = std::get_if<BasisPure>(&spec)) {
    return {BasisState{b->index, 1.0}, BasisState{b->index, 1.0}};
  }
  if (const auto* p = std::get_if<PureAmplitudes>(&spec)) {
    BasisState phi = sample_pure_vector(p->amplitudes, rng);
    BasisState psi = sample_pure_vector(p->amplitudes, rng);
    return {phi, psi};
  }
  const auto& mix = std::get<Mixture>(spec);
  std::vector<double> weights;
  weights.reserve(mix.branches.size());
  double total = 0.0;
  for (const auto& br : mix.branches) {
    weights.push_back(br.weight);
    total += br.weight;
  }
  const int k = rng.pick(weights, total);
  BasisState phi = sample_pure_vector(mix.branches[k].state.amplitudes, rng);
  BasisState psi = sample_pure_vector(mix.branches[k].state.amplitudes, rng);
  return {phi, psi};
}

// One point of the finite initial-outcome space.
struct InitialOutcome {
  double probability = 0.0;
  BasisState phi;
  BasisState psi;
};

// Deterministic enumeration of every (branch, phi, psi) outcome with its
// probability. Sum over outcomes of probability * dyad equals rho_0 exactly.
inline std::vector<InitialOutcome> enumerate_initial_outcomes(
    const InitialSpec& spec, int dim) {
  validate_initial(spec, dim);

  std::vector<InitialOutcome> outcomes;
  auto add_pure = [&outcomes](const ComplexVector& a, double branch_weight) {
    const RealVector mags = a.cwiseAbs();
    const double total = mags.sum();
    if (total == 0.0) {
      throw AllZeroAmplitudes("cannot enumerate a state with all-zero amplitudes");
    }
    for (int i = 0; i < a.size(); ++i) {
      if (mags(i) == 0.0) continue;
      const double pi = mags(i) / total;
      for (int j = 0; j < a.size(); ++j) {
        if (mags(j) == 0.0) continue;
        const double pj = mags(j) / total;
        outcomes.push_back({branch_weight * pi * pj,
                            BasisState{i, a(i) / pi},
                            BasisState{j, a(j) / pj}});
      }
    }
  };

  if (const auto* b = std::get_if<BasisPure>(&spec)) {
    outcomes.push_back({1.0, BasisState{b->index, 1.0}, BasisState{b->index, 1.0}});
  } else if (const auto* p = std::get_if<PureAmplitudes>(&spec)) {
    add_pure(p->amplitudes, 1.0);
  } else {
    for (const auto& br : std::get<Mixture>(spec).branches) {
      if (br.weight == 0.0) continue;
      add_pure(br.state.amplitudes, br.weight);
    }
  }
  return outcomes;
}

}  // namespace unravel
