#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "jump_engine.hpp"
#include "state.hpp"

namespace unravel {

constexpr double kCompressPruneTol = 1e-15;  // relative to max bucket |weight|

// Triplet view of a dyad sample: the combined weight c_phi * conj(c_psi) is
// exactly the quantity entering the density estimator.
inline Triplet from_dyad(const DyadSample& s) {
  return Triplet{s.phi.prefactor * std::conj(s.psi.prefactor), s.phi.index,
                 s.psi.index};
}

inline Triplet evolve_free_triplet(const Triplet& tr, const SplitHamiltonian& H,
                                   double dt) {
  const double phase =
      -(H.free_energies(tr.phi_index) - H.free_energies(tr.psi_index)) * dt /
      H.hbar;
  return Triplet{tr.weight * std::polar(1.0, phase), tr.phi_index,
                 tr.psi_index};
}

namespace detail {

// Per-jump weight factor of the ket-side law for the column of basis `b`.
// Returns the new index through `target`; a dead column yields factor 0.
inline Complex jump_factor(const SplitHamiltonian& H, double rate, int b,
                           RngStream& rng, int& target) {
  std::vector<double> mags(static_cast<std::size_t>(H.dim));
  double n_b = 0.0;
  for (int bp = 0; bp < H.dim; ++bp) {
    mags[bp] = std::abs(H.interaction(bp, b));
    n_b += mags[bp];
  }
  if (n_b == 0.0) {
    target = b;
    return Complex(0.0, 0.0);
  }
  target = rng.pick(mags, n_b);
  const Complex phase = H.interaction(target, b) / mags[target];
  return Complex(0.0, -2.0 / (rate * H.hbar)) * n_b * phase;
}

}  // namespace detail

// Jump lifted to triplets: the side coin and target draw follow the
// two-process law exactly; the psi side multiplies by the conjugated factor
// because the weight carries conj(c_psi).
inline Triplet jump_triplet(const Triplet& tr, const SplitHamiltonian& H,
                            double rate, RngStream& rng) {
  int target = 0;
  if (rng.coin()) {
    const Complex f = detail::jump_factor(H, rate, tr.phi_index, rng, target);
    return Triplet{tr.weight * f, target, tr.psi_index};
  }
  const Complex f = detail::jump_factor(H, rate, tr.psi_index, rng, target);
  return Triplet{tr.weight * std::conj(f), tr.phi_index, target};
}

// Triplet trajectory over the sample grid; one triplet per requested time.
// The RNG call sequence is identical to run_trajectory, so a shared stream
// yields the same events and, up to rounding, the same weights.
inline std::vector<Triplet> run_triplet_trajectory(const SplitHamiltonian& H,
                                                   const InitialSpec& spec,
                                                   const JumpConfig& cfg,
                                                   RngStream& rng,
                                                   long* jump_count = nullptr) {
  if (cfg.rate == 0.0 && !H.zero_interaction()) {
    throw InvalidRate("rate 0 is only valid for a zero interaction");
  }

  auto [phi, psi] = sample_initial_pair(spec, rng);
  Triplet state{phi.prefactor * std::conj(psi.prefactor), phi.index, psi.index};
  double t_state = 0.0;
  long jumps = 0;
  bool dead = state.weight == Complex(0.0);

  const double inf = std::numeric_limits<double>::infinity();
  double t_jump =
      (cfg.rate > 0.0 && !dead) ? sample_waiting_time(rng, cfg.rate) : inf;

  std::vector<Triplet> out;
  out.reserve(cfg.sample_times.size());
  for (double ts : cfg.sample_times) {
    while (t_jump <= ts) {
      state = evolve_free_triplet(state, H, t_jump - t_state);
      t_state = t_jump;
      state = jump_triplet(state, H, cfg.rate, rng);
      ++jumps;
      dead = state.weight == Complex(0.0);
      t_jump = dead ? inf : t_state + sample_waiting_time(rng, cfg.rate);
    }
    out.push_back(evolve_free_triplet(state, H, ts - t_state));
  }
  if (jump_count != nullptr) *jump_count = jumps;
  return out;
}

struct EnsembleMeta {
  double rate = 0.0;
  double hbar = 1.0;
  std::size_t trajectories = 0;
};

// All triplets of an ensemble at one common time.
struct TripletEnsemble {
  std::vector<Triplet> entries;
  double t = 0.0;
  EnsembleMeta meta;
};

// Buckets entries by (phi_index, psi_index) and sums their weights, the
// compression that bounds the ensemble by d^2 regardless of trajectory
// count. Buckets below kCompressPruneTol of the largest bucket magnitude are
// dropped; the estimator is invariant up to float reassociation.
inline TripletEnsemble compress(const TripletEnsemble& e) {
  std::map<std::pair<int, int>, Complex> buckets;
  for (const Triplet& tr : e.entries) {
    buckets[{tr.phi_index, tr.psi_index}] += tr.weight;
  }
  double max_mag = 0.0;
  for (const auto& [key, w] : buckets) {
    max_mag = std::max(max_mag, std::abs(w));
  }
  TripletEnsemble out;
  out.t = e.t;
  out.meta = e.meta;
  out.entries.reserve(buckets.size());
  for (const auto& [key, w] : buckets) {
    if (std::abs(w) < kCompressPruneTol * max_mag) continue;
    out.entries.push_back(Triplet{w, key.first, key.second});
  }
  return out;
}

// Concatenates two ensembles taken at the same time under the same process
// parameters; trajectory counts add.
inline TripletEnsemble merge_ensembles(TripletEnsemble a,
                                       const TripletEnsemble& b) {
  if (a.t != b.t) {
    throw MixedTimes("cannot merge ensembles at t = " + std::to_string(a.t) +
                     " and t = " + std::to_string(b.t));
  }
  if (a.meta.rate != b.meta.rate || a.meta.hbar != b.meta.hbar) {
    throw MetadataMismatch("cannot merge ensembles with different process parameters");
  }
  a.entries.insert(a.entries.end(), b.entries.begin(), b.entries.end());
  a.meta.trajectories += b.meta.trajectories;
  return a;
}

// Same estimator as the two-process engine, evaluated on triplets; invariant
// under compress.
inline DensityMatrix estimate_density_triplet(const TripletEnsemble& e,
                                              int dim) {
  if (e.meta.trajectories == 0) {
    throw EmptyEnsemble("ensemble has no trajectories");
  }
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const Triplet& tr : e.entries) {
    sum(tr.phi_index, tr.psi_index) += tr.weight;
  }
  const double compensation = std::exp(e.meta.rate * e.t);
  return DensityMatrix{
      (compensation / static_cast<double>(e.meta.trajectories)) * sum,
      DensityKind::Estimated};
}

}  // namespace unravel
