#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "initial.hpp"
#include "rng.hpp"
#include "state.hpp"

namespace unravel {

// Jump-process parameters. rate == 0 is the no-jump limit and is accepted
// only for an identically zero interaction, where the free evolution already
// is the full dynamics.
struct JumpConfig {
  double rate = 0.0;
  double hbar = 1.0;
  std::vector<double> sample_times;
};

// Rate at which every per-jump weight factor has magnitude <= 1, so the only
// ensemble weight spread is the global exp(rate * t) compensation.
inline double auto_rate(const SplitHamiltonian& H) {
  const RealVector n = column_absolute_sums(H);
  return 2.0 / H.hbar * (n.size() > 0 ? n.maxCoeff() : 0.0);
}

inline JumpConfig make_jump_config(double rate, double hbar,
                                   std::vector<double> sample_times) {
  if (rate < 0.0 || !std::isfinite(rate)) {
    throw InvalidRate("jump rate must be finite and nonnegative, got " +
                      std::to_string(rate));
  }
  if (!(hbar > 0.0)) {
    throw NonPositiveHbar("hbar must be positive");
  }
  if (sample_times.empty()) {
    throw GridMismatch("sample_times must not be empty");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : sample_times) {
    if (!(t >= 0.0) || t <= prev) {
      throw GridMismatch("sample_times must be strictly increasing and >= 0");
    }
    prev = t;
  }
  return JumpConfig{rate, hbar, std::move(sample_times)};
}

// Free evolution leaves the basis index alone and rotates the prefactor by
// the eigenvalue phase; the magnitude is untouched.
inline BasisState evolve_free(const BasisState& s, const SplitHamiltonian& H,
                              double dt) {
  return BasisState{s.index,
                    s.prefactor *
                        std::polar(1.0, -H.free_energies(s.index) * dt / H.hbar)};
}

inline double sample_waiting_time(RngStream& rng, double rate) {
  if (!(rate > 0.0)) {
    throw InvalidRate("waiting times need a positive rate");
  }
  return rng.exponential(rate);
}

// One quantum jump on a single vector. The target b' is drawn with
// probability |h(b',b)| / N_b and the inherited prefactor is scaled by
//   (-2i / (rate * hbar)) * N_b * h(b',b) / |h(b',b)|,
// the unique normalization whose expectation over b' equals
// (-2i / (rate * hbar)) * H_int applied to the state. A vanishing column has
// no admissible target: the state dies (zero prefactor, index kept), which is
// the zero expectation demanded by H_int |b> = 0.
inline BasisState apply_jump(const BasisState& s, const SplitHamiltonian& H,
                             double rate, RngStream& rng) {
  const int b = s.index;
  std::vector<double> mags(static_cast<std::size_t>(H.dim));
  double n_b = 0.0;
  for (int bp = 0; bp < H.dim; ++bp) {
    mags[bp] = std::abs(H.interaction(bp, b));
    n_b += mags[bp];
  }
  if (n_b == 0.0) {
    return BasisState{b, Complex(0.0, 0.0)};
  }
  const int bp = rng.pick(mags, n_b);
  const Complex phase = H.interaction(bp, b) / mags[bp];
  const Complex factor =
      Complex(0.0, -2.0 / (rate * H.hbar)) * n_b * phase;
  return BasisState{bp, s.prefactor * factor};
}

// One full trajectory: per requested sample time, the dyad snapshot obtained
// by exact free evolution to that instant.
struct TrajectoryRecord {
  std::vector<DyadSample> samples;
  long jump_count = 0;
  std::uint64_t seed_id = 0;
};

// Event-driven evolution of the (phi, psi) pair. Between Poisson events both
// vectors evolve freely; at an event one side is chosen with probability 1/2
// and jumped. Snapshots are taken by free-evolving copies to the exact sample
// instants, so the only error anywhere is statistical. Dead trajectories stop
// consuming randomness but still record their (zero) samples.
inline TrajectoryRecord run_trajectory(const SplitHamiltonian& H,
                                       const InitialSpec& spec,
                                       const JumpConfig& cfg, RngStream& rng,
                                       std::uint64_t seed_id = 0) {
  if (cfg.rate == 0.0 && !H.zero_interaction()) {
    throw InvalidRate("rate 0 is only valid for a zero interaction");
  }

  TrajectoryRecord record;
  record.seed_id = seed_id;
  record.samples.reserve(cfg.sample_times.size());

  auto [phi, psi] = sample_initial_pair(spec, rng);
  double t_state = 0.0;
  bool dead = phi.prefactor == Complex(0.0) || psi.prefactor == Complex(0.0);

  const double inf = std::numeric_limits<double>::infinity();
  double t_jump =
      (cfg.rate > 0.0 && !dead) ? sample_waiting_time(rng, cfg.rate) : inf;

  for (double ts : cfg.sample_times) {
    while (t_jump <= ts) {
      phi = evolve_free(phi, H, t_jump - t_state);
      psi = evolve_free(psi, H, t_jump - t_state);
      t_state = t_jump;
      if (rng.coin()) {
        phi = apply_jump(phi, H, cfg.rate, rng);
      } else {
        psi = apply_jump(psi, H, cfg.rate, rng);
      }
      ++record.jump_count;
      dead = phi.prefactor == Complex(0.0) || psi.prefactor == Complex(0.0);
      t_jump = dead ? inf : t_state + sample_waiting_time(rng, cfg.rate);
    }
    DyadSample sample{evolve_free(phi, H, ts - t_state),
                      evolve_free(psi, H, ts - t_state), ts,
                      record.jump_count};
    assert(sample.phi.index >= 0 && sample.phi.index < H.dim);
    assert(sample.psi.index >= 0 && sample.psi.index < H.dim);
    record.samples.push_back(sample);
  }
  return record;
}

namespace detail {

inline void check_grid(const TrajectoryRecord& r, const JumpConfig& cfg) {
  if (r.samples.size() != cfg.sample_times.size()) {
    throw GridMismatch("record has " + std::to_string(r.samples.size()) +
                       " samples, grid has " +
                       std::to_string(cfg.sample_times.size()));
  }
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    if (r.samples[k].t != cfg.sample_times[k]) {
      throw GridMismatch("record sample times do not match the grid");
    }
  }
}

}  // namespace detail

// Ensemble dyad estimator at one grid time: exp(rate * t) compensates the
// -rate * rho damping left by the jump construction, making the mean an
// unbiased estimate of rho_t.
inline DensityMatrix estimate_density(const std::vector<TrajectoryRecord>& records,
                                      const JumpConfig& cfg, int dim,
                                      std::size_t time_index) {
  if (records.empty()) {
    throw EmptyEnsemble("estimate_density needs at least one trajectory");
  }
  if (time_index >= cfg.sample_times.size()) {
    throw GridMismatch("time index out of range");
  }
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const auto& r : records) {
    detail::check_grid(r, cfg);
    const DyadSample& s = r.samples[time_index];
    sum(s.phi.index, s.psi.index) +=
        s.phi.prefactor * std::conj(s.psi.prefactor);
  }
  const double compensation =
      std::exp(cfg.rate * cfg.sample_times[time_index]);
  return DensityMatrix{(compensation / static_cast<double>(records.size())) * sum,
                       DensityKind::Estimated};
}

struct ObservableEstimate {
  Complex value{0.0, 0.0};
  double se_re = 0.0;
  double se_im = 0.0;  // the imaginary part is a diagnostic, zero in expectation
};

// tr(rho_t A) estimator with a componentwise standard error of the mean.
inline ObservableEstimate estimate_observable(
    const std::vector<TrajectoryRecord>& records, const JumpConfig& cfg,
    const ComplexMatrix& A, std::size_t time_index) {
  if ((A - A.adjoint().eval()).norm() >
      kHermitianTol * std::max(A.norm(), 1e-300)) {
    throw NonHermitianObservable("observable is not Hermitian");
  }
  if (records.empty()) {
    throw EmptyEnsemble("estimate_observable needs at least one trajectory");
  }
  if (records.size() < 2) {
    throw InsufficientSamples("standard errors need at least two trajectories");
  }
  if (time_index >= cfg.sample_times.size()) {
    throw GridMismatch("time index out of range");
  }
  Complex sum(0.0, 0.0);
  double sum_sq_re = 0.0;
  double sum_sq_im = 0.0;
  for (const auto& r : records) {
    detail::check_grid(r, cfg);
    const DyadSample& s = r.samples[time_index];
    // tr(|phi><psi| A) = A(psi, phi)
    const Complex x = s.phi.prefactor * std::conj(s.psi.prefactor) *
                      A(s.psi.index, s.phi.index);
    sum += x;
    sum_sq_re += x.real() * x.real();
    sum_sq_im += x.imag() * x.imag();
  }
  const double m = static_cast<double>(records.size());
  const double compensation =
      std::exp(cfg.rate * cfg.sample_times[time_index]);
  const Complex mean = sum / m;
  const double var_re =
      std::max(0.0, (sum_sq_re / m - mean.real() * mean.real()) / (m - 1.0));
  const double var_im =
      std::max(0.0, (sum_sq_im / m - mean.imag() * mean.imag()) / (m - 1.0));
  return ObservableEstimate{compensation * mean,
                            compensation * std::sqrt(var_re),
                            compensation * std::sqrt(var_im)};
}

}  // namespace unravel
