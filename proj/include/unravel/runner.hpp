#pragma once

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "estimators.hpp"
#include "initial.hpp"
#include "jump_engine.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "triplet_engine.hpp"

namespace unravel {

enum class Engine { TwoProcess, Triplet };

inline const char* engine_name(Engine e) {
  return e == Engine::TwoProcess ? "two-process" : "triplet";
}

struct EnsembleOptions {
  std::size_t trajectories = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  Engine engine = Engine::TwoProcess;
  bool keep_ensembles = false;  // triplet engine: keep compressed ensembles
};

struct EnsembleResult {
  MomentAccumulator acc;
  std::vector<TripletEnsemble> ensembles;  // one per grid time when kept
  std::uint64_t total_jumps = 0;
  std::size_t audited_samples = 0;   // superselection audit: samples checked
  std::size_t audit_violations = 0;  // out-of-range index or non-finite weight
};

namespace detail {

// Trajectories are processed in fixed chunks of ids and chunk results are
// merged in chunk order, so the reduction is bitwise identical for any
// worker count.
constexpr std::size_t kChunkSize = 256;

struct ChunkResult {
  MomentAccumulator acc;
  std::vector<std::vector<Triplet>> buckets;  // per grid time
  std::uint64_t jumps = 0;
  std::size_t audited = 0;
  std::size_t violations = 0;
};

inline bool audit_state(int index, Complex weight, int dim) {
  return index >= 0 && index < dim && std::isfinite(weight.real()) &&
         std::isfinite(weight.imag());
}

}  // namespace detail

// Runs `opts.trajectories` independent trajectories, each on its own RNG
// stream derived from (seed, trajectory_id), and reduces them into one
// accumulator. Results do not depend on the worker count.
inline EnsembleResult run_ensemble(const SplitHamiltonian& H,
                                   const InitialSpec& spec,
                                   const JumpConfig& cfg,
                                   const EnsembleOptions& opts) {
  validate_initial(spec, H.dim);
  if (opts.trajectories == 0) {
    throw EmptyEnsemble("ensemble needs at least one trajectory");
  }

  const AccumulatorMeta meta{cfg.rate, cfg.hbar, H.dim, cfg.sample_times};
  const std::size_t n_times = cfg.sample_times.size();
  const std::size_t n_chunks =
      (opts.trajectories + detail::kChunkSize - 1) / detail::kChunkSize;
  const bool keep =
      opts.engine == Engine::Triplet && opts.keep_ensembles;

  std::vector<detail::ChunkResult> chunks(n_chunks);
  std::atomic<std::size_t> next_chunk{0};

  auto work = [&]() {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      detail::ChunkResult& out = chunks[c];
      out.acc = MomentAccumulator(meta);
      if (keep) out.buckets.assign(n_times, {});
      const std::size_t begin = c * detail::kChunkSize;
      const std::size_t end =
          std::min(opts.trajectories, begin + detail::kChunkSize);
      for (std::size_t id = begin; id < end; ++id) {
        RngStream rng(stream_seed(opts.seed, id));
        if (opts.engine == Engine::TwoProcess) {
          const TrajectoryRecord rec = run_trajectory(H, spec, cfg, rng, id);
          out.acc.add(rec);
          out.jumps += static_cast<std::uint64_t>(rec.jump_count);
          for (const DyadSample& s : rec.samples) {
            ++out.audited;
            if (!detail::audit_state(s.phi.index, s.phi.prefactor, H.dim) ||
                !detail::audit_state(s.psi.index, s.psi.prefactor, H.dim)) {
              ++out.violations;
            }
          }
        } else {
          long jumps = 0;
          const std::vector<Triplet> samples =
              run_triplet_trajectory(H, spec, cfg, rng, &jumps);
          out.acc.add_triplets(samples);
          out.jumps += static_cast<std::uint64_t>(jumps);
          for (std::size_t k = 0; k < samples.size(); ++k) {
            ++out.audited;
            if (!detail::audit_state(samples[k].phi_index, samples[k].weight,
                                     H.dim) ||
                samples[k].psi_index < 0 || samples[k].psi_index >= H.dim) {
              ++out.violations;
            }
            if (keep) out.buckets[k].push_back(samples[k]);
          }
        }
      }
      // Compress early so chunk memory stays bounded by d^2 per time.
      if (keep) {
        for (std::size_t k = 0; k < n_times; ++k) {
          TripletEnsemble e{std::move(out.buckets[k]), cfg.sample_times[k],
                            EnsembleMeta{cfg.rate, cfg.hbar, end - begin}};
          e = compress(e);
          out.buckets[k] = std::move(e.entries);
        }
      }
    }
  };

  const int n_workers = std::max(
      1, std::min<int>(opts.workers, static_cast<int>(n_chunks)));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  EnsembleResult result;
  result.acc = MomentAccumulator(meta);
  if (keep) {
    result.ensembles.reserve(n_times);
    for (std::size_t k = 0; k < n_times; ++k) {
      result.ensembles.push_back(TripletEnsemble{
          {}, cfg.sample_times[k], EnsembleMeta{cfg.rate, cfg.hbar, 0}});
    }
  }
  for (std::size_t c = 0; c < n_chunks; ++c) {
    result.acc.merge_from(chunks[c].acc);
    result.total_jumps += chunks[c].jumps;
    result.audited_samples += chunks[c].audited;
    result.audit_violations += chunks[c].violations;
    if (keep) {
      const std::size_t begin = c * detail::kChunkSize;
      const std::size_t end =
          std::min(opts.trajectories, begin + detail::kChunkSize);
      for (std::size_t k = 0; k < n_times; ++k) {
        result.ensembles[k] = merge_ensembles(
            std::move(result.ensembles[k]),
            TripletEnsemble{chunks[c].buckets[k], cfg.sample_times[k],
                            EnsembleMeta{cfg.rate, cfg.hbar, end - begin}});
      }
    }
  }
  if (keep) {
    for (auto& e : result.ensembles) e = compress(e);
  }
  return result;
}

// Per-time comparison of an estimate against the exact propagator. The
// combined standard error aggregates every entry componentwise, matching the
// Frobenius norm of the error.
struct CompareRow {
  double t = 0.0;
  double frobenius_error = 0.0;
  double combined_se = 0.0;

  // Zero statistical spread with an error at rounding level counts as an
  // exact match, not a divergence.
  double ratio() const {
    if (combined_se > 0.0) return frobenius_error / combined_se;
    return frobenius_error <= 1e-12 ? 0.0
                                    : std::numeric_limits<double>::infinity();
  }
};

inline std::vector<CompareRow> compare_to_oracle(const MomentAccumulator& acc,
                                                 const ExactPropagator& prop,
                                                 const ComplexMatrix& rho0) {
  std::vector<CompareRow> rows;
  rows.reserve(acc.meta().sample_times.size());
  const DensityMatrix initial{rho0, DensityKind::Exact};
  for (std::size_t k = 0; k < acc.meta().sample_times.size(); ++k) {
    const double t = acc.meta().sample_times[k];
    const EstimateSlice slice = acc.finalize(k);
    const DensityMatrix exact = propagate(prop, initial, t);
    CompareRow row;
    row.t = t;
    row.frobenius_error = (slice.mean - exact.entries).norm();
    row.combined_se = std::sqrt(slice.se_re.squaredNorm() +
                                slice.se_im.squaredNorm());
    rows.push_back(row);
  }
  return rows;
}

struct ScanRow {
  std::size_t trajectories = 0;
  double error = 0.0;
};

// Frobenius error against the oracle at the last grid time, for each
// ensemble size. Each scan point runs on its own derived seed, so points are
// statistically independent and the whole table is reproducible.
inline std::vector<ScanRow> convergence_scan(const SplitHamiltonian& H,
                                             const InitialSpec& spec,
                                             const JumpConfig& cfg,
                                             const std::vector<std::size_t>& m_list,
                                             std::uint64_t seed,
                                             int workers = 1,
                                             Engine engine = Engine::TwoProcess) {
  const ExactPropagator prop = build_propagator(H);
  const ComplexMatrix rho0 = initial_density(spec, H.dim);
  const std::size_t last = cfg.sample_times.size() - 1;
  const DensityMatrix exact = propagate(
      prop, DensityMatrix{rho0, DensityKind::Exact}, cfg.sample_times[last]);

  std::vector<ScanRow> rows;
  rows.reserve(m_list.size());
  // Offset keeps scan-point master seeds away from plain trajectory ids.
  constexpr std::uint64_t kScanStreamBase = 0x5ca9000000000000ull;
  for (std::size_t j = 0; j < m_list.size(); ++j) {
    EnsembleOptions opts;
    opts.trajectories = m_list[j];
    opts.seed = stream_seed(seed, kScanStreamBase + j);
    opts.workers = workers;
    opts.engine = engine;
    const EnsembleResult res = run_ensemble(H, spec, cfg, opts);
    rows.push_back(
        {m_list[j], frobenius_distance(res.acc.mean_density(last), exact)});
  }
  return rows;
}

// Least-squares slope of log(error) vs log(M).
inline double loglog_slope(const std::vector<ScanRow>& rows) {
  const double n = static_cast<double>(rows.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.trajectories));
    const double y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace unravel
