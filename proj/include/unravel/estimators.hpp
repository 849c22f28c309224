#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jump_engine.hpp"
#include "state.hpp"
#include "triplet_engine.hpp"

namespace unravel {

// Fixed ensemble bookkeeping shared by every accumulator that is allowed to
// merge. The exp(rate*t) compensation is applied at finalize time only, so
// the stored sums stay raw and rate is part of the merge guard.
struct AccumulatorMeta {
  double rate = 0.0;
  double hbar = 1.0;
  int dim = 0;
  std::vector<double> sample_times;

  friend bool operator==(const AccumulatorMeta&, const AccumulatorMeta&) = default;
};

struct EstimateSlice {
  ComplexMatrix mean;
  RealMatrix se_re;
  RealMatrix se_im;

  DensityMatrix density() const {
    return DensityMatrix{mean, DensityKind::Estimated};
  }
};

// Mergeable running moments per (time, matrix entry): count, sum of the raw
// dyad weights x, and componentwise sums of squares. Single writer; workers
// combine only via merge.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;

  explicit MomentAccumulator(AccumulatorMeta meta) : meta_(std::move(meta)) {
    const auto n = meta_.sample_times.size();
    sum_.assign(n, ComplexMatrix::Zero(meta_.dim, meta_.dim));
    sum_sq_.assign(n, ComplexMatrix::Zero(meta_.dim, meta_.dim));
  }

  const AccumulatorMeta& meta() const { return meta_; }
  std::uint64_t count() const { return count_; }

  void add(const TrajectoryRecord& record) {
    if (record.samples.size() != meta_.sample_times.size()) {
      throw GridMismatch("trajectory record does not match the accumulator grid");
    }
    for (std::size_t k = 0; k < record.samples.size(); ++k) {
      const DyadSample& s = record.samples[k];
      if (s.t != meta_.sample_times[k]) {
        throw GridMismatch("trajectory sample times do not match the grid");
      }
      add_weight(k, s.phi.index, s.psi.index,
                 s.phi.prefactor * std::conj(s.psi.prefactor));
    }
    ++count_;
  }

  // Triplet-engine path: one triplet per grid time for a single trajectory.
  void add_triplets(const std::vector<Triplet>& per_time) {
    if (per_time.size() != meta_.sample_times.size()) {
      throw GridMismatch("triplet trajectory does not match the accumulator grid");
    }
    for (std::size_t k = 0; k < per_time.size(); ++k) {
      add_weight(k, per_time[k].phi_index, per_time[k].psi_index,
                 per_time[k].weight);
    }
    ++count_;
  }

  void merge_from(const MomentAccumulator& other) {
    if (!(meta_ == other.meta_)) {
      throw MetadataMismatch("accumulators with different metadata cannot merge");
    }
    for (std::size_t k = 0; k < sum_.size(); ++k) {
      sum_[k] += other.sum_[k];
      sum_sq_[k] += other.sum_sq_[k];
    }
    count_ += other.count_;
  }

  // Mean with exp(rate*t) compensation and the componentwise standard error
  // of the mean.
  EstimateSlice finalize(std::size_t time_index) const {
    if (time_index >= meta_.sample_times.size()) {
      throw GridMismatch("time index out of range");
    }
    if (count_ < 2) {
      throw InsufficientSamples("standard errors need at least two samples");
    }
    const double n = static_cast<double>(count_);
    const double compensation =
        std::exp(meta_.rate * meta_.sample_times[time_index]);
    EstimateSlice slice;
    slice.mean = (compensation / n) * sum_[time_index];
    slice.se_re.resize(meta_.dim, meta_.dim);
    slice.se_im.resize(meta_.dim, meta_.dim);
    for (int i = 0; i < meta_.dim; ++i) {
      for (int j = 0; j < meta_.dim; ++j) {
        const Complex raw_mean = sum_[time_index](i, j) / n;
        const Complex sq = sum_sq_[time_index](i, j);
        const double var_re = std::max(
            0.0, (sq.real() / n - raw_mean.real() * raw_mean.real()) / (n - 1.0));
        const double var_im = std::max(
            0.0, (sq.imag() / n - raw_mean.imag() * raw_mean.imag()) / (n - 1.0));
        slice.se_re(i, j) = compensation * std::sqrt(var_re);
        slice.se_im(i, j) = compensation * std::sqrt(var_im);
      }
    }
    return slice;
  }

  // Density estimate alone; valid from one sample up.
  DensityMatrix mean_density(std::size_t time_index) const {
    if (time_index >= meta_.sample_times.size()) {
      throw GridMismatch("time index out of range");
    }
    if (count_ == 0) {
      throw EmptyEnsemble("accumulator is empty");
    }
    const double compensation =
        std::exp(meta_.rate * meta_.sample_times[time_index]);
    return DensityMatrix{
        (compensation / static_cast<double>(count_)) * sum_[time_index],
        DensityKind::Estimated};
  }

 private:
  void add_weight(std::size_t k, int i, int j, Complex x) {
    sum_[k](i, j) += x;
    sum_sq_[k](i, j) += Complex(x.real() * x.real(), x.imag() * x.imag());
  }

  AccumulatorMeta meta_;
  std::uint64_t count_ = 0;
  std::vector<ComplexMatrix> sum_;
  std::vector<ComplexMatrix> sum_sq_;  // real part: sum re(x)^2, imag: sum im(x)^2
};

inline void accumulate(MomentAccumulator& acc, const TrajectoryRecord& record) {
  acc.add(record);
}

inline MomentAccumulator merge(const MomentAccumulator& a,
                               const MomentAccumulator& b) {
  MomentAccumulator out = a;
  out.merge_from(b);
  return out;
}

}  // namespace unravel
