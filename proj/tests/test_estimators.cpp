#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "support.hpp"

using namespace unravel;

namespace {

// one-sample record with a single dyad weight at entry (0,0)
TrajectoryRecord weight_record(Complex w, double t) {
  return TrajectoryRecord{
      {DyadSample{BasisState{0, w}, BasisState{0, Complex(1.0)}, t, 0}}, 0, 0};
}

}  // namespace

TEST_CASE("accumulate counts and sums") {
  const AccumulatorMeta meta{2.0, 1.0, 2, {0.5}};
  MomentAccumulator acc(meta);
  CHECK(acc.count() == 0);

  acc.add(weight_record(Complex(2.0), 0.5));
  CHECK(acc.count() == 1);

  // zero-weight record changes the count but not the sums
  acc.add(weight_record(Complex(0.0), 0.5));
  CHECK(acc.count() == 2);
  const EstimateSlice s = acc.finalize(0);
  const double compensation = std::exp(2.0 * 0.5);
  CHECK(s.mean(0, 0).real() == Catch::Approx(compensation * 1.0).margin(1e-12));
}

TEST_CASE("two-point sample gives the textbook standard error") {
  // contributions {0, 2}: mean e^{rt}, SE e^{rt}
  const double rate = 2.0;
  const double t = 0.5;
  const AccumulatorMeta meta{rate, 1.0, 2, {t}};
  MomentAccumulator acc(meta);
  acc.add(weight_record(Complex(0.0), t));
  acc.add(weight_record(Complex(2.0), t));
  const EstimateSlice s = acc.finalize(0);
  const double compensation = std::exp(rate * t);
  CHECK(s.mean(0, 0).real() == Catch::Approx(compensation).margin(1e-12));
  CHECK(s.se_re(0, 0) == Catch::Approx(compensation).margin(1e-12));
  CHECK(s.se_im(0, 0) == 0.0);
}

TEST_CASE("identical contributions have zero standard error") {
  const AccumulatorMeta meta{1.0, 1.0, 2, {0.25}};
  MomentAccumulator acc(meta);
  for (int i = 0; i < 10; ++i) acc.add(weight_record(Complex(0.7, -0.1), 0.25));
  const EstimateSlice s = acc.finalize(0);
  // single-pass moments cancel to the rounding floor, not to exact zero
  CHECK(s.se_re(0, 0) < 1e-8);
  CHECK(s.se_im(0, 0) < 1e-8);
}

TEST_CASE("finalize needs at least two samples") {
  const AccumulatorMeta meta{1.0, 1.0, 2, {0.25}};
  MomentAccumulator acc(meta);
  CHECK_THROWS_AS(acc.finalize(0), InsufficientSamples);
  acc.add(weight_record(Complex(1.0), 0.25));
  CHECK_THROWS_AS(acc.finalize(0), InsufficientSamples);
  CHECK_THROWS_AS(acc.finalize(3), GridMismatch);
  // the mean alone is defined from one sample up
  CHECK(acc.mean_density(0).entries(0, 0).real() ==
        Catch::Approx(std::exp(0.25)).margin(1e-12));
}

TEST_CASE("accumulation order does not matter beyond reassociation") {
  const auto H = two_level(0.0, 1.0).hamiltonian;
  const JumpConfig cfg = make_jump_config(2.0, 1.0, {0.5});
  std::vector<TrajectoryRecord> records;
  for (std::uint64_t id = 0; id < 100; ++id) {
    RngStream rng(stream_seed(3, id));
    records.push_back(run_trajectory(H, BasisPure{0}, cfg, rng, id));
  }
  const AccumulatorMeta meta{2.0, 1.0, 2, cfg.sample_times};

  MomentAccumulator forward(meta);
  for (const auto& r : records) forward.add(r);

  std::mt19937 shuffler(11);
  std::shuffle(records.begin(), records.end(), shuffler);
  MomentAccumulator shuffled(meta);
  for (const auto& r : records) shuffled.add(r);

  const EstimateSlice a = forward.finalize(0);
  const EstimateSlice b = shuffled.finalize(0);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.se_re - b.se_re).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("merge is associative and guarded") {
  const AccumulatorMeta meta{2.0, 1.0, 2, {0.5}};
  auto make = [&meta](std::initializer_list<double> ws) {
    MomentAccumulator acc(meta);
    for (double w : ws) acc.add(weight_record(Complex(w), 0.5));
    return acc;
  };
  const MomentAccumulator a = make({1.0, 2.0});
  const MomentAccumulator b = make({3.0});
  const MomentAccumulator c = make({4.0, 5.0});
  const MomentAccumulator d = make({6.0});
  const MomentAccumulator empty(meta);

  CHECK(merge(a, empty).count() == a.count());
  CHECK((merge(a, empty).finalize(0).mean - a.finalize(0).mean).norm() == 0.0);

  const auto ab = merge(a, b);
  const auto ba = merge(b, a);
  CHECK((ab.finalize(0).mean - ba.finalize(0).mean).cwiseAbs().maxCoeff() <
        1e-12);

  const auto left = merge(merge(a, b), merge(c, d));
  const auto right = merge(merge(merge(a, b), c), d);
  CHECK(left.count() == 6);
  CHECK((left.finalize(0).mean - right.finalize(0).mean).cwiseAbs().maxCoeff() <
        1e-12);

  const AccumulatorMeta other{3.0, 1.0, 2, {0.5}};
  CHECK_THROWS_AS(merge(a, MomentAccumulator(other)), MetadataMismatch);
  const AccumulatorMeta grid{2.0, 1.0, 2, {0.7}};
  CHECK_THROWS_AS(merge(a, MomentAccumulator(grid)), MetadataMismatch);
}

TEST_CASE("merge-based reduction equals sequential accumulation") {
  const auto H = epr_decay(0.0, 0.0, 0.5).hamiltonian;
  const JumpConfig cfg = make_jump_config(auto_rate(H), 1.0, {0.4, 1.0});
  const AccumulatorMeta meta{cfg.rate, 1.0, 3, cfg.sample_times};

  std::vector<TrajectoryRecord> records;
  for (std::uint64_t id = 0; id < 256; ++id) {
    RngStream rng(stream_seed(8, id));
    records.push_back(run_trajectory(H, BasisPure{0}, cfg, rng, id));
  }

  MomentAccumulator sequential(meta);
  for (const auto& r : records) sequential.add(r);

  std::vector<MomentAccumulator> parts(4, MomentAccumulator(meta));
  for (std::size_t i = 0; i < records.size(); ++i) {
    parts[i % 4].add(records[i]);
  }
  MomentAccumulator reduced = merge(merge(parts[0], parts[1]),
                                    merge(parts[2], parts[3]));
  CHECK(reduced.count() == sequential.count());
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK((reduced.finalize(k).mean - sequential.finalize(k).mean)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("standard error shrinks as the square root of the count") {
  const AccumulatorMeta meta{0.0, 1.0, 2, {0.0}};
  auto se_for = [&meta](int n) {
    MomentAccumulator acc(meta);
    RngStream rng(17);
    for (int i = 0; i < n; ++i) {
      acc.add(weight_record(Complex(rng.uniform()), 0.0));
    }
    return acc.finalize(0).se_re(0, 0);
  };
  const double se1 = se_for(4000);
  const double se4 = se_for(16000);
  CHECK(se1 / se4 > 2.0 / 1.5);
  CHECK(se1 / se4 < 2.0 * 1.5);
}

TEST_CASE("triplet samples accumulate like dyad records") {
  const auto H = two_level(0.0, 1.0).hamiltonian;
  const JumpConfig cfg = make_jump_config(2.0, 1.0, {0.5});
  const AccumulatorMeta meta{2.0, 1.0, 2, cfg.sample_times};
  MomentAccumulator two(meta);
  MomentAccumulator tri(meta);
  for (std::uint64_t id = 0; id < 200; ++id) {
    RngStream r1(stream_seed(21, id));
    RngStream r2(stream_seed(21, id));
    two.add(run_trajectory(H, BasisPure{0}, cfg, r1, id));
    tri.add_triplets(run_triplet_trajectory(H, BasisPure{0}, cfg, r2));
  }
  CHECK((two.finalize(0).mean - tri.finalize(0).mean).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("convergence_scan") {
  SECTION("zero interaction is exact at every ensemble size") {
    const auto H = two_level(0.9, 0.0).hamiltonian;
    const JumpConfig cfg = make_jump_config(0.0, 1.0, {0.5, 1.5});
    const auto rows =
        convergence_scan(H, BasisPure{0}, cfg, {10, 100}, 5);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
      CHECK(row.error <= 1e-12);
    }
  }
  SECTION("single entry gives a single row") {
    const auto H = two_level(0.0, 1.0).hamiltonian;
    const JumpConfig cfg = make_jump_config(2.0, 1.0, {0.5});
    const auto rows = convergence_scan(H, BasisPure{0}, cfg, {500}, 5);
    CHECK(rows.size() == 1);
    CHECK(rows[0].trajectories == 500);
    CHECK(rows[0].error > 0.0);
  }
  SECTION("error decays with ensemble size") {
    const auto H = two_level(0.0, 1.0).hamiltonian;
    const JumpConfig cfg = make_jump_config(2.0, 1.0, {0.5});
    const auto rows =
        convergence_scan(H, BasisPure{0}, cfg, {500, 4000, 32000}, 91, 2);
    const double slope = loglog_slope(rows);
    CHECK(slope < -0.1);
    CHECK(slope > -1.0);
  }
}
