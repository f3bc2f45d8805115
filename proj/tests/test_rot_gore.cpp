#include "gorereg/rot_gore.hpp"

#include "gorereg/bnb.hpp"
#include "gorereg/data.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace gorereg;

namespace {

std::vector<AngularCorrespondence> angular_instance(std::size_t n, double eta, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.eta = eta;
  spec.seed = seed;
  const Instance inst = generate(spec);
  return to_angular(inst.correspondences, spec.xi);
}

bool includes(const IndexSet& sorted_super, IndexSet sub) {
  std::sort(sub.begin(), sub.end());
  return std::includes(sorted_super.begin(), sorted_super.end(), sub.begin(), sub.end());
}

}  // namespace

TEST(AngularThreshold, ChordRecoversXi) {
  const double eps = angular_threshold(Vec3::UnitX(), Vec3::UnitY(), 0.5);
  EXPECT_NEAR(eps, 0.50536, 1e-5);
  EXPECT_NEAR(2.0 * std::sin(eps / 2.0), 0.5, 1e-12);
}

TEST(AngularThreshold, WholeSphereWhenBothPointsAreClose) {
  EXPECT_DOUBLE_EQ(angular_threshold(0.1 * Vec3::UnitX(), 0.2 * Vec3::UnitY(), 0.5), kPi);
}

TEST(AngularThreshold, VanishesWithXi) {
  EXPECT_LT(angular_threshold(Vec3::UnitX(), Vec3::UnitZ(), 1e-9), 1e-8);
  EXPECT_THROW(angular_threshold(Vec3::UnitX(), 2.0 * Vec3::UnitZ(), 0.5), InputError);
  EXPECT_THROW(angular_threshold(Vec3::Zero(), Vec3::UnitZ(), 0.5), InputError);
}

TEST(AngularThreshold, MatchesEuclideanTest) {
  oracle::Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 x = rng.unit() * rng.uniform(0.5, 5.0);
    const double ny = std::max(0.01, x.norm() + rng.uniform(-0.4, 0.4));
    const Vec3 y = rng.unit() * ny;
    const double eps = angular_threshold(x, y, 0.5);
    // The Euclidean distance at angle eps between the two radii is xi.
    const double at_eps = std::sqrt(x.squaredNorm() + ny * ny - 2.0 * x.norm() * ny * std::cos(eps));
    if (eps < kPi) {
      EXPECT_NEAR(at_eps, 0.5, 1e-9);
    }
  }
}

TEST(NormPrefilter, StrictBoundary) {
  CorrespondenceSet c = {{Vec3::UnitX(), 2.0 * Vec3::UnitY(), 0},
                         {Vec3::UnitX(), Vec3::UnitY(), 1},
                         {Vec3::UnitX(), 1.5 * Vec3::UnitY(), 2}};
  const NormSplit s = norm_prefilter(c, 0.5);
  EXPECT_EQ(s.removed, IndexSet({0}));
  EXPECT_EQ(s.kept, IndexSet({1, 2}));
  EXPECT_THROW(norm_prefilter(c, 0.0), InputError);
}

TEST(ToAngular, NormalizesAndKeepsIndex) {
  CorrespondenceSet c = {{3.0 * Vec3::UnitX(), 3.2 * Vec3::UnitY(), 7},
                         {Vec3::Zero(), 0.3 * Vec3::UnitY(), 9}};
  const auto a = to_angular(c, 0.5);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].index, 7u);
  EXPECT_NEAR(a[0].x.norm(), 1.0, 1e-12);
  EXPECT_NEAR(a[0].epsilon, angular_threshold(c[0].x, c[0].y, 0.5), 1e-15);
  EXPECT_EQ(a[1].epsilon, kPi);
}

TEST(DeltaBound, Values) {
  EXPECT_DOUBLE_EQ(delta_bound(0.0, 0.2), 0.2);
  EXPECT_DOUBLE_EQ(delta_bound(1.3, 0.0), 0.0);
  const long double ref = 2.0L * (3.14159265358979323846L / 2.0L) * std::sin(0.05L) + 0.1L;
  EXPECT_NEAR(delta_bound(kPi / 2.0, 0.1), static_cast<double>(ref), 1e-15);
  EXPECT_NEAR(delta_bound(kPi / 2.0, 0.1), 0.25702, 1e-4);
  EXPECT_DOUBLE_EQ(delta_bound(-0.7, 0.1), delta_bound(0.7, 0.1));
}

TEST(DeltaBound, BoundsSpinOfPerturbedPoints) {
  oracle::Rng rng(37);
  for (int cfg = 0; cfg < 200; ++cfg) {
    const Vec3 y_k = rng.unit();
    const Vec3 bx = rng.unit();
    const double eps_k = rng.uniform(0.0, 0.3);
    const double theta = rng.uniform(-kPi, kPi);
    const Vec3 nominal = rotation_from_axis_angle(y_k, theta) * bx;
    for (int s = 0; s < 500; ++s) {
      const Vec3 u = rng.in_cap(y_k, eps_k);
      const Vec3 p = rng.in_cap(bx, eps_k);
      const Vec3 moved = rotation_from_axis_angle(u, theta) * p;
      ASSERT_LE(angle_between(moved, nominal), delta_bound(theta, eps_k) + 1e-9);
    }
  }
}

TEST(BoundaryVectors, ZeroRadius) {
  const BoundaryVectors b = boundary_vectors(Vec3::UnitX(), Vec3::UnitZ(), 0.0);
  EXPECT_NEAR((b.p_near - Vec3::UnitX()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((b.p_far - Vec3::UnitX()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((b.a_near - Vec3::UnitZ()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((b.a_far - Vec3::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(BoundaryVectors, NearAndFarSeparations) {
  const Vec3 bx = Vec3::UnitX();
  const Vec3 yk = Vec3::UnitZ();
  const BoundaryVectors b = boundary_vectors(bx, yk, 0.2);
  EXPECT_NEAR(angle_between(b.p_near, bx), 0.2, 1e-12);
  EXPECT_NEAR(angle_between(b.a_near, yk), 0.2, 1e-12);
  EXPECT_NEAR(angle_between(b.p_far, bx), 0.2, 1e-12);
  EXPECT_NEAR(angle_between(b.a_far, yk), 0.2, 1e-12);
  EXPECT_NEAR(angle_between(b.p_near, b.a_near), angle_between(bx, yk) - 0.4, 1e-12);
  EXPECT_NEAR(angle_between(b.p_far, b.a_far), angle_between(bx, yk) + 0.4, 1e-12);
  EXPECT_THROW(boundary_vectors(yk, yk, 0.1), DegenerateError);
}

TEST(RegionPrune, Examples) {
  const Vec3 yk = Vec3::UnitZ();
  const Vec3 bx = Vec3(std::sin(1.0), 0.0, std::cos(1.0));
  EXPECT_FALSE(region_prune_test({Vec3::UnitX(), bx, 0.0, 0}, bx, yk, 0.0));
  EXPECT_FALSE(region_prune_test({Vec3::UnitX(), bx, 0.3, 0}, bx, yk, 0.2));
  const Vec3 off = Vec3(std::sin(1.2), 0.0, std::cos(1.2));
  EXPECT_TRUE(region_prune_test({Vec3::UnitX(), off, 0.0, 0}, bx, yk, 0.0));
}

TEST(RegionPrune, NeverPrunesAReachableMatch) {
  oracle::Rng rng(41);
  int pruned_configs = 0;
  for (int cfg = 0; cfg < 60 && pruned_configs < 12; ++cfg) {
    const Vec3 yk = rng.unit();
    const Vec3 bx = rng.unit();
    const double eps_k = rng.uniform(0.0, 0.3);
    const double eps_i = rng.uniform(0.0, 0.3);
    // Place y_i so that roughly half of the configurations get pruned.
    const double incl = angle_between(bx, yk) + rng.uniform(-1.0, 1.0) * (4.0 * eps_k + eps_i);
    const TangentFrame f = tangent_frame(yk);
    const Vec3 yi = from_spherical({rng.uniform(-kPi, kPi), std::clamp(incl, 0.0, kPi)}, f);
    const AngularCorrespondence ci{Vec3::UnitX(), yi, eps_i, 1};
    if (!region_prune_test(ci, bx, yk, eps_k)) continue;
    ++pruned_configs;
    for (int s = 0; s < 100000; ++s) {
      const Vec3 u = rng.in_cap(yk, eps_k);
      const Vec3 p = rng.in_cap(bx, eps_k);
      const double theta = rng.uniform(-kPi, kPi);
      ASSERT_GT(angle_between(rotation_from_axis_angle(u, theta) * p, yi), eps_i)
          << "config " << cfg;
    }
  }
  EXPECT_GE(pruned_configs, 5);
}

TEST(ThetaInterval, ExactDataCollapsesToAPoint) {
  oracle::Rng rng(43);
  for (int i = 0; i < 100; ++i) {
    const Vec3 yk = rng.unit();
    Vec3 bx = rng.unit();
    if (angle_between(bx, yk) < 0.2 || angle_between(bx, yk) > kPi - 0.2) continue;
    const double theta = rng.uniform(-kPi, kPi);
    const Vec3 yi = rotation_from_axis_angle(yk, theta) * bx;
    const IntervalSet set = theta_interval({Vec3::UnitX(), yi, 0.0, 1}, bx, yk, 0.0);
    ASSERT_EQ(set.size(), 1u);
    EXPECT_TRUE(set.contains(theta));
    EXPECT_LE(set[0].hi - set[0].lo, 1e-11);
  }
}

TEST(ThetaInterval, FullCircleBeyondLinearizationLimit) {
  EXPECT_NEAR(kMaxLinearizedEps, kPi / (2.0 * kPi + 2.0), 1e-15);
  EXPECT_NEAR(kMaxLinearizedEps, 0.379273, 1e-5);
  const Vec3 bx(std::sin(1.0), 0.0, std::cos(1.0));
  const IntervalSet set = theta_interval({Vec3::UnitX(), bx, 0.01, 1}, bx, Vec3::UnitZ(), 0.4);
  EXPECT_TRUE(set.is_full());
}

TEST(ThetaInterval, IntervalsStayInsideRange) {
  oracle::Rng rng(47);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 yk = rng.unit();
    const Vec3 bx = rng.unit();
    const AngularCorrespondence ci{Vec3::UnitX(), rng.unit(), rng.uniform(0.0, 0.5), 1};
    const IntervalSet set = theta_interval(ci, bx, yk, rng.uniform(0.0, 0.4));
    ASSERT_GE(set.size(), 1u);
    for (const auto& part : set) {
      ASSERT_LE(part.lo, part.hi);
      ASSERT_GE(part.lo, -kPi);
      ASSERT_LE(part.hi, kPi);
    }
  }
}

TEST(ThetaInterval, ContainsEverySampledFeasibleSpin) {
  oracle::Rng rng(53);
  for (int cfg = 0; cfg < 40; ++cfg) {
    const Vec3 yk = rng.unit();
    const Vec3 bx = rng.unit();
    const double eps_k = rng.uniform(0.0, kMaxLinearizedEps);
    const double eps_i = rng.uniform(0.0, 0.3);
    const Vec3 target = rotation_from_axis_angle(yk, rng.uniform(-kPi, kPi)) * bx;
    const Vec3 yi = rng.in_cap(target, 2.0 * eps_k + eps_i);
    const AngularCorrespondence ci{Vec3::UnitX(), yi, eps_i, 1};
    const IntervalSet set = theta_interval(ci, bx, yk, eps_k);
    for (int s = 0; s < 20000; ++s) {
      const Vec3 u = rng.in_cap(yk, eps_k);
      const Vec3 p = rng.in_cap(bx, eps_k);
      for (const auto& [lo, hi] : oracle::spin_range(u, p, yi, eps_i)) {
        for (double theta : {lo, hi, rng.uniform(lo, hi)}) {
          bool inside = false;
          for (const auto& part : set) inside |= part.lo - 1e-9 <= theta && theta <= part.hi + 1e-9;
          ASSERT_TRUE(inside) << "config " << cfg << " theta " << theta;
        }
      }
    }
  }
}

TEST(LinearizedCrossing, DominatesExactExtension) {
  oracle::Rng rng(59);
  for (int i = 0; i < 1000; ++i) {
    const double eps_k = rng.uniform(0.0, kMaxLinearizedEps);
    const double psi = rng.uniform(0.05, kPi - 0.05);
    const double base = rng.uniform(0.0, kPi);
    const auto lin = side_extension(base, eps_k, psi);
    if (!lin) continue;
    ASSERT_GE(*lin, oracle::exact_extension(base, eps_k, psi))
        << "eps_k " << eps_k << " psi " << psi << " base " << base;
  }
}

TEST(LinearizedCrossing, NoCrossingWhenLineStaysAbove) {
  EXPECT_FALSE(linearized_crossing(1.0, 0.0).has_value());
  EXPECT_FALSE(linearized_crossing(0.1, 0.7).has_value());
  ASSERT_TRUE(linearized_crossing(0.0, 0.0).has_value());
  EXPECT_NEAR(*linearized_crossing(0.0, 0.0), 0.0, 1e-11);
}

TEST(IntervalStab, Examples) {
  const std::vector<AngleInterval> one = {{-1.0, 1.0}};
  const StabResult a = interval_stab(one);
  EXPECT_EQ(a.max_count, 1u);
  EXPECT_TRUE(one[0].contains(a.witness));

  const std::vector<AngleInterval> three = {{0, 2}, {1, 3}, {2.5, 3}};
  EXPECT_EQ(interval_stab(three).max_count, 2u);

  const std::vector<AngleInterval> touching = {{0, 1}, {1, 2}};
  const StabResult t = interval_stab(touching);
  EXPECT_EQ(t.max_count, 2u);
  EXPECT_DOUBLE_EQ(t.witness, 1.0);

  const StabResult empty = interval_stab({});
  EXPECT_EQ(empty.max_count, 0u);
  EXPECT_EQ(empty.witness, 0.0);
}

TEST(IntervalStab, AgreesWithEndpointEnumeration) {
  oracle::Rng rng(61);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.integer(1, 50);
    std::vector<AngleInterval> iv;
    for (int i = 0; i < n; ++i) {
      // Coarse grid so that shared endpoints are common.
      double a = std::round(rng.uniform(-kPi, kPi) * 4.0) / 4.0;
      double b = std::round(rng.uniform(-kPi, kPi) * 4.0) / 4.0;
      if (a > b) std::swap(a, b);
      iv.push_back({a, b});
    }
    const StabResult got = interval_stab(iv);
    const oracle::StabAnswer want = oracle::stab_by_endpoints(iv);
    ASSERT_EQ(got.max_count, want.max_count);
    ASSERT_EQ(got.witness, want.witness);
  }
}

TEST(RotUpperBound, SingleMatch) {
  const std::vector<AngularCorrespondence> one = {{Vec3::UnitX(), Vec3::UnitY(), 0.1, 0}};
  const SubproblemBound b = rot_upper_bound(0, one);
  EXPECT_EQ(b.p_hat, 1u);
  EXPECT_LE(rotation_distance(b.r_tilde, minimal_geodesic_rotation(Vec3::UnitX(), Vec3::UnitY())),
            1e-12);
}

TEST(RotUpperBound, NoiseFreeInliersReachN) {
  oracle::Rng rng(67);
  const Rotation r0 = rng.rotation();
  CorrespondenceSet corrs;
  for (std::size_t i = 0; i < 40; ++i) {
    const Vec3 x = rng.unit() * rng.uniform(10.0, 100.0);
    corrs.push_back({x, r0 * x, i});
  }
  const auto ang = to_angular(corrs, 0.5);
  for (std::size_t k = 0; k < ang.size(); ++k) {
    const SubproblemBound b = rot_upper_bound(k, ang);
    EXPECT_EQ(b.p_hat, ang.size());
  }
}

TEST(RotUpperBound, DominatesSampledSubproblemValue) {
  oracle::Rng rng(71);
  for (int inst = 0; inst < 30; ++inst) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(3, 12));
    SyntheticSpec spec;
    spec.n = n;
    spec.eta = rng.uniform(0.0, 0.7);
    spec.seed = 1000 + inst;
    spec.ball_radius = 5.0;  // wide thresholds make the bound work hard
    const auto ang = to_angular(generate(spec).correspondences, spec.xi);
    for (std::size_t k = 0; k < ang.size(); ++k) {
      const std::size_t bound = rot_upper_bound(k, ang).p_hat;
      const std::size_t sampled = oracle::sampled_rot_pk(k, ang, rng, 40, 180);
      ASSERT_GE(bound, sampled) << "instance " << inst << " k " << k;
    }
  }
}

TEST(GoreRotation, EmptyInput) {
  const RotGoreOutcome out = gore_rotation({});
  EXPECT_TRUE(out.surviving.empty());
  EXPECT_EQ(out.lower_bound, 0u);
}

TEST(GoreRotation, ZeroOutliersKeepsEverything) {
  const auto ang = angular_instance(60, 0.0, 5);
  const RotGoreOutcome out = gore_rotation(ang);
  EXPECT_EQ(out.surviving.size(), ang.size());
}

TEST(GoreRotation, KeepsTheOptimalConsensus) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ang = angular_instance(100, 0.9, seed);
    const RotGoreOutcome out = gore_rotation(ang);
    const BnbResult opt = bnb_rotation_consensus(ang);
    ASSERT_TRUE(opt.optimal);
    EXPECT_TRUE(includes(out.surviving, angular_consensus(opt.best_rotation, ang)));
    EXPECT_LE(out.lower_bound, opt.best_consensus);
    EXPECT_LE(out.lower_bound, out.surviving.size());
  }
}

TEST(GoreRotation, LowerBoundIsConsensusOfBestAndMonotone) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ang = angular_instance(80, 0.6, 100 + seed);
    const RotGoreOutcome out = gore_rotation(ang);
    EXPECT_EQ(out.lower_bound, angular_consensus_size(out.best_rotation, ang));
    std::size_t prev = 0;
    for (const auto& v : out.visits) {
      EXPECT_GE(v.lower_bound, prev);
      prev = v.lower_bound;
      EXPECT_EQ(v.removed, v.p_hat < v.lower_bound);
    }
    EXPECT_TRUE(std::is_sorted(out.surviving.begin(), out.surviving.end()));
  }
}

TEST(GoreRotation, Deterministic) {
  const auto ang = angular_instance(80, 0.7, 9);
  const RotGoreOutcome a = gore_rotation(ang);
  const RotGoreOutcome b = gore_rotation(ang);
  EXPECT_EQ(a.surviving, b.surviving);
  EXPECT_EQ(a.lower_bound, b.lower_bound);
  EXPECT_EQ(a.per_k_upper_bounds, b.per_k_upper_bounds);
}

TEST(GoreRotation, ParallelModeIsSound) {
  const auto ang = angular_instance(100, 0.8, 21);
  RotGoreOptions opt;
  opt.parallel = true;
  opt.threads = 4;
  const RotGoreOutcome out = gore_rotation(ang, opt);
  const BnbResult best = bnb_rotation_consensus(ang);
  EXPECT_TRUE(includes(out.surviving, angular_consensus(best.best_rotation, ang)));
}

TEST(GoreRotation, StopsEarlyBelowThreshold) {
  const auto ang = angular_instance(100, 0.9, 3);
  RotGoreOptions opt;
  opt.stop_below = 90;
  const RotGoreOutcome out = gore_rotation(ang, opt);
  EXPECT_TRUE(out.stopped_early);
  EXPECT_LT(out.surviving.size(), 90u);
  const BnbResult best = bnb_rotation_consensus(ang);
  EXPECT_TRUE(includes(out.surviving, angular_consensus(best.best_rotation, ang)));
}

TEST(GoreRotation, WarmStartSetsInitialLowerBound) {
  SyntheticSpec spec;
  spec.n = 60;
  spec.eta = 0.5;
  spec.seed = 77;
  const Instance inst = generate(spec);
  const auto ang = to_angular(inst.correspondences, spec.xi);
  RotGoreOptions opt;
  opt.initial_rotation = inst.ground_truth->rotation;
  const RotGoreOutcome out = gore_rotation(ang, opt);
  EXPECT_GE(out.lower_bound, inst.planted_inliers->size());
  EXPECT_TRUE(includes(out.surviving, *inst.planted_inliers));
}
