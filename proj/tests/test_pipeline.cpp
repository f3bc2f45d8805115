#include "gorereg/pipeline.hpp"

#include "gorereg/rigid_gore.hpp"
#include "gorereg/rot_gore.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace gorereg;

namespace {

Instance instance(std::size_t n, double eta, std::uint64_t seed,
                  ProblemMode mode = ProblemMode::rotation) {
  SyntheticSpec s;
  s.n = n;
  s.eta = eta;
  s.seed = seed;
  s.mode = mode;
  return generate(s);
}

RunRecord run(const Instance& inst, Method m, ProblemMode p = ProblemMode::rotation) {
  PipelineOptions o;
  o.method = m;
  o.problem = p;
  return run_pipeline(inst, o);
}

}  // namespace

TEST(Pipeline, MethodNamesRoundTrip) {
  for (Method m : {Method::gore, Method::ransac, Method::bnb, Method::gore_ransac,
                   Method::gore_bnb, Method::rgore_bnb, Method::gore_abnb}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_FALSE(parse_method("gore+"));
  EXPECT_EQ(parse_problem("rigid"), ProblemMode::rigid);
  EXPECT_FALSE(parse_problem("affine"));
}

TEST(Pipeline, ExactMethodsAgree) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Instance inst = instance(40, 0.2 + 0.12 * static_cast<double>(seed), 10 + seed);
    const RunRecord bnb = run(inst, Method::bnb);
    ASSERT_TRUE(bnb.optimal && *bnb.optimal);
    for (Method m : {Method::gore_bnb, Method::rgore_bnb, Method::gore_abnb}) {
      const RunRecord r = run(inst, m);
      ASSERT_TRUE(r.optimal && *r.optimal) << method_name(m);
      EXPECT_EQ(r.consensus.size(), bnb.consensus.size()) << method_name(m) << " seed " << seed;
      EXPECT_EQ(r.lower_bound, r.consensus.size());
    }
  }
}

TEST(Pipeline, GoreKeepsEveryPlantedInlier) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = instance(100, 0.8, 20 + seed);
    const RunRecord r = run(inst, Method::gore);
    ASSERT_TRUE(r.metrics.recall);
    EXPECT_EQ(*r.metrics.recall, 1.0);
    EXPECT_FALSE(r.optimal);
    EXPECT_TRUE(std::is_sorted(r.surviving.begin(), r.surviving.end()));
  }
}

TEST(Pipeline, NonGoreMethodsKeepEverything) {
  const Instance inst = instance(50, 0.5, 30);
  EXPECT_EQ(run(inst, Method::ransac).surviving.size(), 50u);
  EXPECT_EQ(run(inst, Method::bnb).surviving.size(), 50u);
}

TEST(Pipeline, GoreRansacIsDeterministic) {
  const Instance inst = instance(100, 0.7, 31);
  const RunRecord a = run(inst, Method::gore_ransac);
  const RunRecord b = run(inst, Method::gore_ransac);
  EXPECT_EQ(a.consensus, b.consensus);
  EXPECT_EQ(a.surviving, b.surviving);
}

TEST(Pipeline, RigidRejectsBnbMethods) {
  const Instance inst = instance(30, 0.5, 32, ProblemMode::rigid);
  for (Method m : {Method::bnb, Method::gore_bnb, Method::rgore_bnb, Method::gore_abnb}) {
    EXPECT_FALSE(method_supports(m, ProblemMode::rigid));
    EXPECT_THROW(run(inst, m, ProblemMode::rigid), InputError);
  }
  const RunRecord g = run(inst, Method::gore, ProblemMode::rigid);
  EXPECT_EQ(*g.metrics.recall, 1.0);
  EXPECT_EQ(g.lower_bound, g.consensus.size());
  const RunRecord gr = run(inst, Method::gore_ransac, ProblemMode::rigid);
  EXPECT_EQ(gr.consensus, consensus_rigid(gr.transform, inst.correspondences, 0.5));
}

TEST(Pipeline, ThresholdComesFromOptionsOrInstance) {
  Instance inst = instance(20, 0.0, 33);
  PipelineOptions o;
  EXPECT_EQ(effective_xi(inst, o), 0.5);
  o.xi = 0.75;
  EXPECT_EQ(effective_xi(inst, o), 0.75);
  o.xi.reset();
  inst.xi.reset();
  EXPECT_THROW(effective_xi(inst, o), InputError);
  o.xi = 0.5;
  EXPECT_THROW(run_pipeline(Instance{}, o), InputError);
}

TEST(Pipeline, PrefilteredPairsStayOutOfTheConsensus) {
  Instance inst = instance(20, 0.0, 34);
  inst.correspondences.push_back({Vec3(10, 0, 0), Vec3(0, 20, 0), 20});
  for (Method m : {Method::gore, Method::bnb, Method::gore_bnb}) {
    const RunRecord r = run(inst, m);
    EXPECT_EQ(std::count(r.consensus.begin(), r.consensus.end(), 20u), 0);
    if (m == Method::gore) {
      EXPECT_EQ(std::count(r.surviving.begin(), r.surviving.end(), 20u), 0);
    }
  }
  EXPECT_EQ(run(inst, Method::bnb).consensus.size(), 20u);
}
