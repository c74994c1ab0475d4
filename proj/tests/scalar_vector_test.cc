#include "issgf/scalar_vector.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "issgf/errors.h"
#include "issgf/linearization.h"
#include "issgf/random.h"

namespace issgf {
namespace {

Matrix Row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

TEST(AbCoordinatesTest, Examples) {
  const ProblemSpec spec(Row({2.0}), 1);
  const AbCoordinates sym = ToAb(spec, {Row({1}), Row({1})});
  EXPECT_EQ(sym.a(0), 1.0);
  EXPECT_EQ(sym.b(0), 0.0);
  EXPECT_EQ(sym.F, 1.0);
  const AbCoordinates anti = ToAb(spec, {Row({-1}), Row({1})});
  EXPECT_EQ(anti.a(0), 0.0);
  EXPECT_EQ(anti.b(0), 1.0);
  EXPECT_THROW(ToAb(ProblemSpec(Matrix::Ones(2, 1), 2), {Matrix::Ones(2, 2), Row({1, 1})}),
               InvalidArgument);
}

TEST(AbCoordinatesTest, RoundTripAndResidual) {
  auto rng = MakeStream(1, "ab");
  for (int t = 0; t < 20; ++t) {
    const int k = 1 + t % 4;
    const ProblemSpec spec(Row({0.5 + t * 0.1}), k);
    const ParamState z{UniformMatrix(rng, 1, k), UniformMatrix(rng, 1, k)};
    const AbCoordinates ab = ToAb(spec, z);
    const ParamState back = FromAb(ab.a, ab.b);
    EXPECT_LE((back.Stacked() - z.Stacked()).norm(), 1e-15);
    EXPECT_NEAR(ab.F, Residual(spec, z)(0, 0), 1e-14);
    EXPECT_NEAR(ab.a_bar, ab.a.squaredNorm(), 1e-15);
  }
}

TEST(AbCoordinatesTest, OriginLinearizationInInterleavedOrder) {
  // In vec([P; Q]) order the origin Jacobian is I_k ⊗ [[0, Ȳ], [Ȳ, 0]] with
  // eigenvectors e_i ⊗ [±1; 1].
  for (int k = 1; k <= 3; ++k) {
    const double y = 1.7;
    const ProblemSpec spec(Row({y}), k);
    const Matrix H = Hessian(spec, ParamState::Zero(spec)).Full();
    const Matrix Pi = StackedOrderPermutation(1, 1, k);
    const Matrix block = (Matrix(2, 2) << 0, y, y, 0).finished();
    EXPECT_EQ(Pi * H * Pi.transpose(), Kron(Matrix::Identity(k, k), block));
  }
}

TEST(ClassifyTest, Examples) {
  const ProblemSpec spec(Row({1.0}), 2);
  EXPECT_EQ(ClassifyInitialCondition(spec, {Row({-2, 1}), Row({2, -1})}),
            ScalarFate::kConvergesToSaddle);
  const ProblemSpec one(Row({1.0}), 1);
  EXPECT_EQ(ClassifyInitialCondition(one, {Row({0.1}), Row({0.1})}),
            ScalarFate::kConvergesToTarget);
  EXPECT_THROW(ClassifyInitialCondition(ProblemSpec(Row({0.0}), 1),
                                        {Row({0.1}), Row({0.1})}),
               InvalidArgument);
}

TEST(ClassifyTest, NegativeTargetSwapsRoles) {
  const ProblemSpec spec(Row({-1.0}), 1);
  EXPECT_EQ(ClassifyInitialCondition(spec, {Row({0.5}), Row({0.5})}),
            ScalarFate::kConvergesToSaddle);
  EXPECT_EQ(ClassifyInitialCondition(spec, {Row({-0.5}), Row({0.5})}),
            ScalarFate::kConvergesToTarget);
  IntegratorConfig cfg;
  cfg.t_end = 40;
  cfg.record_stride = 1000;
  const Trajectory saddle = Simulate(spec, {Row({0.5}), Row({0.5})}, {}, cfg);
  EXPECT_LE(saddle.states.back().Norm(), 1e-6);
  const Trajectory target = Simulate(spec, {Row({-0.5}), Row({0.6})}, {}, cfg);
  EXPECT_LE(target.monitors.loss.back(), 1e-12);
}

TEST(SafeSetTest, AdmissibleBound) {
  EXPECT_EQ(AdmissibleDisturbanceBound(0.0, 1.0), 0.0);
  EXPECT_NEAR(AdmissibleDisturbanceBound(1.0, 1.0), 0.75 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(AdmissibleDisturbanceBound(1.0, 1.0), 0.530330, 1e-6);
  EXPECT_LT(AdmissibleDisturbanceBound(2.0 - 1e-9, 1.0), 1e-8);
  EXPECT_THROW(AdmissibleDisturbanceBound(2.0, 1.0), InvalidArgument);
  EXPECT_THROW(AdmissibleDisturbanceBound(-0.1, 1.0), InvalidArgument);
  EXPECT_EQ(SafeSetParams(1.0, 1.0).admissible_bound(), AdmissibleDisturbanceBound(1.0, 1.0));
}

TEST(SafeSetTest, Membership) {
  const SafeSetParams params(1.0, 1.0);
  const SafeSetMembership in = InSafeSet({Row({1}), Row({1})}, params);
  EXPECT_TRUE(in.inside);
  EXPECT_EQ(in.margin, 3.0);
  const SafeSetMembership out = InSafeSet({Row({-1}), Row({1})}, SafeSetParams(0.7, 1.0));
  EXPECT_FALSE(out.inside);
  EXPECT_NEAR(out.margin, -0.49, 1e-15);
  const SafeSetMembership edge = InSafeSet({Row({0.25, 0}), Row({0.25, 0})},
                                           SafeSetParams(0.5, 1.0));
  EXPECT_TRUE(edge.inside);
  EXPECT_EQ(edge.margin, 0.0);
}

TEST(SumNormRateTest, ExactRateAndLowerBound) {
  auto rng = MakeStream(2, "rate");
  for (int t = 0; t < 50; ++t) {
    const int k = 1 + t % 3;
    const ProblemSpec spec(Row({1.0}), k);
    const ParamState z{UniformMatrix(rng, 1, k), UniformMatrix(rng, 1, k)};
    const Matrix U = UniformMatrix(rng, 1, k), V = UniformMatrix(rng, 1, k);
    const SumNormRate r = EvaluateSumNormRate(spec, z, U, V);
    // d/dt ‖P + Q‖² = 2⟨P + Q, Ṗ + Q̇⟩.
    const ParamState f = DisturbedField(spec, z, U, V);
    const double exact = 2 * (z.P + z.Q).cwiseProduct(f.P + f.Q).sum();
    EXPECT_NEAR(r.exact, exact, 1e-13);
    EXPECT_LE(r.lower_bound, r.exact + 1e-13);
  }
}

TEST(InvarianceTest, ZeroAndAdmissibleBudgets) {
  IntegratorConfig cfg;
  cfg.t_end = 5;
  cfg.record_stride = 10;
  InvarianceStressOptions opts;
  opts.seed = 3;
  opts.budget_scale = 0.0;
  const InvarianceStressReport quiet =
      InvarianceStressTest(SafeSetParams(1.0, 1.0), 6, cfg, opts);
  EXPECT_EQ(quiet.escapes, 0);
  opts.budget_scale = 1.0;
  opts.k = 2;
  const InvarianceStressReport loud =
      InvarianceStressTest(SafeSetParams(1.0, 1.0), 10, cfg, opts);
  EXPECT_EQ(loud.runs, 10);
  EXPECT_EQ(loud.escapes, 0);
  EXPECT_EQ(loud.energy_violations, 0);
  EXPECT_NEAR(loud.budget, 0.530330, 1e-6);
  // Thread count does not change the report.
  opts.threads = 3;
  const InvarianceStressReport threaded =
      InvarianceStressTest(SafeSetParams(1.0, 1.0), 10, cfg, opts);
  EXPECT_EQ(InvarianceStressReportToJson(threaded), InvarianceStressReportToJson(loud));
}

TEST(PhasePlaneTest, GridLayoutAndField) {
  PhaseGrid grid;
  const PhasePlane plane = PhasePlaneField(1.0, grid, {1.0}, {0.5});
  ASSERT_EQ(plane.samples.size(), 61u * 61u);
  EXPECT_EQ(plane.samples[0].P, -3.0);
  EXPECT_NEAR(plane.samples[1].P, -2.9, 1e-15);
  EXPECT_EQ(plane.samples[1].Q, -3.0);
  EXPECT_EQ(plane.samples.back().P, 3.0);
  for (const auto& s : plane.samples) {
    EXPECT_EQ(s.dP, (1.0 - s.P * s.Q) * s.Q);
    EXPECT_EQ(s.dQ, (1.0 - s.P * s.Q) * s.P);
  }
  int target = 0, sum = 0, product = 0;
  for (const auto& c : plane.overlays) {
    if (c.kind == "target") ++target;
    if (c.kind == "sum") ++sum;
    if (c.kind == "product") ++product;
    if (c.kind == "target") {
      for (const auto& p : c.points) EXPECT_NEAR(p[0] * p[1], 1.0, 1e-12);
    }
  }
  EXPECT_EQ(target, 2);
  EXPECT_EQ(sum, 2);
  EXPECT_EQ(product, 2);
}

TEST(PhasePlaneTest, DirectionReversal) {
  PhaseGrid grid;
  grid.p_min = grid.q_min = 0.5;
  grid.p_max = grid.q_max = 2.0;
  grid.steps = 2;
  const PhasePlane plane = PhasePlaneField(1.0, grid);
  EXPECT_GT(plane.samples.front().dP + plane.samples.front().dQ, 0.0);  // (0.5, 0.5)
  EXPECT_LT(plane.samples.back().dP + plane.samples.back().dQ, 0.0);    // (2, 2)
  EXPECT_EQ(plane.samples.back().dP, -6.0);
}

TEST(PhasePlaneTest, CsvAndValidation) {
  PhaseGrid grid;
  grid.steps = 3;
  const PhasePlane plane = PhasePlaneField(1.0, grid);
  std::ostringstream out;
  WritePhasePlaneCsv(out, plane);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "P,Q,dP,dQ");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
  grid.steps = 1;
  const PhasePlane single = PhasePlaneField(1.0, grid);
  ASSERT_EQ(single.samples.size(), 1u);
  EXPECT_EQ(single.samples[0].P, 0.0);
  grid.steps = 0;
  EXPECT_THROW(PhasePlaneField(1.0, grid), InvalidArgument);
  EXPECT_TRUE(PhasePlaneOverlaysToJson(plane).is_object() ||
              PhasePlaneOverlaysToJson(plane).is_array());
}

}  // namespace
}  // namespace issgf
