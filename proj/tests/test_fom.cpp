#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "podlab/error.hpp"
#include "podlab/fom.hpp"
#include "test_support.hpp"

namespace podlab {
namespace {

using testing::random_vector;

TEST(StepInitialCondition, QuarterMesh) {
  const FemFunction u = step_initial_condition(Mesh1D(4));
  ASSERT_EQ(u.size(), 3);
  EXPECT_EQ(u[0], 1.0);
  EXPECT_EQ(u[1], 1.0);
  EXPECT_EQ(u[2], 0.0);
}

TEST(StepInitialCondition, TwoCells) {
  const FemFunction u = step_initial_condition(Mesh1D(2));
  ASSERT_EQ(u.size(), 1);
  EXPECT_EQ(u[0], 1.0);
}

TEST(StepInitialCondition, FineMeshCounts) {
  const FemFunction u = step_initial_condition(Mesh1D(512));
  ASSERT_EQ(u.size(), 511);
  for (int j = 0; j < 256; ++j) EXPECT_EQ(u[j], 1.0) << j;
  for (int j = 256; j < 511; ++j) EXPECT_EQ(u[j], 0.0) << j;
}

TEST(FomConfig, Validation) {
  FomConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.n_steps(), 1000);
  cfg.t_final = 0.00105;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = FomConfig{};
  cfg.nu = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = FomConfig{};
  cfg.dt = 2.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(CnStep, ZeroIsAFixedPoint) {
  const FemOperators ops{Mesh1D(16)};
  const FemFunction next = cn_step(Vector::Zero(15), FomConfig{}, ops, 0.0);
  EXPECT_EQ(next.norm(), 0.0);
}

TEST(CnStep, EnergyIdentity) {
  const FemOperators ops{Mesh1D(64)};
  FomConfig cfg;
  cfg.dt = 0.01;
  for (unsigned seed = 0; seed < 5; ++seed) {
    const FemFunction u0 = random_vector(63, seed, 1.5);
    const FemFunction u1 = cn_step(u0, cfg, ops, 0.0);
    const FemFunction mid = 0.5 * (u0 + u1);
    const double lhs = inner_product(u1, u1, InnerProduct::kL2, ops);
    const double rhs = inner_product(u0, u0, InnerProduct::kL2, ops) -
                       2.0 * cfg.dt * cfg.nu *
                           inner_product(mid, mid, InnerProduct::kH01, ops);
    EXPECT_NEAR(lhs, rhs, 10.0 * cfg.newton_tol);
  }
}

// One step of size dt against many sub-steps on the same mesh isolates the
// time discretization; the local error should shrink by about 8 per halving.
TEST(CnStep, ManufacturedLocalErrorIsThirdOrder) {
  const Mesh1D mesh(256);
  const FemOperators ops(mesh);
  const ExpSinSolution exact{0.1};
  const FemFunction u0 = interpolate(exact, mesh, 0.0);
  auto local_error = [&](double dt) {
    FomConfig one;
    one.nu = 0.1;
    one.dt = dt;
    one.t_final = dt;
    one.forcing = ManufacturedForcing{};
    const FemFunction coarse = cn_step(u0, one, ops, 0.0);
    FomConfig fine = one;
    fine.dt = dt / 64.0;
    const SnapshotSet ref = solve_fom(fine, ops, u0);
    const FemFunction diff = coarse - ref.snapshot(ref.n_steps());
    return std::sqrt(inner_product(diff, diff, InnerProduct::kL2, ops));
  };
  const double e1 = local_error(0.1);
  const double e2 = local_error(0.05);
  const double e3 = local_error(0.025);
  EXPECT_NEAR(std::log2(e1 / e2), 3.0, 0.3);
  EXPECT_NEAR(std::log2(e2 / e3), 3.0, 0.3);
}

TEST(ExpSinSolution, ForcingSatisfiesThePde) {
  const ExpSinSolution s{0.05};
  const double pi = std::numbers::pi;
  for (double x : {0.1, 0.37, 0.8}) {
    for (double t : {0.0, 0.4}) {
      const double eps = 1e-5;
      const double ut = (s.value(x, t + eps) - s.value(x, t - eps)) / (2 * eps);
      const double ux = std::exp(-t) * pi * std::cos(pi * x);
      const double uxx = -pi * pi * s.value(x, t);
      const double want = ut - s.nu * uxx + s.value(x, t) * ux;
      EXPECT_NEAR(s.forcing(x, t), want, 1e-8);
    }
  }
}

TEST(SolveFom, TrajectoryShapeAndInitialSnapshot) {
  const FemOperators ops{Mesh1D(16)};
  FomConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.2;
  const FemFunction u0 = step_initial_condition(ops.mesh());
  const SnapshotSet s = solve_fom(cfg, ops, u0);
  EXPECT_EQ(s.n_steps(), 20);
  EXPECT_EQ(s.dim(), 15);
  EXPECT_EQ(s.dt, 0.01);
  for (int i = 0; i < 15; ++i) EXPECT_EQ(s.values(i, 0), u0[i]);
}

TEST(SolveFom, ZeroInitialConditionStaysZero) {
  const FemOperators ops{Mesh1D(16)};
  FomConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.1;
  EXPECT_EQ(solve_fom(cfg, ops, Vector::Zero(15)).values.norm(), 0.0);
}

TEST(SolveFom, EnergyNonIncreasingAndBalanced) {
  const auto& run = testing::small_run();
  const Vector e = squared_norms(run.snaps.values, InnerProduct::kL2, run.ops);
  for (int n = 0; n < run.snaps.n_steps(); ++n) {
    EXPECT_LT(e[n + 1], e[n]);
    const FemFunction mid = 0.5 * (run.snaps.snapshot(n) + run.snaps.snapshot(n + 1));
    const double res = e[n + 1] - e[n] +
                       2.0 * run.cfg.dt * run.cfg.nu *
                           inner_product(mid, mid, InnerProduct::kH01, run.ops);
    EXPECT_LE(std::abs(res), 10.0 * run.cfg.newton_tol);
  }
}

TEST(SolveFom, Deterministic) {
  const FemOperators ops{Mesh1D(64)};
  FomConfig cfg;
  cfg.dt = 0.005;
  cfg.t_final = 0.1;
  const SnapshotSet a = solve_fom(cfg, ops, step_initial_condition(ops.mesh()));
  const SnapshotSet b = solve_fom(cfg, ops, step_initial_condition(ops.mesh()));
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
}

TEST(SolveFom, ReportsFailingStep) {
  const FemOperators ops{Mesh1D(16)};
  FomConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.05;
  cfg.newton_max_iter = 1;
  try {
    static_cast<void>(solve_fom(cfg, ops, step_initial_condition(ops.mesh())));
    FAIL() << "expected NonlinearSolveFailure";
  } catch (const NonlinearSolveFailure& e) {
    EXPECT_EQ(e.step(), 0);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(SolveFom, RejectsWrongInitialSize) {
  const FemOperators ops{Mesh1D(16)};
  EXPECT_THROW(solve_fom(FomConfig{}, ops, Vector::Zero(3)), DimensionMismatch);
}

TEST(L2ErrorAgainst, InterpolantErrorIsSecondOrder) {
  const ExpSinSolution s{0.1};
  const double e1 = l2_error_against(interpolate(s, Mesh1D(16), 0.3), s, Mesh1D(16), 0.3);
  const double e2 = l2_error_against(interpolate(s, Mesh1D(32), 0.3), s, Mesh1D(32), 0.3);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.05);
}

}  // namespace
}  // namespace podlab
