#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "podlab/error.hpp"
#include "podlab/projection.hpp"
#include "podlab/rom.hpp"
#include "test_support.hpp"

namespace podlab {
namespace {

using testing::random_vector;
using testing::small_run;

RomOperators small_rom(InnerProduct ip, bool dq, int r) {
  const auto& run = small_run();
  return assemble_rom(run.basis(ip, dq), r, run.ops, run.snaps.snapshot(0));
}

TEST(AssembleRom, ReducedGramMatrices) {
  const RomOperators l2 = small_rom(InnerProduct::kL2, true, 6);
  EXPECT_LE((l2.mass_r - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  const RomOperators h1 = small_rom(InnerProduct::kH01, true, 6);
  EXPECT_LE((h1.stiff_r - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((h1.mass_r - h1.mass_r.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(h1.r, 6);
  EXPECT_EQ(static_cast<int>(h1.tensor_slices.size()), 6);
}

TEST(AssembleRom, TensorMatchesQuadratureOracle) {
  const auto& run = small_run();
  const PodBasis b = run.basis(InnerProduct::kL2, false);
  const int r = std::min(4, b.d());
  const RomOperators rom = assemble_rom(b, r, run.ops, run.snaps.snapshot(0));
  const int n = run.mesh.n_cells();
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      for (int k = 0; k < r; ++k) {
        const double want =
            testing::trilinear_oracle(b.mode(j), b.mode(k), b.mode(i), n);
        EXPECT_NEAR(rom.tensor(i, j, k), want, 1e-10 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(AssembleRom, InitialCoefficients) {
  const auto& run = small_run();
  const PodBasis b = run.basis(InnerProduct::kH01, true);
  const FemFunction u0 = run.snaps.snapshot(0);
  const RomOperators full = assemble_rom(b, b.d(), run.ops, u0);
  for (int r : {1, 3, 7}) {
    const RomOperators rom = assemble_rom(b, r, run.ops, u0);
    EXPECT_LE((rom.a0 - full.a0.head(r)).norm(), 1e-12 * full.a0.norm());
    EXPECT_LE((b.modes.leftCols(r) * rom.a0 - pod_project(u0, b, r, run.ops)).norm(),
              1e-10 * u0.norm());
  }
  const PodBasis l2 = run.basis(InnerProduct::kL2, true);
  const RomOperators ritz =
      assemble_rom(l2, 5, run.ops, u0, RomInitialCondition::kRitz);
  EXPECT_LE((l2.modes.leftCols(5) * ritz.a0 - ritz_project(u0, l2, 5, run.ops)).norm(),
            1e-9 * u0.norm());
}

TEST(AssembleRom, RejectsBadInputs) {
  const auto& run = small_run();
  const PodBasis b = run.basis(InnerProduct::kL2, false);
  const FemFunction u0 = run.snaps.snapshot(0);
  EXPECT_THROW(assemble_rom(b, 0, run.ops, u0), InvalidArgument);
  EXPECT_THROW(assemble_rom(b, b.d() + 1, run.ops, u0), InvalidArgument);
  EXPECT_THROW(assemble_rom(b, 2, run.ops, Vector::Zero(4)), DimensionMismatch);
}

TEST(RomOperators, NonlinearAntisymmetry) {
  for (InnerProduct ip : {InnerProduct::kL2, InnerProduct::kH01}) {
    const RomOperators rom = small_rom(ip, true, 8);
    for (unsigned seed = 0; seed < 50; ++seed) {
      const Vector a = random_vector(8, seed, 2.0);
      const double inf = a.cwiseAbs().maxCoeff();
      EXPECT_LE(std::abs(a.dot(rom.nonlinear(a))), 1e-10 * (1.0 + inf * inf * inf));
    }
  }
}

TEST(RomOperators, NonlinearMatchesLiftedFullOrderForm) {
  const auto& run = small_run();
  const PodBasis b = run.basis(InnerProduct::kL2, true);
  const RomOperators rom = assemble_rom(b, 6, run.ops, run.snaps.snapshot(0));
  const Vector a = random_vector(6, 9);
  const Vector full = nonlinear_form(b.modes.leftCols(6) * a, run.mesh);
  const Vector want = b.modes.leftCols(6).transpose() * full;
  EXPECT_LE((rom.nonlinear(a) - want).norm(), 1e-10 * std::max(1.0, want.norm()));
}

TEST(RomOperators, JacobianMatchesFiniteDifferences) {
  const RomOperators rom = small_rom(InnerProduct::kH01, false, 5);
  const Vector a = random_vector(5, 21);
  const Matrix jac = rom.nonlinear_jacobian(a);
  const double eps = 1e-6;
  for (int j = 0; j < 5; ++j) {
    const Vector e = testing::hat(5, j);
    const Vector fd = (rom.nonlinear(a + eps * e) - rom.nonlinear(a - eps * e)) / (2 * eps);
    EXPECT_LE((fd - jac.col(j)).norm(), 1e-7 * std::max(1.0, fd.norm()));
  }
}

TEST(SolveRom, DiscreteEnergyBalance) {
  const auto& run = small_run();
  const RomOperators rom = small_rom(InnerProduct::kL2, true, 8);
  const RomTrajectory traj = solve_rom(rom, run.cfg.nu, run.cfg.dt, run.snaps.n_steps());
  ASSERT_EQ(traj.n_steps(), run.snaps.n_steps());
  EXPECT_TRUE((traj.coefficients.col(0).array() == rom.a0.array()).all());
  for (int n = 0; n < traj.n_steps(); ++n) {
    const Vector a = traj.coefficients.col(n);
    const Vector b = traj.coefficients.col(n + 1);
    const Vector mid = 0.5 * (a + b);
    const double res = b.dot(rom.mass_r * b) - a.dot(rom.mass_r * a) +
                       2.0 * run.cfg.dt * run.cfg.nu * mid.dot(rom.stiff_r * mid);
    EXPECT_LE(std::abs(res), 1e-10);
    EXPECT_LE(b.dot(rom.mass_r * b), a.dot(rom.mass_r * a) + 1e-12);
  }
}

TEST(SolveRom, FullSpanReproducesFom) {
  const FemOperators ops{Mesh1D(8)};
  FomConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.3;
  const SnapshotSet snaps = solve_fom(cfg, ops, step_initial_condition(ops.mesh()));
  const PodBasis b = build_basis(snaps, {InnerProduct::kL2, true, 1e-14}, ops);
  ASSERT_EQ(b.d(), ops.dim());
  const RomOperators rom = assemble_rom(b, b.d(), ops, snaps.snapshot(0));
  const SnapshotSet lifted = lift(solve_rom(rom, cfg.nu, cfg.dt, snaps.n_steps()), b, b.d());
  EXPECT_LE((lifted.values - snaps.values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SolveRom, Deterministic) {
  const RomOperators rom = small_rom(InnerProduct::kH01, true, 6);
  const RomTrajectory a = solve_rom(rom, 1e-2, 0.01, 20);
  const RomTrajectory b = solve_rom(rom, 1e-2, 0.01, 20);
  EXPECT_TRUE((a.coefficients.array() == b.coefficients.array()).all());
}

TEST(SolveRom, RejectsBadInputs) {
  const RomOperators rom = small_rom(InnerProduct::kL2, false, 3);
  EXPECT_THROW(solve_rom(rom, 1e-2, 0.01, 0), InvalidArgument);
  EXPECT_THROW(solve_rom(rom, 0.0, 0.01, 5), InvalidArgument);
  EXPECT_THROW(solve_rom(rom, 1e-2, -0.01, 5), InvalidArgument);
  EXPECT_THROW(rom_step(Vector::Zero(2), rom, 1e-2, 0.01), DimensionMismatch);
  RomSolverOptions opts;
  opts.newton_max_iter = 1;
  EXPECT_THROW(solve_rom(rom, 1e-2, 0.01, 5, opts), NonlinearSolveFailure);
}

TEST(Lift, ModeCombination) {
  const auto& run = small_run();
  const PodBasis b = run.basis(InnerProduct::kL2, true);
  RomTrajectory traj;
  traj.dt = 0.5;
  traj.coefficients = Matrix::Zero(3, 2);
  traj.coefficients(1, 0) = 2.0;
  traj.coefficients(2, 1) = -1.0;
  const SnapshotSet s = lift(traj, b, 3);
  EXPECT_EQ(s.dt, 0.5);
  EXPECT_LE((s.snapshot(0) - 2.0 * b.mode(1)).norm(), 1e-15);
  EXPECT_LE((s.snapshot(1) + b.mode(2)).norm(), 1e-15);
  EXPECT_THROW(lift(traj, b, 4), DimensionMismatch);
}

TEST(TimestepRestriction, Bounds) {
  const RomOperators rom = small_rom(InnerProduct::kL2, true, 4);
  RomTrajectory traj;
  traj.dt = 0.1;
  traj.coefficients = Matrix::Zero(4, 3);
  const TimestepRestriction zero = timestep_restriction_check(0.1, 0.1, traj, rom);
  EXPECT_EQ(zero.c_factor, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(zero.stability_ok);
  EXPECT_TRUE(zero.error_ok);

  // Unit mid-point norm gives C = 1: bounds 4 nu^3 / 27 and 2 nu^3 / 27.
  traj.coefficients.col(0)[0] = 1.0;
  traj.coefficients.col(1)[0] = 1.0;
  const double nu = 0.3;
  const TimestepRestriction r1 = timestep_restriction_check(nu, 0.003, traj, rom);
  EXPECT_NEAR(r1.max_mid_l2, 1.0, 1e-10);
  EXPECT_NEAR(r1.c_factor, 1.0, 1e-9);
  EXPECT_NEAR(r1.bound_stability, 4.0 * 0.027 / 27.0, 1e-12);
  EXPECT_NEAR(r1.bound_error, 2.0 * 0.027 / 27.0, 1e-12);
  EXPECT_TRUE(r1.stability_ok);
  EXPECT_FALSE(r1.error_ok);
  const TimestepRestriction r2 = timestep_restriction_check(nu, 0.01, traj, rom);
  EXPECT_FALSE(r2.stability_ok);
}

TEST(AssembleRom, ReducedOperatorsMatchLiftedInnerProducts) {
  const auto& run = small_run();
  for (InnerProduct ip : {InnerProduct::kL2, InnerProduct::kH01}) {
    const PodBasis b = run.basis(ip, true);
    const int r = std::min(7, b.d());
    const RomOperators rom = assemble_rom(b, r, run.ops, run.snaps.snapshot(0));
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        EXPECT_NEAR(rom.mass_r(i, j),
                    inner_product(b.mode(i), b.mode(j), InnerProduct::kL2, run.ops), 1e-12);
        EXPECT_NEAR(rom.stiff_r(i, j),
                    inner_product(b.mode(i), b.mode(j), InnerProduct::kH01, run.ops),
                    1e-12 * std::max(1.0, std::abs(rom.stiff_r(i, j))));
      }
    }
  }
}

}  // namespace
}  // namespace podlab
