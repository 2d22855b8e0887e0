#include "podlab/rom.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "podlab/error.hpp"
#include "podlab/projection.hpp"

namespace podlab {

namespace {

// Mode values and derivatives at the two Gauss points of every cell.
struct QuadratureTables {
  Matrix values;       // Q x r
  Matrix derivatives;  // Q x r
  Vector weights;      // Q
};

QuadratureTables tabulate(const Matrix& modes, const Mesh1D& mesh) {
  const int n = mesh.n_cells();
  const double h = mesh.h();
  const int r = static_cast<int>(modes.cols());
  QuadratureTables t;
  t.values.resize(2 * n, r);
  t.derivatives.resize(2 * n, r);
  t.weights.resize(2 * n);
  for (int c = 0; c < n; ++c) {
    for (int q = 0; q < 2; ++q) {
      const double s = GaussRule2::kPoints[q];
      const int row = 2 * c + q;
      t.weights[row] = GaussRule2::kWeights[q] * h;
      for (int i = 0; i < r; ++i) {
        const double left = c > 0 ? modes(c - 1, i) : 0.0;
        const double right = c + 1 < n ? modes(c, i) : 0.0;
        t.values(row, i) = left * (1.0 - s) + right * s;
        t.derivatives(row, i) = (right - left) / h;
      }
    }
  }
  return t;
}

}  // namespace

Vector RomOperators::nonlinear(const Vector& a) const {
  Vector out = Vector::Zero(r);
  for (int k = 0; k < r; ++k) out.noalias() += a[k] * (tensor_slices[k] * a);
  return out;
}

Matrix RomOperators::nonlinear_jacobian(const Vector& a) const {
  Matrix jac = Matrix::Zero(r, r);
  for (int k = 0; k < r; ++k) {
    jac += a[k] * tensor_slices[k];
    jac.col(k) += tensor_slices[k] * a;
  }
  return jac;
}

RomOperators assemble_rom(const PodBasis& basis, int r, const FemOperators& ops,
                          const FemFunction& u0, RomInitialCondition init) {
  basis.check_rank(r);
  if (u0.size() != ops.dim() || basis.modes.rows() != ops.dim()) {
    throw DimensionMismatch("assemble_rom: basis or u0 does not match mesh");
  }
  const Matrix phi = basis.modes.leftCols(r);
  RomOperators rom;
  rom.r = r;
  rom.mass_r = phi.transpose() * ops.mass().apply(phi);
  rom.stiff_r = phi.transpose() * ops.stiffness().apply(phi);
  rom.mass_r = 0.5 * (rom.mass_r + rom.mass_r.transpose()).eval();
  rom.stiff_r = 0.5 * (rom.stiff_r + rom.stiff_r.transpose()).eval();

  const QuadratureTables t = tabulate(phi, ops.mesh());
  rom.tensor_slices.resize(r);
  for (int k = 0; k < r; ++k) {
    const Vector wk = t.weights.cwiseProduct(t.derivatives.col(k));
    rom.tensor_slices[k] = t.values.transpose() * wk.asDiagonal() * t.values;
  }

  const ProjectionKind kind = init == RomInitialCondition::kRitz
                                  ? ProjectionKind::kRitz
                                  : ProjectionKind::kPodH;
  rom.a0 = Projector(basis, r, kind, ops).coefficients(Matrix(u0)).col(0);
  return rom;
}

namespace {

constexpr double kStagnation = 8.0 * std::numeric_limits<double>::epsilon();
// A small residual alone is not enough on a decayed state; the last update
// must also be small so that quadratic convergence puts the error at rounding.
constexpr double kIncrement = 1e-8;

}  // namespace

Vector rom_step(const Vector& a_prev, const RomOperators& rom, double nu,
                double dt, const RomSolverOptions& opts) {
  if (a_prev.size() != rom.r) {
    throw DimensionMismatch("rom_step: coefficient vector has wrong length");
  }
  const Vector mass_prev = rom.mass_r * a_prev;
  Vector a = a_prev;
  double residual_norm = 0.0;
  double last_delta = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= opts.newton_max_iter; ++iter) {
    const Vector mid = 0.5 * (a + a_prev);
    const Vector residual = (rom.mass_r * a - mass_prev) / dt +
                            nu * (rom.stiff_r * mid) + rom.nonlinear(mid);
    residual_norm = residual.norm();
    if (residual_norm <= opts.newton_tol && last_delta <= kIncrement * a.norm()) {
      return a;
    }
    if (iter == opts.newton_max_iter) break;
    const Matrix jac = rom.mass_r / dt + 0.5 * nu * rom.stiff_r +
                       0.5 * rom.nonlinear_jacobian(mid);
    const Vector delta = jac.partialPivLu().solve(residual);
    a -= delta;
    last_delta = delta.norm();
    if (last_delta <= kStagnation * a.norm()) return a;
  }
  throw NonlinearSolveFailure("reduced Newton iteration stalled at residual " +
                                  std::to_string(residual_norm),
                              residual_norm, -1);
}

RomTrajectory solve_rom(const RomOperators& rom, double nu, double dt,
                        int n_steps, const RomSolverOptions& opts) {
  if (n_steps < 1) throw InvalidArgument("solve_rom: n_steps must be >= 1");
  if (!(nu > 0.0) || !(dt > 0.0)) {
    throw InvalidArgument("solve_rom: nu and dt must be positive");
  }
  RomTrajectory traj;
  traj.dt = dt;
  traj.coefficients.resize(rom.r, n_steps + 1);
  traj.coefficients.col(0) = rom.a0;
  for (int n = 0; n < n_steps; ++n) {
    try {
      traj.coefficients.col(n + 1) =
          rom_step(traj.coefficients.col(n), rom, nu, dt, opts);
    } catch (const NonlinearSolveFailure& e) {
      throw NonlinearSolveFailure("reduced time step " + std::to_string(n) +
                                      ": " + e.what(),
                                  e.residual(), n);
    }
  }
  return traj;
}

SnapshotSet lift(const RomTrajectory& traj, const PodBasis& basis, int r) {
  if (traj.coefficients.rows() != r) {
    throw DimensionMismatch("lift: trajectory has " +
                            std::to_string(traj.coefficients.rows()) +
                            " coefficients, expected " + std::to_string(r));
  }
  basis.check_rank(r);
  SnapshotSet out;
  out.dt = traj.dt;
  out.values = basis.modes.leftCols(r) * traj.coefficients;
  return out;
}

TimestepRestriction timestep_restriction_check(double nu, double dt,
                                               const RomTrajectory& traj,
                                               const RomOperators& rom) {
  TimestepRestriction out;
  for (int n = 0; n < traj.n_steps(); ++n) {
    const Vector mid =
        0.5 * (traj.coefficients.col(n) + traj.coefficients.col(n + 1));
    out.max_mid_l2 = std::max(out.max_mid_l2, std::sqrt(mid.dot(rom.mass_r * mid)));
  }
  if (out.max_mid_l2 == 0.0) {
    // Zero trajectory: the restriction is vacuous.
    out.c_factor = std::numeric_limits<double>::infinity();
    out.bound_stability = out.c_factor;
    out.bound_error = out.c_factor;
  } else {
    out.c_factor = std::pow(out.max_mid_l2, -4.0);
    const double nu3 = nu * nu * nu;
    out.bound_stability = 4.0 * out.c_factor * nu3 / 27.0;
    out.bound_error = 2.0 * out.c_factor * nu3 / 27.0;
  }
  out.stability_ok = dt < out.bound_stability;
  out.error_ok = dt <= out.bound_error;
  return out;
}

}  // namespace podlab
