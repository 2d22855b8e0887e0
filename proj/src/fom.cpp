#include "podlab/fom.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "podlab/error.hpp"

namespace podlab {

namespace {

// 5-point Gauss-Legendre rule mapped to [0, 1].
constexpr double kGauss5Points[5] = {
    0.046910077030668003601, 0.23076534494715845448, 0.5,
    0.76923465505284154552, 0.95308992296933199640};
constexpr double kGauss5Weights[5] = {
    0.11846344252809454376, 0.23931433524968323402, 0.28444444444444444444,
    0.23931433524968323402, 0.11846344252809454376};

constexpr double kPi = std::numbers::pi;

inline double nodal(const FemFunction& u, int g, int n_cells) {
  return (g == 0 || g == n_cells) ? 0.0 : u[g - 1];
}

constexpr double kStagnation = 8.0 * std::numeric_limits<double>::epsilon();
// A small residual alone is not enough on a decayed state; the last update
// must also be small so that quadratic convergence puts the error at rounding.
constexpr double kIncrement = 1e-8;

}  // namespace

double ExpSinSolution::value(double x, double t) const {
  return std::exp(-t) * std::sin(kPi * x);
}

double ExpSinSolution::forcing(double x, double t) const {
  const double e = std::exp(-t);
  const double s = std::sin(kPi * x);
  const double c = std::cos(kPi * x);
  // u_t - nu u_xx + u u_x
  return -e * s + nu * kPi * kPi * e * s + e * e * kPi * s * c;
}

int FomConfig::n_steps() const {
  return static_cast<int>(std::llround(t_final / dt));
}

void FomConfig::validate() const {
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(t_final > 0.0)) throw InvalidArgument("t_final must be positive");
  if (dt > t_final) throw InvalidArgument("dt must not exceed t_final");
  if (!(newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
  if (newton_max_iter < 1) {
    throw InvalidArgument("newton_max_iter must be at least 1");
  }
  const int n = n_steps();
  if (std::abs(n * dt - t_final) >= 1e-12 * t_final) {
    throw InvalidArgument("t_final is not an integer multiple of dt");
  }
}

FemFunction step_initial_condition(const Mesh1D& mesh) {
  FemFunction u(mesh.n_interior());
  // x_j <= 1/2  <=>  2 j <= n_cells, evaluated in integers so the node at
  // exactly 1/2 lands on the closed side.
  for (int j = 1; j < mesh.n_cells(); ++j) {
    u[j - 1] = 2 * j <= mesh.n_cells() ? 1.0 : 0.0;
  }
  return u;
}

FemFunction interpolate(const ExpSinSolution& exact, const Mesh1D& mesh,
                        double t) {
  FemFunction u(mesh.n_interior());
  for (int j = 1; j < mesh.n_cells(); ++j) u[j - 1] = exact.value(mesh.node(j), t);
  return u;
}

Vector forcing_load(const FomConfig& cfg, const Mesh1D& mesh, double t) {
  Vector load = Vector::Zero(mesh.n_interior());
  if (std::holds_alternative<ZeroForcing>(cfg.forcing)) return load;

  const ExpSinSolution exact{cfg.nu};
  const int n = mesh.n_cells();
  const double h = mesh.h();
  for (int c = 0; c < n; ++c) {
    double left = 0.0;
    double right = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double s = kGauss5Points[q];
      const double f = exact.forcing(mesh.node(c) + s * h, t);
      left += kGauss5Weights[q] * h * f * (1.0 - s);
      right += kGauss5Weights[q] * h * f * s;
    }
    if (c > 0) load[c - 1] += left;
    if (c + 1 < n) load[c] += right;
  }
  return load;
}

FemFunction cn_step(const FemFunction& u_prev, const FomConfig& cfg,
                    const FemOperators& ops, double t_n) {
  if (u_prev.size() != ops.dim()) {
    throw DimensionMismatch("cn_step: state size does not match mesh");
  }
  const Mesh1D& mesh = ops.mesh();
  const double dt = cfg.dt;
  const Vector load = forcing_load(cfg, mesh, t_n + 0.5 * dt);
  const Vector mass_prev = ops.mass().apply(u_prev);

  FemFunction u = u_prev;
  double residual_norm = 0.0;
  double last_delta = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= cfg.newton_max_iter; ++iter) {
    const FemFunction mid = 0.5 * (u + u_prev);
    const Vector residual = (ops.mass().apply(u) - mass_prev) / dt +
                            cfg.nu * ops.stiffness().apply(mid) +
                            nonlinear_form(mid, mesh) - load;
    residual_norm = residual.norm();
    if (residual_norm <= cfg.newton_tol && last_delta <= kIncrement * u.norm()) {
      return u;
    }
    if (iter == cfg.newton_max_iter) break;

    Tridiagonal jac(ops.dim());
    jac.add_scaled(ops.mass(), 1.0 / dt);
    jac.add_scaled(ops.stiffness(), 0.5 * cfg.nu);
    jac.add_scaled(nonlinear_jacobian(mid, mesh), 0.5);
    const Vector delta = jac.solve(residual);
    u -= delta;
    last_delta = delta.norm();
    // The residual of a fine mesh can bottom out above an absolute tolerance;
    // an update at rounding level means the iterate cannot improve further.
    if (last_delta <= kStagnation * u.norm()) return u;
  }
  throw NonlinearSolveFailure(
      "Crank-Nicolson Newton iteration stalled at residual " +
          std::to_string(residual_norm),
      residual_norm, -1);
}

SnapshotSet solve_fom(const FomConfig& cfg, const FemOperators& ops,
                      const FemFunction& u0) {
  cfg.validate();
  if (u0.size() != ops.dim()) {
    throw DimensionMismatch("solve_fom: initial condition size mismatch");
  }
  const int n_steps = cfg.n_steps();
  SnapshotSet snaps;
  snaps.dt = cfg.dt;
  snaps.values.resize(ops.dim(), n_steps + 1);
  snaps.values.col(0) = u0;
  for (int n = 0; n < n_steps; ++n) {
    try {
      snaps.values.col(n + 1) = cn_step(snaps.values.col(n), cfg, ops, n * cfg.dt);
    } catch (const NonlinearSolveFailure& e) {
      throw NonlinearSolveFailure(
          "time step " + std::to_string(n) + ": " + e.what(), e.residual(), n);
    }
  }
  return snaps;
}

double l2_error_against(const FemFunction& u, const ExpSinSolution& exact,
                        const Mesh1D& mesh, double t) {
  const int n = mesh.n_cells();
  const double h = mesh.h();
  double sum = 0.0;
  for (int c = 0; c < n; ++c) {
    const double a = nodal(u, c, n);
    const double b = nodal(u, c + 1, n);
    for (int q = 0; q < 5; ++q) {
      const double s = kGauss5Points[q];
      const double diff = a * (1.0 - s) + b * s - exact.value(mesh.node(c) + s * h, t);
      sum += kGauss5Weights[q] * h * diff * diff;
    }
  }
  return std::sqrt(sum);
}

}  // namespace podlab
