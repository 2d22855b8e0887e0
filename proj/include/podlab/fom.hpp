#pragma once

#include <variant>

#include "podlab/mesh_fem.hpp"

namespace podlab {

struct ZeroForcing {};

/// Forcing that makes u(x, t) = exp(-t) sin(pi x) an exact solution.
struct ManufacturedForcing {};

using Forcing = std::variant<ZeroForcing, ManufacturedForcing>;

/// Exact solution exp(-t) sin(pi x) and its right-hand side for viscosity nu.
struct ExpSinSolution {
  double nu;

  [[nodiscard]] double value(double x, double t) const;
  [[nodiscard]] double forcing(double x, double t) const;
};

struct FomConfig {
  double nu = 1e-2;
  double dt = 1e-3;
  double t_final = 1.0;
  double newton_tol = 1e-12;
  int newton_max_iter = 30;
  Forcing forcing = ZeroForcing{};

  /// Number of time steps N = round(t_final / dt).
  [[nodiscard]] int n_steps() const;
  /// Throws InvalidArgument when parameters are out of range or t_final is
  /// not an integer multiple of dt.
  void validate() const;
};

/// Time-indexed snapshots u^0..u^N, stored as the columns of `values`.
struct SnapshotSet {
  double dt = 0.0;
  Matrix values;  // dim x (N + 1)

  [[nodiscard]] int n_steps() const noexcept {
    return static_cast<int>(values.cols()) - 1;
  }
  [[nodiscard]] int dim() const noexcept {
    return static_cast<int>(values.rows());
  }
  [[nodiscard]] FemFunction snapshot(int k) const { return values.col(k); }
};

/// Nodal interpolant of the step profile: 1 on (0, 1/2], 0 on (1/2, 1).
FemFunction step_initial_condition(const Mesh1D& mesh);

/// Nodal interpolant of a manufactured solution at time t.
FemFunction interpolate(const ExpSinSolution& exact, const Mesh1D& mesh,
                        double t);

/// Load vector (f(., t), phi_i) for the configured forcing.
Vector forcing_load(const FomConfig& cfg, const Mesh1D& mesh, double t);

/// One Crank-Nicolson step from t_n to t_n + dt, solved with Newton's method.
/// Throws NonlinearSolveFailure (step index -1) if the residual tolerance is
/// not reached.
FemFunction cn_step(const FemFunction& u_prev, const FomConfig& cfg,
                    const FemOperators& ops, double t_n);

/// Full trajectory from u0; snapshot 0 is u0 unchanged.
SnapshotSet solve_fom(const FomConfig& cfg, const FemOperators& ops,
                      const FemFunction& u0);

/// L2(0,1) distance between a P1 function and the manufactured solution at
/// time t, integrated with a 5-point Gauss rule per cell.
double l2_error_against(const FemFunction& u, const ExpSinSolution& exact,
                        const Mesh1D& mesh, double t);

}  // namespace podlab
