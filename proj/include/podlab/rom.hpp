#pragma once

#include <vector>

#include "podlab/fom.hpp"
#include "podlab/pod.hpp"

namespace podlab {

/// How the initial reduced coefficients are obtained from u_h^0.
enum class RomInitialCondition {
  kPodProjection,  // H-orthogonal projection in the basis inner product
  kRitz,           // Ritz projection
};

/// Reduced Crank-Nicolson Galerkin operators of dimension r.
struct RomOperators {
  int r = 0;
  Matrix mass_r;   // (phi_j, phi_i)_{L2}
  Matrix stiff_r;  // ((phi_j)_x, (phi_i)_x)_{L2}
  /// tensor_slices[k](i, j) = int phi_j (phi_k)_x phi_i dx
  std::vector<Matrix> tensor_slices;
  Vector a0;

  [[nodiscard]] double tensor(int i, int j, int k) const {
    return tensor_slices[k](i, j);
  }
  /// B(a, a)_i = sum_{j,k} B[i][j][k] a_j a_k.
  [[nodiscard]] Vector nonlinear(const Vector& a) const;
  /// Jacobian of nonlinear() at a.
  [[nodiscard]] Matrix nonlinear_jacobian(const Vector& a) const;
};

struct RomTrajectory {
  double dt = 0.0;
  Matrix coefficients;  // r x (N + 1)

  [[nodiscard]] int n_steps() const noexcept {
    return static_cast<int>(coefficients.cols()) - 1;
  }
};

struct RomSolverOptions {
  double newton_tol = 1e-12;
  int newton_max_iter = 30;
};

RomOperators assemble_rom(
    const PodBasis& basis, int r, const FemOperators& ops,
    const FemFunction& u0,
    RomInitialCondition init = RomInitialCondition::kPodProjection);

/// One reduced Crank-Nicolson step with zero forcing.
Vector rom_step(const Vector& a_prev, const RomOperators& rom, double nu,
                double dt, const RomSolverOptions& opts = {});

RomTrajectory solve_rom(const RomOperators& rom, double nu, double dt,
                        int n_steps, const RomSolverOptions& opts = {});

/// u_r^n = sum_i a_i^n phi_i.
SnapshotSet lift(const RomTrajectory& traj, const PodBasis& basis, int r);

struct TimestepRestriction {
  double max_mid_l2 = 0.0;  // max_n ||u_r^{n+1/2}||_{L2}
  double c_factor = 0.0;    // max_mid_l2^{-4}; +inf for a zero trajectory
  double bound_stability = 0.0;  // 4 C nu^3 / 27
  double bound_error = 0.0;      // 2 C nu^3 / 27
  bool stability_ok = false;     // dt < bound_stability
  bool error_ok = false;         // dt <= bound_error
};

/// Advisory time-step/viscosity relation check on a completed trajectory.
TimestepRestriction timestep_restriction_check(double nu, double dt,
                                               const RomTrajectory& traj,
                                               const RomOperators& rom);

}  // namespace podlab
