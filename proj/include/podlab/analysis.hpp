#pragma once

#include <optional>
#include <string>
#include <vector>

#include "podlab/fom.hpp"
#include "podlab/pod.hpp"
#include "podlab/rom.hpp"

namespace podlab {

struct RomErrors {
  double linf_l2 = 0.0;  // max_k ||e^k||_{L2}^2
  double natural = 0.0;  // linf_l2 + nu dt sum_n ||e_x^{n+1/2}||_{L2}^2
};

/// Errors between FOM snapshots and lifted ROM states on the same time grid.
RomErrors compute_errors(const SnapshotSet& fom, const SnapshotSet& rom_lifted,
                         double nu, const FemOperators& ops);

/// max_k ||u_h^k - R_r u_h^k||_{L2}^2 over all snapshots.
double compute_eta(const SnapshotSet& fom, const PodBasis& basis, int r,
                   const FemOperators& ops);

/// Which bound family a basis gets: plain snapshots, difference quotients
/// with an L2 basis (Ritz-deflated modes), difference quotients with an H01
/// basis (plain modes).
enum class RhsFamily { kNoDq, kDqL2, kDqH01 };

std::string_view to_string(RhsFamily family);
RhsFamily rhs_family(const PodBasis& basis);

struct RhsTerms {
  RhsFamily family = RhsFamily::kNoDq;
  /// Gradient-augmented term and its L2-only counterpart.
  double rhs1 = 0.0;
  double rhs2 = 0.0;
};

/// Mode-weighted eigenvalue tail of the matching family plus
/// dt^2 + dt^4 * i_u_constant.
RhsTerms compute_rhs_terms(const PodBasis& basis, int r, double dt,
                           const FemOperators& ops, double i_u_constant);

struct OptimalityBenchmarks {
  double truly_optimal = 0.0;  // max_{1<=k<=N} ||u^k - Pi_r^W u^k||_W^2
  double optimal_i = 0.0;      // sum_{i>r} lambda_i ||phi_i||_W^2
  double optimal_ii = 0.0;     // sum_{i>r} lambda_i ||phi_i - Pi_r^W phi_i||_W^2
};

OptimalityBenchmarks optimality_benchmarks(const SnapshotSet& fom,
                                           const PodBasis& basis, int r,
                                           InnerProduct w,
                                           const FemOperators& ops);

struct OperatorNorms {
  double s_r_norm = 0.0;      // largest eigenvalue of S_r
  double m_r_inv_norm = 0.0;  // 1 / smallest eigenvalue of M_r
};

OperatorNorms operator_norm_diagnostics(const RomOperators& rom);

struct RegressionPoint {
  int r = 0;
  double abscissa = 0.0;
  double error = 0.0;
};

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int r_min = 0;
  int r_max = 0;
  int n_points = 0;
};

/// Least-squares fit of log10(error) against log10(abscissa) over the points
/// with r_min <= r <= r_max. Needs at least three points, all positive.
RegressionResult regression_order(const std::vector<RegressionPoint>& points,
                                  int r_min, int r_max);

/// One row of a sweep.
struct ErrorReport {
  int r = 0;
  double err_linf_l2 = 0.0;
  double err_natural = 0.0;
  double eta_linf_l2 = 0.0;
  double tail = 0.0;
  RhsTerms rhs;
  OptimalityBenchmarks optimality;
  double s_r_norm = 0.0;
  double m_r_inv_norm = 0.0;
  double phi0_norm = 0.0;  // ||u_r^0 - R_r u_h^0||_{L2}^2
  TimestepRestriction restriction;
};

struct ReportOptions {
  double nu = 1e-2;
  double i_u_constant = 0.0;
  InnerProduct optimality_norm = InnerProduct::kL2;
  RomInitialCondition initial = RomInitialCondition::kPodProjection;
  RomSolverOptions solver;
};

/// Runs the ROM of dimension r and computes every diagnostic for that r.
ErrorReport build_error_report(const SnapshotSet& fom, const PodBasis& basis,
                               int r, const FemOperators& ops,
                               const ReportOptions& opts);

}  // namespace podlab
