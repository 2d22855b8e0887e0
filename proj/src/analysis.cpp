#include "podlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "podlab/error.hpp"
#include "podlab/projection.hpp"

namespace podlab {

RomErrors compute_errors(const SnapshotSet& fom, const SnapshotSet& rom_lifted,
                         double nu, const FemOperators& ops) {
  if (fom.values.rows() != rom_lifted.values.rows() ||
      fom.values.cols() != rom_lifted.values.cols() ||
      std::abs(fom.dt - rom_lifted.dt) > 1e-14 * fom.dt) {
    throw DimensionMismatch("compute_errors: FOM and ROM time grids differ");
  }
  const Matrix err = fom.values - rom_lifted.values;
  RomErrors out;
  out.linf_l2 = squared_norms(err, InnerProduct::kL2, ops).maxCoeff();
  const int n = fom.n_steps();
  out.natural = out.linf_l2;
  if (n > 0) {
    const Matrix mid = 0.5 * (err.leftCols(n) + err.rightCols(n));
    out.natural +=
        nu * fom.dt * squared_norms(mid, InnerProduct::kH01, ops).sum();
  }
  return out;
}

double compute_eta(const SnapshotSet& fom, const PodBasis& basis, int r,
                   const FemOperators& ops) {
  basis.check_rank(r);
  const Projector ritz(basis, r, ProjectionKind::kRitz, ops);
  return squared_norms(fom.values - ritz.apply(fom.values), InnerProduct::kL2,
                       ops)
      .maxCoeff();
}

std::string_view to_string(RhsFamily family) {
  switch (family) {
    case RhsFamily::kNoDq:
      return "noDQ";
    case RhsFamily::kDqL2:
      return "DQ-L2";
    case RhsFamily::kDqH01:
      return "DQ-H01";
  }
  return "?";
}

RhsFamily rhs_family(const PodBasis& basis) {
  if (!basis.use_dq) return RhsFamily::kNoDq;
  return basis.inner_product == InnerProduct::kL2 ? RhsFamily::kDqL2
                                                  : RhsFamily::kDqH01;
}

RhsTerms compute_rhs_terms(const PodBasis& basis, int r, double dt,
                           const FemOperators& ops, double i_u_constant) {
  basis.check_rank(r, 0);
  RhsTerms out;
  out.family = rhs_family(basis);
  const double time_terms = dt * dt + std::pow(dt, 4) * i_u_constant;
  const int d = basis.d();
  double grad_part = 0.0;
  double l2_part = 0.0;
  if (r < d) {
    Matrix tail = basis.modes.rightCols(d - r);
    if (out.family == RhsFamily::kDqL2) {
      const Projector ritz(basis, r, ProjectionKind::kRitz, ops);
      tail -= ritz.apply(tail);
    }
    const auto lambdas = basis.eigenvalues.tail(d - r);
    l2_part = lambdas.dot(squared_norms(tail, InnerProduct::kL2, ops));
    grad_part = lambdas.dot(squared_norms(tail, InnerProduct::kH01, ops));
  }
  out.rhs1 = l2_part + grad_part + time_terms;
  out.rhs2 = l2_part + time_terms;
  return out;
}

OptimalityBenchmarks optimality_benchmarks(const SnapshotSet& fom,
                                           const PodBasis& basis, int r,
                                           InnerProduct w,
                                           const FemOperators& ops) {
  basis.check_rank(r);
  const Projector pi(basis, r, w_orth_kind(w), ops);
  OptimalityBenchmarks out;
  const int n = fom.n_steps();
  if (n > 0) {
    const Matrix later = fom.values.rightCols(n);
    out.truly_optimal = squared_norms(later - pi.apply(later), w, ops).maxCoeff();
  }
  const int d = basis.d();
  if (r < d) {
    const Matrix tail = basis.modes.rightCols(d - r);
    const auto lambdas = basis.eigenvalues.tail(d - r);
    out.optimal_i = lambdas.dot(squared_norms(tail, w, ops));
    out.optimal_ii = lambdas.dot(squared_norms(tail - pi.apply(tail), w, ops));
  }
  return out;
}

OperatorNorms operator_norm_diagnostics(const RomOperators& rom) {
  const Eigen::SelfAdjointEigenSolver<Matrix> s(rom.stiff_r,
                                                Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Matrix> m(rom.mass_r,
                                                Eigen::EigenvaluesOnly);
  return {s.eigenvalues().maxCoeff(), 1.0 / m.eigenvalues().minCoeff()};
}

RegressionResult regression_order(const std::vector<RegressionPoint>& points,
                                  int r_min, int r_max) {
  std::vector<double> xs;
  std::vector<double> ys;
  RegressionResult out;
  out.r_min = r_max;
  out.r_max = r_min;
  for (const auto& p : points) {
    if (p.r < r_min || p.r > r_max) continue;
    if (!(p.abscissa > 0.0) || !(p.error > 0.0)) {
      throw InvalidArgument("regression_order: non-positive value at r = " +
                            std::to_string(p.r));
    }
    xs.push_back(std::log10(p.abscissa));
    ys.push_back(std::log10(p.error));
    out.r_min = std::min(out.r_min, p.r);
    out.r_max = std::max(out.r_max, p.r);
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3) {
    throw InvalidArgument("regression_order: need at least 3 points, got " +
                          std::to_string(n));
  }
  double mx = 0.0;
  double my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) {
    throw InvalidArgument("regression_order: abscissa values are all equal");
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  out.n_points = n;
  return out;
}

ErrorReport build_error_report(const SnapshotSet& fom, const PodBasis& basis,
                               int r, const FemOperators& ops,
                               const ReportOptions& opts) {
  basis.check_rank(r);
  const FemFunction u0 = fom.snapshot(0);
  const RomOperators rom = assemble_rom(basis, r, ops, u0, opts.initial);
  const RomTrajectory traj =
      solve_rom(rom, opts.nu, fom.dt, fom.n_steps(), opts.solver);
  const SnapshotSet lifted = lift(traj, basis, r);

  ErrorReport rep;
  rep.r = r;
  const RomErrors errs = compute_errors(fom, lifted, opts.nu, ops);
  rep.err_linf_l2 = errs.linf_l2;
  rep.err_natural = errs.natural;
  rep.eta_linf_l2 = compute_eta(fom, basis, r, ops);
  rep.tail = tail_sum(basis, r);
  rep.rhs = compute_rhs_terms(basis, r, fom.dt, ops, opts.i_u_constant);
  rep.optimality =
      optimality_benchmarks(fom, basis, r, opts.optimality_norm, ops);
  const OperatorNorms norms = operator_norm_diagnostics(rom);
  rep.s_r_norm = norms.s_r_norm;
  rep.m_r_inv_norm = norms.m_r_inv_norm;
  const FemFunction phi0 =
      lifted.snapshot(0) - ritz_project(u0, basis, r, ops);
  rep.phi0_norm = inner_product(phi0, phi0, InnerProduct::kL2, ops);
  rep.restriction = timestep_restriction_check(opts.nu, fom.dt, traj, rom);
  return rep;
}

}  // namespace podlab
