#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "podlab/error.hpp"
#include "podlab/experiment.hpp"
#include "podlab/projection.hpp"

namespace podlab {

namespace {

constexpr double kTailRelTol = 1e-7;
constexpr double kRitzTailRelTol = 1e-6;
constexpr double kDeflationTol = 1e-8;
constexpr double kOrthoTol = 1e-8;
constexpr double kEnergyTol = 1e-10;
constexpr double kAntisymmetryTol = 1e-10;

std::string tagged(const std::string& name, const Framework& fw) {
  return name + "[" + fw.name() + "]";
}

std::string tagged(const std::string& name, const Framework& fw,
                   InnerProduct w) {
  return name + "[" + fw.name() + ",W=" + std::string(to_string(w)) + "]";
}

CheckResult at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

double collection_energy(const SnapshotCollection& col, InnerProduct w,
                         const FemOperators& ops) {
  return squared_norms(col.members, w, ops).sum() / col.weight_m;
}

}  // namespace

std::vector<CheckResult> pod_identity_checks(const SnapshotSet& snaps,
                                             const FemOperators& ops,
                                             double eigenvalue_cutoff,
                                             double eigenvalue_scale) {
  std::vector<CheckResult> out;
  for (const Framework& fw : Framework::all()) {
    const SnapshotCollection col = build_dq_collection(snaps, fw.use_dq);
    PodBasis basis =
        compute_pod(col, {fw.inner_product, fw.use_dq, eigenvalue_cutoff}, ops);
    basis.eigenvalues *= eigenvalue_scale;
    const int d = basis.d();

    out.push_back(at_most(tagged("orthonormality_defect", fw),
                          orthonormality_defect(basis, ops), kOrthoTol));

    const double energy = collection_energy(col, fw.inner_product, ops);
    const double floor = kIdentityAbsFloor * energy / kTailRelTol;
    double gap = 0.0;
    for (int r = 0; r <= d; ++r) {
      const TailIdentity t = projection_error_tail_identity(
          col, basis, r, ProjectionKind::kPodH, fw.inner_product, ops);
      gap = std::max(gap, t.relative_gap(floor));
    }
    out.push_back(at_most(tagged("tail_identity_pod", fw), gap, kTailRelTol));

    if (fw.use_dq) {
      for (InnerProduct w : {InnerProduct::kL2, InnerProduct::kH01}) {
        const double wfloor =
            kIdentityAbsFloor * collection_energy(col, w, ops) / kRitzTailRelTol;
        double wgap = 0.0;
        for (int r = 1; r <= d; ++r) {
          const TailIdentity t = projection_error_tail_identity(
              col, basis, r, ProjectionKind::kRitz, w, ops);
          wgap = std::max(wgap, t.relative_gap(wfloor));
        }
        out.push_back(
            at_most(tagged("tail_identity_ritz", fw, w), wgap, kRitzTailRelTol));
      }
    }

    if (fw.inner_product == InnerProduct::kH01) {
      const Vector l2 = squared_norms(basis.modes, InnerProduct::kL2, ops)
                            .cwiseSqrt();
      double grad_dev = 0.0;
      double l2_dev = 0.0;
      for (int r = 1; r < d; ++r) {
        for (const DeflationNorms& n : ritz_deflation_norms(basis, r, ops)) {
          grad_dev = std::max(grad_dev, std::abs(n.gradient - 1.0));
          l2_dev = std::max(l2_dev, std::abs(n.l2 - l2[n.mode - 1]));
        }
      }
      out.push_back(
          at_most(tagged("ritz_deflation_gradient", fw), grad_dev, kDeflationTol));
      out.push_back(at_most(tagged("ritz_deflation_l2", fw), l2_dev, kDeflationTol));
    }
  }
  return out;
}

std::vector<CheckResult> uniform_bound_checks(const SnapshotSet& snaps,
                                              const FemOperators& ops,
                                              double eigenvalue_cutoff) {
  const double t_final = snaps.n_steps() * snaps.dt;
  const double c = 6.0 * std::max(1.0, t_final * t_final);
  std::vector<CheckResult> out;
  for (const Framework& fw : Framework::all()) {
    if (!fw.use_dq) continue;
    const SnapshotCollection col = build_dq_collection(snaps, true);
    const PodBasis basis =
        compute_pod(col, {fw.inner_product, true, eigenvalue_cutoff}, ops);
    const int d = basis.d();

    auto worst_ratio = [&](auto lhs_rhs, InnerProduct w) {
      const double atol = kIdentityAbsFloor * collection_energy(col, w, ops);
      double worst = 0.0;
      for (int r = 1; r <= d; ++r) {
        const auto [lhs, rhs] = lhs_rhs(r);
        worst = std::max(worst, lhs / (c * rhs + atol));
      }
      return worst;
    };

    const InnerProduct h = fw.inner_product;
    out.push_back(at_most(
        tagged("uniform_bound_pod_H", fw),
        worst_ratio(
            [&](int r) {
              const Matrix e = snaps.values - pod_project(snaps.values, basis, r, ops);
              return std::pair{squared_norms(e, h, ops).maxCoeff(),
                               tail_sum(basis, r)};
            },
            h),
        1.0));

    for (InnerProduct w : {InnerProduct::kL2, InnerProduct::kH01}) {
      const Vector mode_norms = squared_norms(basis.modes, w, ops);
      out.push_back(at_most(
          tagged("uniform_bound_pod", fw, w),
          worst_ratio(
              [&](int r) {
                const Matrix e =
                    snaps.values - pod_project(snaps.values, basis, r, ops);
                const double rhs =
                    r < d ? basis.eigenvalues.tail(d - r).dot(mode_norms.tail(d - r))
                          : 0.0;
                return std::pair{squared_norms(e, w, ops).maxCoeff(), rhs};
              },
              w),
          1.0));
      out.push_back(at_most(
          tagged("uniform_bound_ritz", fw, w),
          worst_ratio(
              [&](int r) {
                const Projector ritz(basis, r, ProjectionKind::kRitz, ops);
                const Matrix e = snaps.values - ritz.apply(snaps.values);
                double rhs = 0.0;
                if (r < d) {
                  const Matrix tail = basis.modes.rightCols(d - r);
                  rhs = basis.eigenvalues.tail(d - r).dot(
                      squared_norms(tail - ritz.apply(tail), w, ops));
                }
                return std::pair{squared_norms(e, w, ops).maxCoeff(), rhs};
              },
              w),
          1.0));
    }
  }
  return out;
}

double fom_energy_residual(const SnapshotSet& snaps, double nu,
                           const FemOperators& ops) {
  const Vector l2 = squared_norms(snaps.values, InnerProduct::kL2, ops);
  double worst = 0.0;
  for (int n = 0; n < snaps.n_steps(); ++n) {
    if (l2[n] == 0.0) continue;
    const FemFunction mid = 0.5 * (snaps.values.col(n) + snaps.values.col(n + 1));
    const double res = l2[n + 1] - l2[n] +
                       2.0 * snaps.dt * nu * ops.stiffness().bilinear(mid, mid);
    worst = std::max(worst, std::abs(res) / l2[n]);
  }
  return worst;
}

double rom_energy_residual(const RomTrajectory& traj, const RomOperators& rom,
                           double nu) {
  double worst = 0.0;
  for (int n = 0; n < traj.n_steps(); ++n) {
    const Vector a = traj.coefficients.col(n);
    const Vector b = traj.coefficients.col(n + 1);
    const double e0 = a.dot(rom.mass_r * a);
    if (e0 == 0.0) continue;
    const Vector mid = 0.5 * (a + b);
    const double res =
        b.dot(rom.mass_r * b) - e0 + 2.0 * traj.dt * nu * mid.dot(rom.stiff_r * mid);
    worst = std::max(worst, std::abs(res) / e0);
  }
  return worst;
}

double antisymmetry_defect(const RomOperators& rom, int samples, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  double worst = 0.0;
  Vector a(rom.r);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < rom.r; ++i) a[i] = dist(gen);
    const double norm = a.norm();
    worst = std::max(worst, std::abs(a.dot(rom.nonlinear(a))) / (norm * norm * norm));
  }
  return worst;
}

ConvergenceStudy manufactured_convergence(bool refine_time) {
  const double nu = 0.1;
  const ExpSinSolution exact{nu};
  ConvergenceStudy out;
  const std::vector<int> cells =
      refine_time ? std::vector<int>(4, 2048) : std::vector<int>{8, 16, 32, 64};
  const std::vector<double> steps = refine_time
                                        ? std::vector<double>{0.1, 0.05, 0.025, 0.0125}
                                        : std::vector<double>(4, 1.0 / 4096);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Mesh1D mesh(cells[i]);
    const FemOperators ops(mesh);
    FomConfig cfg;
    cfg.nu = nu;
    cfg.dt = steps[i];
    cfg.t_final = 1.0;
    cfg.forcing = ManufacturedForcing{};
    const SnapshotSet s = solve_fom(cfg, ops, interpolate(exact, mesh, 0.0));
    out.sizes.push_back(refine_time ? steps[i] : mesh.h());
    out.errors.push_back(
        l2_error_against(s.snapshot(s.n_steps()), exact, mesh, cfg.t_final));
  }
  std::vector<RegressionPoint> pts;
  for (std::size_t i = 0; i < out.sizes.size(); ++i) {
    if (i > 0) {
      out.orders.push_back(std::log(out.errors[i - 1] / out.errors[i]) /
                           std::log(out.sizes[i - 1] / out.sizes[i]));
    }
    pts.push_back({static_cast<int>(i), out.sizes[i], out.errors[i]});
  }
  out.fitted_order = regression_order(pts, 0, static_cast<int>(pts.size())).slope;
  return out;
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
         {"passed", c.passed}});
  }
  return j;
}

namespace {

void identity_suite(const VerifyOptions& opts, std::vector<CheckResult>& out) {
  const Mesh1D mesh(64);
  const FemOperators ops(mesh);
  FomConfig cfg;
  cfg.nu = 1e-2;
  cfg.dt = 0.01;
  cfg.t_final = 1.0;
  const SnapshotSet snaps = solve_fom(cfg, ops, step_initial_condition(mesh));
  const double cutoff = PodConfig{}.eigenvalue_cutoff;

  const double scale = opts.perturb_eigenvalues ? 1.01 : 1.0;
  for (auto& c : pod_identity_checks(snaps, ops, cutoff, scale)) out.push_back(c);
  for (auto& c : uniform_bound_checks(snaps, ops, cutoff)) out.push_back(c);

  out.push_back(at_most("fom_energy_balance",
                        fom_energy_residual(snaps, cfg.nu, ops), kEnergyTol));
  for (const Framework& fw : Framework::all()) {
    const PodBasis basis =
        build_basis(snaps, {fw.inner_product, fw.use_dq, cutoff}, ops);
    double energy = 0.0;
    double antisym = 0.0;
    std::set<int> rs{std::min(5, basis.d()), std::min(20, basis.d()), basis.d()};
    for (int r : rs) {
      const RomOperators rom = assemble_rom(basis, r, ops, snaps.snapshot(0));
      const RomTrajectory traj = solve_rom(rom, cfg.nu, cfg.dt, snaps.n_steps());
      energy = std::max(energy, rom_energy_residual(traj, rom, cfg.nu));
      antisym = std::max(antisym, antisymmetry_defect(rom, 1000));
    }
    out.push_back(at_most(tagged("rom_energy_balance", fw), energy, kEnergyTol));
    out.push_back(at_most(tagged("antisymmetry", fw), antisym, kAntisymmetryTol));
  }
}

void convergence_suite(std::vector<CheckResult>& out) {
  for (bool time : {false, true}) {
    const ConvergenceStudy s = manufactured_convergence(time);
    const std::string base = time ? "convergence_order_dt" : "convergence_order_h";
    for (std::size_t i = 0; i < s.orders.size(); ++i) {
      const double p = s.orders[i];
      out.push_back({base + "[" + std::to_string(i + 1) + "]", p, 2.0,
                     p >= 1.8 && p <= 2.2});
    }
  }
}

}  // namespace

VerifyReport run_verification(const VerifyOptions& opts) {
  if (opts.suite != "identities" && opts.suite != "convergence" &&
      opts.suite != "all") {
    throw InvalidArgument("unknown verification suite '" + opts.suite +
                          "' (expected identities, convergence or all)");
  }
  VerifyReport rep;
  rep.suite = opts.suite;
  if (opts.suite != "convergence") identity_suite(opts, rep.checks);
  if (opts.suite != "identities") convergence_suite(rep.checks);
  return rep;
}

}  // namespace podlab
