#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "podlab/analysis.hpp"
#include "podlab/io.hpp"

namespace podlab {

/// One of the four POD frameworks: difference quotients on/off times the
/// L2 or H01 inner product. Named noDQ-L2, noDQ-H01, DQ-L2, DQ-H01.
struct Framework {
  bool use_dq = false;
  InnerProduct inner_product = InnerProduct::kL2;

  [[nodiscard]] std::string name() const;
  static Framework parse(std::string_view name);
  static std::vector<Framework> all();

  friend bool operator==(const Framework&, const Framework&) = default;
};

enum class RegressionAbscissa { kTail, kRhs1, kRhs2 };

struct RegressionOptions {
  RegressionAbscissa abscissa = RegressionAbscissa::kTail;
  /// Explicit range; when unset the range is chosen from the data.
  std::optional<int> r_min;
  std::optional<int> r_max;
  /// Errors below this are treated as saturated and left out.
  double saturation = 1e-12;
  /// Leading r values whose error is still at least this fraction of the
  /// largest error in the sweep form the pre-asymptotic plateau and are left
  /// out. 0 disables the rule.
  double plateau_fraction = 0.5;
};

struct ExperimentConfig {
  int n_cells = 512;
  double nu = 1e-2;
  double dt = 1e-3;
  double t_final = 1.0;
  double newton_tol = 1e-12;
  int newton_max_iter = 30;
  double eigenvalue_cutoff = 1e-12;
  std::vector<std::string> frameworks = {"noDQ-L2", "noDQ-H01", "DQ-L2",
                                         "DQ-H01"};
  std::vector<int> r_list;  // defaults to 2..40
  double i_u_constant = 0.0;
  InnerProduct optimality_norm = InnerProduct::kL2;
  RomInitialCondition rom_initial = RomInitialCondition::kPodProjection;
  RegressionOptions regression;
  std::vector<int> solution_r = {5, 13, 28};
  std::vector<double> solution_times;  // defaults to {t_final}
  std::string output_dir = "out";
  int workers = 0;  // 0: one per hardware thread

  ExperimentConfig();

  void validate() const;
  [[nodiscard]] FomConfig fom_config() const;
  [[nodiscard]] std::vector<Framework> framework_list() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing fields keep their defaults. Accepts "r_range": {"min", "max"} as
/// an alternative to "r_list".
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Step initial condition, zero forcing.
FomData run_fom(const ExperimentConfig& cfg);

PodBasis build_framework_basis(const FomData& data, const Framework& fw,
                               double eigenvalue_cutoff);

struct NamedRegression {
  std::string quantity;  // err_linf_l2 or err_natural
  RegressionResult fit;
};

/// Bound diagnostics over a sweep.
struct BoundSummary {
  /// Smallest C with err <= C (phi0_norm + rhs1) for every r.
  double c_linf_l2 = 0.0;
  double c_natural = 0.0;
  /// r values where rhs2 <= err <= rhs1 fails (observation, not a theorem).
  std::vector<int> sandwich_violations_linf_l2;
  std::vector<int> sandwich_violations_natural;
  /// r values whose ROM trajectory violates the time-step restriction.
  std::vector<int> restriction_warnings;
};

struct FrameworkSweep {
  Framework framework;
  int d = 0;
  std::vector<ErrorReport> rows;  // ordered by r
  std::vector<NamedRegression> regressions;
  BoundSummary bounds;
};

/// Runs one ROM per r (clamped to d) and computes every diagnostic.
FrameworkSweep run_sweep(const FomData& data, const PodBasis& basis,
                         const Framework& fw, const ExperimentConfig& cfg);

/// Points of one quantity against the configured abscissa, already filtered
/// by the configured or data-driven r range.
std::vector<RegressionPoint> regression_points(const FrameworkSweep& sweep,
                                               const std::string& quantity,
                                               const RegressionOptions& opts);

/// CSV header of the per-r error table.
inline constexpr const char* kSweepCsvHeader =
    "r,err_linf_l2,err_natural,eta_linf_l2,tail,rhs1,rhs2,truly_optimal,"
    "optimal_I,optimal_II,s_r_norm,m_r_inv_norm,phi0_norm";
inline constexpr const char* kRegressionCsvHeader =
    "quantity,slope,intercept,r_squared,r_min,r_max";

void write_sweep_csv(const FrameworkSweep& sweep, const std::filesystem::path& path);
void write_regression_csv(const FrameworkSweep& sweep,
                          const std::filesystem::path& path);
nlohmann::json sweep_sidecar(const FrameworkSweep& sweep,
                             const ExperimentConfig& cfg);

struct SolutionSummary {
  std::string framework;
  int r = 0;
  double t = 0.0;
  double l2_error = 0.0;  // ||u_h - u_r||_{L2} at time t
};

/// Writes framework,r,t,x,u_fom,u_rom rows (boundary nodes included) for
/// every requested r and time, and returns the per-(r, t) L2 errors.
std::vector<SolutionSummary> write_solutions(const FomData& data,
                                             const PodBasis& basis,
                                             const Framework& fw,
                                             const ExperimentConfig& cfg,
                                             std::ostream& csv,
                                             bool write_header);

struct VerifyOptions {
  std::string suite = "identities";  // identities | convergence | all
  /// Negative control: scale the retained eigenvalues before the identity
  /// checks so that they must fail.
  bool perturb_eigenvalues = false;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Absolute part of the identity and bound tolerances, relative to the total
/// collection energy in the measuring norm.
inline constexpr double kIdentityAbsFloor = 1e-10;

/// Orthonormality, the eigenvalue-tail identity for every r in 0..d, the
/// Ritz tail identity (DQ bases, W in {L2, H01}) and the Ritz deflation
/// identities of H01 bases. eigenvalue_scale != 1 multiplies the retained
/// eigenvalues first (negative control).
std::vector<CheckResult> pod_identity_checks(const SnapshotSet& snaps,
                                             const FemOperators& ops,
                                             double eigenvalue_cutoff,
                                             double eigenvalue_scale = 1.0);

/// Uniform projection-error bounds with C = 6 max(1, T^2) on both DQ bases,
/// every r in 1..d, W in {L2, H01}. Values are the largest lhs / bound ratio.
std::vector<CheckResult> uniform_bound_checks(const SnapshotSet& snaps,
                                              const FemOperators& ops,
                                              double eigenvalue_cutoff);

/// max_n |‖u^{n+1}‖² − ‖u^n‖² + 2 dt nu ‖u^{n+1/2}‖²_{H01}| / ‖u^n‖², zero
/// forcing, over a FOM trajectory.
double fom_energy_residual(const SnapshotSet& snaps, double nu,
                           const FemOperators& ops);
/// Same balance in reduced coordinates (M_r, S_r).
double rom_energy_residual(const RomTrajectory& traj, const RomOperators& rom,
                           double nu);

/// max over `samples` pseudo-random a (fixed seed) of |a^T B(a, a)| / |a|^3.
double antisymmetry_defect(const RomOperators& rom, int samples,
                           unsigned seed = 12345);

struct ConvergenceStudy {
  std::vector<double> sizes;   // h or dt
  std::vector<double> errors;  // L2 error at t_final
  std::vector<double> orders;  // log2 of successive error ratios
  double fitted_order = 0.0;   // least-squares slope of log error vs log size
};

/// Manufactured solution exp(-t) sin(pi x), nu = 0.1, T = 1. Space: meshes
/// 8, 16, 32, 64 with dt = 1/4096. Time: dt = 0.1 .. 0.0125 on 2048 cells.
ConvergenceStudy manufactured_convergence(bool refine_time);

/// Self-contained verification on small meshes.
VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace podlab
