#include "podlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "podlab/error.hpp"
#include "podlab/projection.hpp"

namespace podlab {

using Json = nlohmann::json;

// --- Framework ------------------------------------------------------------

std::string Framework::name() const {
  return std::string(use_dq ? "DQ-" : "noDQ-") +
         std::string(to_string(inner_product));
}

Framework Framework::parse(std::string_view name) {
  for (const Framework& fw : all()) {
    if (fw.name() == name) return fw;
  }
  throw InvalidArgument("unknown framework '" + std::string(name) +
                        "' (expected noDQ-L2, noDQ-H01, DQ-L2 or DQ-H01)");
}

std::vector<Framework> Framework::all() {
  return {{false, InnerProduct::kL2},
          {false, InnerProduct::kH01},
          {true, InnerProduct::kL2},
          {true, InnerProduct::kH01}};
}

// --- ExperimentConfig -----------------------------------------------------

ExperimentConfig::ExperimentConfig() {
  for (int r = 2; r <= 40; ++r) r_list.push_back(r);
}

void ExperimentConfig::validate() const {
  fom_config().validate();
  Mesh1D{n_cells};
  if (!(eigenvalue_cutoff > 0.0 && eigenvalue_cutoff < 1.0)) {
    throw InvalidArgument("eigenvalue_cutoff must lie in (0, 1)");
  }
  if (r_list.empty()) throw InvalidArgument("r_list is empty");
  for (int r : r_list) {
    if (r < 1) throw InvalidArgument("r values must be >= 1");
  }
  for (int r : solution_r) {
    if (r < 1) throw InvalidArgument("solution_r values must be >= 1");
  }
  for (double t : solution_times) {
    if (t < 0.0 || t > t_final * (1.0 + 1e-12)) {
      throw InvalidArgument("solution time outside [0, t_final]");
    }
  }
  if (i_u_constant < 0.0) throw InvalidArgument("i_u_constant must be >= 0");
  if (regression.plateau_fraction < 0.0 || regression.plateau_fraction >= 1.0) {
    throw InvalidArgument("regression.plateau_fraction must lie in [0, 1)");
  }
  if (workers < 0) throw InvalidArgument("workers must be >= 0");
  static_cast<void>(framework_list());
}

FomConfig ExperimentConfig::fom_config() const {
  FomConfig f;
  f.nu = nu;
  f.dt = dt;
  f.t_final = t_final;
  f.newton_tol = newton_tol;
  f.newton_max_iter = newton_max_iter;
  return f;
}

std::vector<Framework> ExperimentConfig::framework_list() const {
  std::vector<Framework> out;
  for (const auto& name : frameworks) out.push_back(Framework::parse(name));
  return out;
}

namespace {

std::string abscissa_name(RegressionAbscissa a) {
  switch (a) {
    case RegressionAbscissa::kTail:
      return "tail";
    case RegressionAbscissa::kRhs1:
      return "rhs1";
    case RegressionAbscissa::kRhs2:
      return "rhs2";
  }
  return "tail";
}

RegressionAbscissa parse_abscissa(const std::string& s) {
  if (s == "tail") return RegressionAbscissa::kTail;
  if (s == "rhs1") return RegressionAbscissa::kRhs1;
  if (s == "rhs2") return RegressionAbscissa::kRhs2;
  throw InvalidArgument("unknown regression abscissa '" + s + "'");
}

template <typename T>
void read_opt(const Json& j, const char* key, T& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

}  // namespace

Json to_json(const ExperimentConfig& cfg) {
  Json reg;
  reg["abscissa"] = abscissa_name(cfg.regression.abscissa);
  reg["r_min"] = cfg.regression.r_min ? Json(*cfg.regression.r_min) : Json(nullptr);
  reg["r_max"] = cfg.regression.r_max ? Json(*cfg.regression.r_max) : Json(nullptr);
  reg["saturation"] = cfg.regression.saturation;
  reg["plateau_fraction"] = cfg.regression.plateau_fraction;

  Json j;
  j["n_cells"] = cfg.n_cells;
  j["nu"] = cfg.nu;
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["newton_tol"] = cfg.newton_tol;
  j["newton_max_iter"] = cfg.newton_max_iter;
  j["eigenvalue_cutoff"] = cfg.eigenvalue_cutoff;
  j["frameworks"] = cfg.frameworks;
  j["r_list"] = cfg.r_list;
  j["i_u_constant"] = cfg.i_u_constant;
  j["optimality_norm"] = std::string(to_string(cfg.optimality_norm));
  j["rom_initial"] =
      cfg.rom_initial == RomInitialCondition::kRitz ? "ritz" : "pod";
  j["regression"] = reg;
  j["solution_r"] = cfg.solution_r;
  j["solution_times"] = cfg.solution_times;
  j["output_dir"] = cfg.output_dir;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  try {
    read_opt(j, "n_cells", cfg.n_cells);
    read_opt(j, "nu", cfg.nu);
    read_opt(j, "dt", cfg.dt);
    read_opt(j, "t_final", cfg.t_final);
    read_opt(j, "newton_tol", cfg.newton_tol);
    read_opt(j, "newton_max_iter", cfg.newton_max_iter);
    read_opt(j, "eigenvalue_cutoff", cfg.eigenvalue_cutoff);
    read_opt(j, "frameworks", cfg.frameworks);
    read_opt(j, "i_u_constant", cfg.i_u_constant);
    read_opt(j, "solution_r", cfg.solution_r);
    read_opt(j, "solution_times", cfg.solution_times);
    read_opt(j, "output_dir", cfg.output_dir);
    read_opt(j, "workers", cfg.workers);
    if (j.contains("r_list")) {
      read_opt(j, "r_list", cfg.r_list);
    } else if (j.contains("r_range")) {
      const int lo = j.at("r_range").at("min").get<int>();
      const int hi = j.at("r_range").at("max").get<int>();
      if (lo > hi) throw InvalidArgument("r_range.min exceeds r_range.max");
      cfg.r_list.clear();
      for (int r = lo; r <= hi; ++r) cfg.r_list.push_back(r);
    }
    if (j.contains("optimality_norm")) {
      cfg.optimality_norm =
          parse_inner_product(j.at("optimality_norm").get<std::string>());
    }
    if (j.contains("rom_initial")) {
      const auto s = j.at("rom_initial").get<std::string>();
      if (s == "pod") {
        cfg.rom_initial = RomInitialCondition::kPodProjection;
      } else if (s == "ritz") {
        cfg.rom_initial = RomInitialCondition::kRitz;
      } else {
        throw InvalidArgument("rom_initial must be 'pod' or 'ritz'");
      }
    }
    if (j.contains("regression")) {
      const Json& reg = j.at("regression");
      if (reg.contains("abscissa")) {
        cfg.regression.abscissa = parse_abscissa(reg.at("abscissa").get<std::string>());
      }
      if (reg.contains("r_min") && !reg.at("r_min").is_null()) {
        cfg.regression.r_min = reg.at("r_min").get<int>();
      }
      if (reg.contains("r_max") && !reg.at("r_max").is_null()) {
        cfg.regression.r_max = reg.at("r_max").get<int>();
      }
      read_opt(reg, "saturation", cfg.regression.saturation);
      read_opt(reg, "plateau_fraction", cfg.regression.plateau_fraction);
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("bad config: ") + e.what());
  }
  return cfg;
}

// --- Runs -----------------------------------------------------------------

FomData run_fom(const ExperimentConfig& cfg) {
  cfg.validate();
  const Mesh1D mesh(cfg.n_cells);
  const FemOperators ops(mesh);
  FomData data;
  data.n_cells = cfg.n_cells;
  data.nu = cfg.nu;
  data.t_final = cfg.t_final;
  data.snaps = solve_fom(cfg.fom_config(), ops, step_initial_condition(mesh));
  return data;
}

PodBasis build_framework_basis(const FomData& data, const Framework& fw,
                               double eigenvalue_cutoff) {
  const FemOperators ops(Mesh1D(data.n_cells));
  const PodConfig pc{fw.inner_product, fw.use_dq, eigenvalue_cutoff};
  return build_basis(data.snaps, pc, ops);
}

namespace {

// Runs body(i) for i in [0, n) on a bounded pool of worker threads. Results
// are written by index, so the output order does not depend on scheduling.
template <typename Body>
void parallel_for(int n, int workers, Body body) {
  if (workers <= 0) {
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            const std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

double abscissa_value(const ErrorReport& row, RegressionAbscissa a) {
  switch (a) {
    case RegressionAbscissa::kTail:
      return row.tail;
    case RegressionAbscissa::kRhs1:
      return row.rhs.rhs1;
    case RegressionAbscissa::kRhs2:
      return row.rhs.rhs2;
  }
  return row.tail;
}

double quantity_value(const ErrorReport& row, const std::string& quantity) {
  if (quantity == "err_linf_l2") return row.err_linf_l2;
  if (quantity == "err_natural") return row.err_natural;
  throw InvalidArgument("unknown regression quantity '" + quantity + "'");
}

}  // namespace

std::vector<RegressionPoint> regression_points(const FrameworkSweep& sweep,
                                               const std::string& quantity,
                                               const RegressionOptions& opts) {
  std::vector<RegressionPoint> all;
  for (const auto& row : sweep.rows) {
    all.push_back({row.r, abscissa_value(row, opts.abscissa),
                   quantity_value(row, quantity)});
  }
  std::vector<RegressionPoint> out;
  if (opts.r_min || opts.r_max) {
    const int lo = opts.r_min.value_or(std::numeric_limits<int>::min());
    const int hi = opts.r_max.value_or(std::numeric_limits<int>::max());
    for (const auto& p : all) {
      if (p.r >= lo && p.r <= hi) out.push_back(p);
    }
    return out;
  }
  int plateau_end = std::numeric_limits<int>::min();
  if (opts.plateau_fraction > 0.0 && !all.empty()) {
    double peak = 0.0;
    for (const auto& p : all) peak = std::max(peak, p.error);
    for (const auto& p : all) {
      if (p.error >= opts.plateau_fraction * peak) plateau_end = p.r;
    }
  }
  for (const auto& p : all) {
    if (p.r <= plateau_end) continue;
    if (p.error < opts.saturation) continue;
    if (p.r > sweep.d - 2) continue;
    if (!(p.abscissa > 0.0)) continue;
    out.push_back(p);
  }
  return out;
}

FrameworkSweep run_sweep(const FomData& data, const PodBasis& basis,
                         const Framework& fw, const ExperimentConfig& cfg) {
  const FemOperators ops(Mesh1D(data.n_cells));
  if (basis.modes.rows() != ops.dim()) {
    throw DimensionMismatch("run_sweep: basis does not match the snapshot mesh");
  }
  FrameworkSweep sweep;
  sweep.framework = fw;
  sweep.d = basis.d();

  std::set<int> rs;
  for (int r : cfg.r_list) {
    if (r > basis.d()) {
      warn(fw.name() + ": r = " + std::to_string(r) + " clamped to d = " +
           std::to_string(basis.d()));
      r = basis.d();
    }
    rs.insert(r);
  }
  const std::vector<int> r_values(rs.begin(), rs.end());

  ReportOptions ro;
  ro.nu = data.nu;
  ro.i_u_constant = cfg.i_u_constant;
  ro.optimality_norm = cfg.optimality_norm;
  ro.initial = cfg.rom_initial;
  ro.solver = {cfg.newton_tol, cfg.newton_max_iter};

  sweep.rows.resize(r_values.size());
  parallel_for(static_cast<int>(r_values.size()), cfg.workers, [&](int i) {
    sweep.rows[i] = build_error_report(data.snaps, basis, r_values[i], ops, ro);
  });

  for (const char* quantity : {"err_linf_l2", "err_natural"}) {
    const auto points = regression_points(sweep, quantity, cfg.regression);
    try {
      sweep.regressions.push_back(
          {quantity, regression_order(points, std::numeric_limits<int>::min(),
                                      std::numeric_limits<int>::max())});
    } catch (const InvalidArgument& e) {
      warn(fw.name() + ": no regression for " + quantity + ": " + e.what());
    }
  }

  BoundSummary& b = sweep.bounds;
  for (const auto& row : sweep.rows) {
    const double bound = row.phi0_norm + row.rhs.rhs1;
    b.c_linf_l2 = std::max(b.c_linf_l2, row.err_linf_l2 / bound);
    b.c_natural = std::max(b.c_natural, row.err_natural / bound);
    if (!(row.rhs.rhs2 <= row.err_linf_l2 && row.err_linf_l2 <= row.rhs.rhs1)) {
      b.sandwich_violations_linf_l2.push_back(row.r);
    }
    if (!(row.rhs.rhs2 <= row.err_natural && row.err_natural <= row.rhs.rhs1)) {
      b.sandwich_violations_natural.push_back(row.r);
    }
    if (!row.restriction.error_ok) b.restriction_warnings.push_back(row.r);
  }
  return sweep;
}

void write_sweep_csv(const FrameworkSweep& sweep, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << kSweepCsvHeader << '\n';
  for (const auto& row : sweep.rows) {
    const double values[] = {row.err_linf_l2,
                             row.err_natural,
                             row.eta_linf_l2,
                             row.tail,
                             row.rhs.rhs1,
                             row.rhs.rhs2,
                             row.optimality.truly_optimal,
                             row.optimality.optimal_i,
                             row.optimality.optimal_ii,
                             row.s_r_norm,
                             row.m_r_inv_norm,
                             row.phi0_norm};
    out << row.r;
    for (double v : values) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_regression_csv(const FrameworkSweep& sweep,
                          const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << kRegressionCsvHeader << '\n';
  for (const auto& reg : sweep.regressions) {
    out << reg.quantity << ',' << format_double(reg.fit.slope) << ','
        << format_double(reg.fit.intercept) << ','
        << format_double(reg.fit.r_squared) << ',' << reg.fit.r_min << ','
        << reg.fit.r_max << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Json sweep_sidecar(const FrameworkSweep& sweep, const ExperimentConfig& cfg) {
  const RhsFamily family = sweep.framework.use_dq
                               ? (sweep.framework.inner_product == InnerProduct::kL2
                                      ? RhsFamily::kDqL2
                                      : RhsFamily::kDqH01)
                               : RhsFamily::kNoDq;
  Json j;
  j["framework"] = sweep.framework.name();
  j["rhs_family"] = std::string(to_string(family));
  switch (family) {
    case RhsFamily::kNoDq:
      j["rhs_terms"] = {"noDQ-RHS1", "noDQ-RHS2"};
      break;
    case RhsFamily::kDqL2:
      j["rhs_terms"] = {"DQ-RHS1", "DQ-RHS2"};
      break;
    case RhsFamily::kDqH01:
      j["rhs_terms"] = {"DQ-RHS3", "DQ-RHS4"};
      break;
  }
  j["d"] = sweep.d;
  j["regression_abscissa"] = abscissa_name(cfg.regression.abscissa);
  j["optimality_norm"] = std::string(to_string(cfg.optimality_norm));
  j["i_u_constant"] = cfg.i_u_constant;
  j["bound_constant_linf_l2"] = sweep.bounds.c_linf_l2;
  j["bound_constant_natural"] = sweep.bounds.c_natural;
  j["bound_constant_feasible"] =
      sweep.bounds.c_linf_l2 <= 1e6 && sweep.bounds.c_natural <= 1e6;
  j["sandwich_violations_linf_l2"] = sweep.bounds.sandwich_violations_linf_l2;
  j["sandwich_violations_natural"] = sweep.bounds.sandwich_violations_natural;
  j["timestep_restriction_violations"] = sweep.bounds.restriction_warnings;
  return j;
}

std::vector<SolutionSummary> write_solutions(const FomData& data,
                                             const PodBasis& basis,
                                             const Framework& fw,
                                             const ExperimentConfig& cfg,
                                             std::ostream& csv,
                                             bool write_header) {
  const Mesh1D mesh(data.n_cells);
  const FemOperators ops(mesh);
  std::vector<double> times = cfg.solution_times;
  if (times.empty()) times.push_back(data.t_final);
  if (write_header) csv << "framework,r,t,x,u_fom,u_rom\n";

  std::vector<SolutionSummary> summary;
  for (int r : cfg.solution_r) {
    if (r > basis.d()) {
      warn(fw.name() + ": solution r = " + std::to_string(r) +
           " clamped to d = " + std::to_string(basis.d()));
      r = basis.d();
    }
    const RomOperators rom =
        assemble_rom(basis, r, ops, data.snaps.snapshot(0), cfg.rom_initial);
    const RomTrajectory traj = solve_rom(rom, data.nu, data.snaps.dt,
                                         data.snaps.n_steps(),
                                         {cfg.newton_tol, cfg.newton_max_iter});
    const SnapshotSet lifted = lift(traj, basis, r);
    for (double t : times) {
      const int k = std::clamp(static_cast<int>(std::llround(t / data.snaps.dt)),
                               0, data.snaps.n_steps());
      const double tk = k * data.snaps.dt;
      const FemFunction uf = data.snaps.snapshot(k);
      const FemFunction ur = lifted.snapshot(k);
      for (int j = 0; j <= mesh.n_cells(); ++j) {
        const bool interior = j > 0 && j < mesh.n_cells();
        csv << fw.name() << ',' << r << ',' << format_double(tk) << ','
            << format_double(mesh.node(j)) << ','
            << format_double(interior ? uf[j - 1] : 0.0) << ','
            << format_double(interior ? ur[j - 1] : 0.0) << '\n';
      }
      const FemFunction diff = uf - ur;
      summary.push_back({fw.name(), r, tk,
                         std::sqrt(inner_product(diff, diff, InnerProduct::kL2, ops))});
    }
  }
  return summary;
}

}  // namespace podlab
