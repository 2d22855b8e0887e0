#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "podlab/error.hpp"
#include "podlab/experiment.hpp"

namespace podlab {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_cells = 32;
  cfg.dt = 0.01;
  cfg.t_final = 0.5;
  cfg.r_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  cfg.solution_r = {3};
  cfg.workers = 2;
  return cfg;
}

const FomData& small_data() {
  static const FomData data = run_fom(small_config());
  return data;
}

class ScratchDir {
 public:
  ScratchDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("podlab_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct WarningCapture {
  std::vector<std::string> messages;
  WarningCapture() {
    set_warning_sink(
        [](const char* msg, void* ctx) {
          static_cast<WarningCapture*>(ctx)->messages.emplace_back(msg);
        },
        this);
  }
  ~WarningCapture() { set_warning_sink(nullptr, nullptr); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Framework, NamesRoundTrip) {
  const auto all = Framework::all();
  ASSERT_EQ(all.size(), 4u);
  for (const Framework& fw : all) EXPECT_EQ(Framework::parse(fw.name()), fw);
  EXPECT_EQ(Framework::parse("DQ-H01").inner_product, InnerProduct::kH01);
  EXPECT_TRUE(Framework::parse("DQ-H01").use_dq);
  EXPECT_THROW(Framework::parse("DQ-H1"), InvalidArgument);
}

TEST(ExperimentConfig, Defaults) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.n_cells, 512);
  EXPECT_DOUBLE_EQ(cfg.nu, 1e-2);
  EXPECT_DOUBLE_EQ(cfg.dt, 1e-3);
  EXPECT_DOUBLE_EQ(cfg.t_final, 1.0);
  ASSERT_EQ(cfg.r_list.size(), 39u);
  EXPECT_EQ(cfg.r_list.front(), 2);
  EXPECT_EQ(cfg.r_list.back(), 40);
  EXPECT_EQ(cfg.framework_list().size(), 4u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig cfg = small_config();
  cfg.nu = 0.02;
  cfg.frameworks = {"DQ-L2"};
  cfg.optimality_norm = InnerProduct::kH01;
  cfg.rom_initial = RomInitialCondition::kRitz;
  cfg.regression.abscissa = RegressionAbscissa::kRhs1;
  cfg.regression.r_min = 3;
  cfg.regression.r_max = 9;
  const ExperimentConfig back = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_EQ(back.rom_initial, RomInitialCondition::kRitz);
  EXPECT_EQ(back.regression.r_min, 3);
}

TEST(ExperimentConfig, RangeAndPartialJson) {
  const ExperimentConfig cfg =
      config_from_json(nlohmann::json::parse(R"({"r_range": {"min": 4, "max": 7}, "nu": 0.05})"));
  EXPECT_EQ(cfg.r_list, (std::vector<int>{4, 5, 6, 7}));
  EXPECT_DOUBLE_EQ(cfg.nu, 0.05);
  EXPECT_EQ(cfg.n_cells, 512);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"r_range": {"min": 8, "max": 7}})")),
               InvalidArgument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse("[1, 2]")), InvalidArgument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"nu": "fast"})")), InvalidArgument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"rom_initial": "zero"})")),
               InvalidArgument);
}

TEST(ExperimentConfig, Validation) {
  auto expect_invalid = [](auto mutate) {
    ExperimentConfig cfg = small_config();
    mutate(cfg);
    EXPECT_THROW(cfg.validate(), InvalidArgument);
  };
  expect_invalid([](ExperimentConfig& c) { c.nu = -1.0; });
  expect_invalid([](ExperimentConfig& c) { c.n_cells = 1; });
  expect_invalid([](ExperimentConfig& c) { c.t_final = 0.505; });
  expect_invalid([](ExperimentConfig& c) { c.r_list = {}; });
  expect_invalid([](ExperimentConfig& c) { c.r_list = {0, 3}; });
  expect_invalid([](ExperimentConfig& c) { c.frameworks = {"POD"}; });
  expect_invalid([](ExperimentConfig& c) { c.eigenvalue_cutoff = 0.0; });
  expect_invalid([](ExperimentConfig& c) { c.solution_times = {0.7}; });
  expect_invalid([](ExperimentConfig& c) { c.i_u_constant = -1.0; });
  expect_invalid([](ExperimentConfig& c) { c.workers = -1; });
}

TEST(Io, SnapshotRoundTripIsLossless) {
  ScratchDir dir;
  const FomData& data = small_data();
  save_snapshots(data, dir.path() / "s.csv");
  const FomData back = load_snapshots(dir.path() / "s.csv");
  EXPECT_EQ(back.n_cells, data.n_cells);
  EXPECT_EQ(back.nu, data.nu);
  EXPECT_EQ(back.t_final, data.t_final);
  EXPECT_EQ(back.snaps.dt, data.snaps.dt);
  EXPECT_TRUE((back.snaps.values.array() == data.snaps.values.array()).all());
  save_snapshots(back, dir.path() / "t.csv");
  EXPECT_EQ(slurp(dir.path() / "s.csv"), slurp(dir.path() / "t.csv"));
  const std::string text = slurp(dir.path() / "s.csv");
  EXPECT_EQ(text.rfind("# podlab-snapshots n_cells=32", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Io, BasisRoundTrip) {
  ScratchDir dir;
  const FomData& data = small_data();
  const PodBasis b = build_framework_basis(data, Framework::parse("DQ-H01"), 1e-12);
  save_basis(b, data.n_cells, dir.path() / "b.csv", dir.path() / "b.json", "DQ-H01");
  const PodBasis back = load_basis(dir.path() / "b.csv", dir.path() / "b.json");
  EXPECT_EQ(back.d(), b.d());
  EXPECT_EQ(back.weight_m, b.weight_m);
  EXPECT_EQ(back.inner_product, InnerProduct::kH01);
  EXPECT_TRUE(back.use_dq);
  EXPECT_TRUE((back.modes.array() == b.modes.array()).all());
  EXPECT_TRUE((back.eigenvalues.array() == b.eigenvalues.array()).all());
  const auto side = nlohmann::json::parse(slurp(dir.path() / "b.json"));
  EXPECT_EQ(side.at("framework"), "DQ-H01");
  EXPECT_EQ(side.at("weight_M"), b.weight_m);
}

TEST(Io, Errors) {
  ScratchDir dir;
  EXPECT_THROW(load_snapshots(dir.path() / "missing.csv"), IoError);
  std::ofstream(dir.path() / "bad.csv") << "# something else\n1,2\n";
  EXPECT_THROW(load_snapshots(dir.path() / "bad.csv"), IoError);
  std::ofstream(dir.path() / "ragged.csv")
      << "# podlab-snapshots n_cells=3 dt=0.1 nu=0.01 t_final=0.1\n1,2\n3\n";
  EXPECT_THROW(load_snapshots(dir.path() / "ragged.csv"), IoError);
  std::ofstream(dir.path() / "num.csv")
      << "# podlab-snapshots n_cells=3 dt=0.1 nu=0.01 t_final=0.1\n1,abc\n3,4\n";
  EXPECT_THROW(load_snapshots(dir.path() / "num.csv"), IoError);
  EXPECT_THROW(save_snapshots(small_data(), dir.path()), IoError);
}

TEST(RunFom, MatchesConfig) {
  const FomData& data = small_data();
  EXPECT_EQ(data.n_cells, 32);
  EXPECT_EQ(data.snaps.n_steps(), 50);
  EXPECT_EQ(data.snaps.dim(), 31);
  EXPECT_EQ(data.snaps.values(0, 0), 1.0);
  EXPECT_EQ(data.snaps.values(30, 0), 0.0);
  const FomData again = run_fom(small_config());
  EXPECT_TRUE((again.snaps.values.array() == data.snaps.values.array()).all());
}

TEST(RunSweep, ClampsAndDeduplicatesRanks) {
  const FomData& data = small_data();
  const Framework fw = Framework::parse("noDQ-L2");
  const PodBasis b = build_framework_basis(data, fw, 1e-12);
  ExperimentConfig cfg = small_config();
  cfg.r_list = {3, 2, b.d() + 5, b.d() + 1, 2};
  WarningCapture cap;
  const FrameworkSweep sweep = run_sweep(data, b, fw, cfg);
  ASSERT_EQ(sweep.rows.size(), 3u);
  EXPECT_EQ(sweep.rows[0].r, 2);
  EXPECT_EQ(sweep.rows[1].r, 3);
  EXPECT_EQ(sweep.rows[2].r, b.d());
  EXPECT_EQ(sweep.d, b.d());
  int clamped = 0;
  for (const auto& m : cap.messages) clamped += m.find("clamped") != std::string::npos;
  EXPECT_EQ(clamped, 2);
}

TEST(RunSweep, ParallelMatchesSerial) {
  const FomData& data = small_data();
  const Framework fw = Framework::parse("DQ-L2");
  const PodBasis b = build_framework_basis(data, fw, 1e-12);
  ExperimentConfig serial = small_config();
  serial.workers = 1;
  ExperimentConfig parallel = small_config();
  parallel.workers = 4;
  WarningCapture cap;
  const FrameworkSweep a = run_sweep(data, b, fw, serial);
  const FrameworkSweep c = run_sweep(data, b, fw, parallel);
  ASSERT_EQ(a.rows.size(), c.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].r, c.rows[i].r);
    EXPECT_EQ(a.rows[i].err_linf_l2, c.rows[i].err_linf_l2);
    EXPECT_EQ(a.rows[i].err_natural, c.rows[i].err_natural);
  }
}

TEST(RunSweep, BoundSummaryAndOutputs) {
  ScratchDir dir;
  const FomData& data = small_data();
  const Framework fw = Framework::parse("DQ-H01");
  const PodBasis b = build_framework_basis(data, fw, 1e-12);
  const ExperimentConfig cfg = small_config();
  WarningCapture cap;
  const FrameworkSweep sweep = run_sweep(data, b, fw, cfg);
  double c = 0.0;
  for (const auto& row : sweep.rows) {
    c = std::max(c, row.err_linf_l2 / (row.phi0_norm + row.rhs.rhs1));
    EXPECT_GE(row.err_natural, row.err_linf_l2);
  }
  EXPECT_DOUBLE_EQ(sweep.bounds.c_linf_l2, c);
  EXPECT_GE(sweep.bounds.c_natural, sweep.bounds.c_linf_l2);

  write_sweep_csv(sweep, dir.path() / "sweep.csv");
  write_regression_csv(sweep, dir.path() / "reg.csv");
  std::istringstream lines(slurp(dir.path() / "sweep.csv"));
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, kSweepCsvHeader);
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, static_cast<int>(sweep.rows.size()));
  EXPECT_EQ(slurp(dir.path() / "reg.csv").rfind(kRegressionCsvHeader, 0), 0u);

  const nlohmann::json side = sweep_sidecar(sweep, cfg);
  EXPECT_EQ(side.at("framework"), "DQ-H01");
  EXPECT_EQ(side.at("d"), b.d());
  EXPECT_TRUE(side.contains("rhs_terms"));
  EXPECT_TRUE(side.contains("regression_abscissa"));
}

FrameworkSweep synthetic_sweep(const std::vector<double>& errors, int d) {
  FrameworkSweep s;
  s.d = d;
  for (size_t i = 0; i < errors.size(); ++i) {
    ErrorReport row;
    row.r = static_cast<int>(i) + 1;
    row.err_linf_l2 = errors[i];
    row.err_natural = errors[i];
    row.tail = std::pow(10.0, -static_cast<double>(i));
    row.rhs.rhs1 = 2.0 * row.tail;
    row.rhs.rhs2 = row.tail;
    s.rows.push_back(row);
  }
  return s;
}

TEST(RegressionPoints, DataDrivenRange) {
  // r = 1..3 sit on a plateau, r = 8 is saturated, r = 9, 10 exceed d - 2.
  const FrameworkSweep s =
      synthetic_sweep({1.0, 0.9, 0.6, 0.1, 1e-2, 1e-3, 1e-4, 1e-13, 1e-6, 1e-7}, 10);
  const auto pts = regression_points(s, "err_linf_l2", RegressionOptions{});
  std::vector<int> rs;
  for (const auto& p : pts) rs.push_back(p.r);
  EXPECT_EQ(rs, (std::vector<int>{4, 5, 6, 7}));
  EXPECT_DOUBLE_EQ(pts[0].abscissa, s.rows[3].tail);

  RegressionOptions no_plateau;
  no_plateau.plateau_fraction = 0.0;
  EXPECT_EQ(regression_points(s, "err_linf_l2", no_plateau).front().r, 1);

  RegressionOptions rhs;
  rhs.abscissa = RegressionAbscissa::kRhs1;
  EXPECT_DOUBLE_EQ(regression_points(s, "err_natural", rhs)[0].abscissa, s.rows[3].rhs.rhs1);
  EXPECT_THROW(regression_points(s, "bogus", rhs), InvalidArgument);
}

TEST(RegressionPoints, ExplicitRangeOverridesFilters) {
  const FrameworkSweep s =
      synthetic_sweep({1.0, 0.9, 0.6, 0.1, 1e-2, 1e-3, 1e-4, 1e-13, 1e-6, 1e-7}, 10);
  RegressionOptions opts;
  opts.r_min = 2;
  opts.r_max = 9;
  const auto pts = regression_points(s, "err_linf_l2", opts);
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_EQ(pts.front().r, 2);
  EXPECT_EQ(pts.back().r, 9);
}

TEST(WriteSolutions, RowsIncludeBoundaryNodes) {
  const FomData& data = small_data();
  const Framework fw = Framework::parse("noDQ-H01");
  const PodBasis b = build_framework_basis(data, fw, 1e-12);
  ExperimentConfig cfg = small_config();
  cfg.solution_r = {2, 4};
  cfg.solution_times = {0.0, 0.5};
  std::ostringstream csv;
  const auto summary = write_solutions(data, b, fw, cfg, csv, true);
  ASSERT_EQ(summary.size(), 4u);
  for (const auto& s : summary) {
    EXPECT_EQ(s.framework, "noDQ-H01");
    EXPECT_GE(s.l2_error, 0.0);
  }
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "framework,r,t,x,u_fom,u_rom");
  int rows = 0;
  std::string first;
  for (std::string line; std::getline(lines, line);) {
    if (rows == 0) first = line;
    ++rows;
  }
  EXPECT_EQ(rows, 4 * 33);
  EXPECT_EQ(first.rfind("noDQ-H01,2,0,0,0,0", 0), 0u);
}

TEST(Verification, EnergyAndAntisymmetryHelpers) {
  const FomData& data = small_data();
  const FemOperators ops{Mesh1D(data.n_cells)};
  EXPECT_LE(fom_energy_residual(data.snaps, data.nu, ops), 1e-10);
  const PodBasis b = build_framework_basis(data, Framework::parse("DQ-L2"), 1e-12);
  const RomOperators rom = assemble_rom(b, 6, ops, data.snaps.snapshot(0));
  const RomTrajectory traj = solve_rom(rom, data.nu, data.snaps.dt, data.snaps.n_steps());
  EXPECT_LE(rom_energy_residual(traj, rom, data.nu), 1e-10);
  EXPECT_LE(antisymmetry_defect(rom, 200), 1e-10);
}

TEST(Verification, IdentitySuitePassesAndNegativeControlFails) {
  const FomData& data = small_data();
  const FemOperators ops{Mesh1D(data.n_cells)};
  const auto good = pod_identity_checks(data.snaps, ops, 1e-12);
  ASSERT_FALSE(good.empty());
  for (const auto& c : good) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
  const auto bad = pod_identity_checks(data.snaps, ops, 1e-12, 1.01);
  int failed = 0;
  for (const auto& c : bad) failed += !c.passed;
  EXPECT_GT(failed, 0);
  for (const auto& c : uniform_bound_checks(data.snaps, ops, 1e-12)) {
    EXPECT_TRUE(c.passed) << c.name << " " << c.value;
  }
}

TEST(Verification, ReportJsonAndUnknownSuite) {
  VerifyReport rep;
  rep.suite = "x";
  rep.checks.push_back({"a", 1e-9, 1e-7, true});
  EXPECT_TRUE(rep.passed());
  const auto j = rep.to_json();
  EXPECT_EQ(j.at("suite"), "x");
  EXPECT_EQ(j.at("passed"), true);
  EXPECT_EQ(j.at("checks").size(), 1u);
  rep.checks.push_back({"b", 1.0, 0.5, false});
  EXPECT_FALSE(rep.passed());
  VerifyOptions opts;
  opts.suite = "everything";
  EXPECT_THROW(run_verification(opts), InvalidArgument);
}

}  // namespace
}  // namespace podlab
