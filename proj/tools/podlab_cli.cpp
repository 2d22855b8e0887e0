#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "podlab/podlab.h"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerification = 3;

struct CliError {
  int exit_code;
  std::string message;
};

int exit_code_for(podlab_status status) {
  switch (status) {
    case PODLAB_OK:
      return kExitOk;
    case PODLAB_ERR_INVALID_ARGUMENT:
    case PODLAB_ERR_DIMENSION_MISMATCH:
    case PODLAB_ERR_IO:
      return kExitUsage;
    case PODLAB_ERR_VERIFICATION:
      return kExitVerification;
    case PODLAB_ERR_NONLINEAR_SOLVE:
    case PODLAB_ERR_EMPTY_BASIS:
    case PODLAB_ERR_ILL_CONDITIONED:
    case PODLAB_ERR_INTERNAL:
      return kExitSolver;
  }
  return kExitSolver;
}

void check(podlab_status status) {
  if (status != PODLAB_OK) throw CliError{exit_code_for(status), podlab_last_error()};
}

std::string take_string(char* s) {
  std::string out(s ? s : "");
  podlab_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Config = Handle<podlab_config, podlab_config_free>;
using Snapshots = Handle<podlab_snapshots, podlab_snapshots_free>;
using Basis = Handle<podlab_basis, podlab_basis_free>;
using Sweep = Handle<podlab_sweep, podlab_sweep_free>;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string snapshots_path;
  bool seedless = false;

  std::optional<int> n_cells;
  std::optional<double> nu;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<double> eigenvalue_cutoff;
  std::optional<double> i_u_constant;
  std::optional<int> workers;
  std::optional<int> r_min;
  std::optional<int> r_max;
  std::vector<int> r_list;
  std::vector<std::string> frameworks;
  std::vector<int> solution_r;
  std::vector<double> solution_times;
  std::string abscissa;
  std::string rom_initial;

  std::string suite = "identities";
  bool perturb = false;
};

Json load_config_json(const Options& o) {
  Json j = Json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path, std::ios::binary);
    if (!in) throw CliError{kExitUsage, "cannot open config '" + o.config_path + "'"};
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw CliError{kExitUsage, "bad config '" + o.config_path + "': " + e.what()};
    }
  }
  if (o.n_cells) j["n_cells"] = *o.n_cells;
  if (o.nu) j["nu"] = *o.nu;
  if (o.dt) j["dt"] = *o.dt;
  if (o.t_final) j["t_final"] = *o.t_final;
  if (o.eigenvalue_cutoff) j["eigenvalue_cutoff"] = *o.eigenvalue_cutoff;
  if (o.i_u_constant) j["i_u_constant"] = *o.i_u_constant;
  if (o.workers) j["workers"] = *o.workers;
  if (!o.frameworks.empty()) j["frameworks"] = o.frameworks;
  if (!o.r_list.empty()) {
    j["r_list"] = o.r_list;
  } else if (o.r_min || o.r_max) {
    if (!(o.r_min && o.r_max)) {
      throw CliError{kExitUsage, "--r-min and --r-max must be given together"};
    }
    j.erase("r_list");
    j["r_range"] = {{"min", *o.r_min}, {"max", *o.r_max}};
  }
  if (!o.solution_r.empty()) j["solution_r"] = o.solution_r;
  if (!o.solution_times.empty()) j["solution_times"] = o.solution_times;
  if (!o.abscissa.empty()) j["regression"]["abscissa"] = o.abscissa;
  if (!o.rom_initial.empty()) j["rom_initial"] = o.rom_initial;
  if (!o.out_dir.empty()) j["output_dir"] = o.out_dir;
  return j;
}

Config make_config(const Options& o, Json* resolved = nullptr) {
  Config cfg;
  check(podlab_config_from_json(load_config_json(o).dump().c_str(), cfg.out()));
  char* text = nullptr;
  check(podlab_config_to_json(cfg.get(), &text));
  const Json j = Json::parse(take_string(text));
  if (resolved) *resolved = j;
  return cfg;
}

fs::path out_dir(const Json& cfg) {
  const fs::path dir = cfg.at("output_dir").get<std::string>();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError{kExitUsage, "cannot create '" + dir.string() + "': " + ec.message()};
  return dir;
}

fs::path snapshots_file(const Options& o, const fs::path& dir) {
  return o.snapshots_path.empty() ? dir / "snapshots.csv" : fs::path(o.snapshots_path);
}

Snapshots load_snapshots(const fs::path& path) {
  if (!fs::exists(path)) {
    throw CliError{kExitUsage, "snapshot file '" + path.string() +
                                   "' not found (run `podlab fom` first)"};
  }
  Snapshots s;
  check(podlab_snapshots_load(path.string().c_str(), s.out()));
  return s;
}

fs::path basis_matrix(const fs::path& dir, const std::string& fw) {
  return dir / ("basis_" + fw + ".csv");
}
fs::path basis_sidecar(const fs::path& dir, const std::string& fw) {
  return dir / ("basis_" + fw + ".json");
}

Basis build_and_save_basis(const Snapshots& s, const Config& cfg,
                           const fs::path& dir, const std::string& fw) {
  Basis b;
  check(podlab_basis_build(s.get(), cfg.get(), fw.c_str(), b.out()));
  check(podlab_basis_save(b.get(), basis_matrix(dir, fw).string().c_str(),
                          basis_sidecar(dir, fw).string().c_str()));
  return b;
}

Basis load_basis(const fs::path& dir, const std::string& fw) {
  const fs::path m = basis_matrix(dir, fw);
  const fs::path sc = basis_sidecar(dir, fw);
  if (!fs::exists(m) || !fs::exists(sc)) {
    throw CliError{kExitUsage, "basis for " + fw + " not found in '" + dir.string() +
                                   "' (run `podlab pod` first)"};
  }
  Basis b;
  check(podlab_basis_load(m.string().c_str(), sc.string().c_str(), b.out()));
  return b;
}

int basis_dimension(const Basis& b) {
  int d = 0;
  check(podlab_basis_dimension(b.get(), &d));
  return d;
}

int cmd_fom(const Options& o) {
  Json resolved;
  const Config cfg = make_config(o, &resolved);
  const fs::path dir = out_dir(resolved);
  Snapshots s;
  check(podlab_fom_run(cfg.get(), s.out()));
  const fs::path path = snapshots_file(o, dir);
  check(podlab_snapshots_save(s.get(), path.string().c_str()));
  int n_times = 0;
  int dim = 0;
  check(podlab_snapshots_shape(s.get(), &n_times, &dim));
  Json sidecar = {{"n_times", n_times}, {"dim", dim}, {"initial_condition", "step"}};
  for (const char* key : {"n_cells", "nu", "dt", "t_final"}) sidecar[key] = resolved.at(key);
  fs::path side = path;
  side.replace_extension(".json");
  std::ofstream(side, std::ios::binary) << sidecar.dump(2) << '\n';
  std::cout << "snapshots " << n_times << "x" << dim << " -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_pod(const Options& o) {
  Json resolved;
  const Config cfg = make_config(o, &resolved);
  const fs::path dir = out_dir(resolved);
  const Snapshots s = load_snapshots(snapshots_file(o, dir));
  for (const auto& fw : resolved.at("frameworks")) {
    const std::string name = fw.get<std::string>();
    const Basis b = build_and_save_basis(s, cfg, dir, name);
    std::cout << name << ": d = " << basis_dimension(b) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  Json resolved;
  const Config cfg = make_config(o, &resolved);
  const fs::path dir = out_dir(resolved);
  const Snapshots s = load_snapshots(snapshots_file(o, dir));
  Json summary = Json::array();
  for (const auto& fw : resolved.at("frameworks")) {
    const std::string name = fw.get<std::string>();
    const Basis b = fs::exists(basis_matrix(dir, name))
                        ? load_basis(dir, name)
                        : build_and_save_basis(s, cfg, dir, name);
    Sweep sw;
    check(podlab_sweep_run(s.get(), b.get(), cfg.get(), sw.out()));
    check(podlab_sweep_save(sw.get(), cfg.get(), dir.string().c_str()));
    char* text = nullptr;
    check(podlab_sweep_summary(sw.get(), cfg.get(), &text));
    const Json j = Json::parse(take_string(text));
    summary.push_back(j);

    std::cout << name << " (d = " << j.at("d").get<int>() << ")";
    for (const auto& reg : j.at("regressions")) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %s slope %.3f (r %d..%d)",
                    reg.at("quantity").get<std::string>().c_str(),
                    reg.at("slope").get<double>(), reg.at("r_min").get<int>(),
                    reg.at("r_max").get<int>());
      std::cout << buf;
    }
    std::cout << '\n';
  }
  std::ofstream(dir / "sweep_summary.json", std::ios::binary) << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_solutions(const Options& o) {
  Json resolved;
  const Config cfg = make_config(o, &resolved);
  const fs::path dir = out_dir(resolved);
  const Snapshots s = load_snapshots(snapshots_file(o, dir));
  const fs::path csv = dir / "solutions.csv";
  Json summary = Json::array();
  bool first = true;
  for (const auto& fw : resolved.at("frameworks")) {
    const Basis b = load_basis(dir, fw.get<std::string>());
    char* text = nullptr;
    check(podlab_solutions_save(s.get(), b.get(), cfg.get(), csv.string().c_str(),
                                first ? 1 : 0, &text));
    first = false;
    for (const auto& row : Json::parse(take_string(text))) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-9s r=%-3d t=%-6g L2 error %.6e",
                    row.at("framework").get<std::string>().c_str(),
                    row.at("r").get<int>(), row.at("t").get<double>(),
                    row.at("l2_error").get<double>());
      std::cout << buf << '\n';
      summary.push_back(row);
    }
  }
  std::ofstream(dir / "solutions_summary.json", std::ios::binary) << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const Options& o) {
  char* text = nullptr;
  int passed = 0;
  check(podlab_verify_run(o.suite.c_str(), o.perturb ? 1 : 0, &text, &passed));
  const std::string report = take_string(text);
  if (!o.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    std::ofstream(fs::path(o.out_dir) / "verify.json", std::ios::binary) << report << '\n';
  }
  std::cout << report << '\n';
  return passed ? kExitOk : kExitVerification;
}

void add_shared(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment config");
  cmd->add_option("--out", o.out_dir, "Output directory (overrides output_dir)");
  cmd->add_flag("--seedless", o.seedless,
                "No randomness is used anywhere; accepted for explicitness");
}

void add_physics(CLI::App* cmd, Options& o) {
  cmd->add_option("--n-cells", o.n_cells, "Number of mesh cells");
  cmd->add_option("--nu", o.nu, "Viscosity");
  cmd->add_option("--dt", o.dt, "Time step");
  cmd->add_option("--t-final", o.t_final, "Final time");
  cmd->add_option("--snapshots", o.snapshots_path,
                  "Snapshot file (default <out>/snapshots.csv)");
}

void add_basis(CLI::App* cmd, Options& o) {
  cmd->add_option("--frameworks", o.frameworks,
                  "Subset of noDQ-L2 noDQ-H01 DQ-L2 DQ-H01");
  cmd->add_option("--eigenvalue-cutoff", o.eigenvalue_cutoff,
                  "Relative eigenvalue cutoff");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POD reduced order models for the 1D Burgers equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", podlab_version());
  Options o;

  CLI::App* fom = app.add_subcommand("fom", "Run the full-order model and save snapshots");
  add_shared(fom, o);
  add_physics(fom, o);

  CLI::App* pod = app.add_subcommand("pod", "Build and save POD bases");
  add_shared(pod, o);
  add_physics(pod, o);
  add_basis(pod, o);

  CLI::App* sweep = app.add_subcommand("sweep", "Reduced-order error sweep over r");
  add_shared(sweep, o);
  add_physics(sweep, o);
  add_basis(sweep, o);
  sweep->add_option("--r", o.r_list, "Explicit list of r values");
  sweep->add_option("--r-min", o.r_min, "Smallest r");
  sweep->add_option("--r-max", o.r_max, "Largest r");
  sweep->add_option("--i-u", o.i_u_constant, "Constant multiplying dt^4 in the bounds");
  sweep->add_option("--abscissa", o.abscissa, "Regression abscissa: tail, rhs1, rhs2");
  sweep->add_option("--rom-initial", o.rom_initial, "pod or ritz");
  sweep->add_option("--workers", o.workers, "Worker threads (0 = hardware)");

  CLI::App* sol = app.add_subcommand("solutions", "FOM and ROM profiles at selected r and t");
  add_shared(sol, o);
  add_physics(sol, o);
  sol->add_option("--frameworks", o.frameworks, "Frameworks to compare");
  sol->add_option("--r", o.solution_r, "r values");
  sol->add_option("--times", o.solution_times, "Output times");
  sol->add_option("--rom-initial", o.rom_initial, "pod or ritz");

  CLI::App* verify = app.add_subcommand("verify", "Self-contained verification suites");
  add_shared(verify, o);
  verify->add_option("--suite", o.suite, "identities, convergence or all")
      ->check(CLI::IsMember({"identities", "convergence", "all"}));
  verify->add_flag("--perturb-eigenvalues", o.perturb,
                   "Negative control: perturb the eigenvalues before the checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fom) return cmd_fom(o);
    if (*pod) return cmd_pod(o);
    if (*sweep) return cmd_sweep(o);
    if (*sol) return cmd_solutions(o);
    if (*verify) return cmd_verify(o);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
