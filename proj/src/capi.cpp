#include "podlab/podlab.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "podlab/error.hpp"
#include "podlab/experiment.hpp"

struct podlab_config {
  podlab::ExperimentConfig cfg;
};

struct podlab_snapshots {
  podlab::FomData data;
};

struct podlab_basis {
  podlab::PodBasis basis;
  podlab::Framework framework;
  int n_cells = 0;
};

struct podlab_sweep {
  podlab::FrameworkSweep sweep;
};

namespace {

thread_local std::string g_last_error;

podlab_status fail(podlab_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

podlab_status from_code(podlab::ErrorCode code) {
  return static_cast<podlab_status>(static_cast<int>(code));
}

template <typename Body>
podlab_status guarded(Body body) {
  try {
    body();
    g_last_error.clear();
    return PODLAB_OK;
  } catch (const podlab::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(PODLAB_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PODLAB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PODLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PODLAB_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw podlab::InvalidArgument(what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double column_value(const podlab::ErrorReport& row, const std::string& column) {
  if (column == "r") return row.r;
  if (column == "err_linf_l2") return row.err_linf_l2;
  if (column == "err_natural") return row.err_natural;
  if (column == "eta_linf_l2") return row.eta_linf_l2;
  if (column == "tail") return row.tail;
  if (column == "rhs1") return row.rhs.rhs1;
  if (column == "rhs2") return row.rhs.rhs2;
  if (column == "truly_optimal") return row.optimality.truly_optimal;
  if (column == "optimal_I") return row.optimality.optimal_i;
  if (column == "optimal_II") return row.optimality.optimal_ii;
  if (column == "s_r_norm") return row.s_r_norm;
  if (column == "m_r_inv_norm") return row.m_r_inv_norm;
  if (column == "phi0_norm") return row.phi0_norm;
  throw podlab::InvalidArgument("unknown sweep column '" + column + "'");
}

podlab::ExperimentConfig sweep_config(const podlab::ExperimentConfig& cfg,
                                      const podlab::FomData& data) {
  podlab::ExperimentConfig out = cfg;
  out.n_cells = data.n_cells;
  out.nu = data.nu;
  out.dt = data.snaps.dt;
  out.t_final = data.t_final;
  return out;
}

std::atomic<podlab_warning_fn> g_user_fn{nullptr};

void warning_trampoline(const char* message, void* user) {
  if (const podlab_warning_fn fn = g_user_fn.load()) fn(message, user);
}

}  // namespace

extern "C" {

const char* podlab_version(void) { return "1.0.0"; }

const char* podlab_last_error(void) { return g_last_error.c_str(); }

void podlab_set_warning_callback(podlab_warning_fn fn, void* user) {
  g_user_fn.store(fn);
  podlab::set_warning_sink(fn ? warning_trampoline : nullptr, user);
}

void podlab_string_free(char* s) { std::free(s); }

podlab_status podlab_config_default(podlab_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new podlab_config{};
  });
}

podlab_status podlab_config_from_json(const char* json, podlab_config** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "NULL argument");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw podlab::InvalidArgument(std::string("config is not valid JSON: ") +
                                    e.what());
    }
    podlab::ExperimentConfig cfg = podlab::config_from_json(j);
    cfg.validate();
    *out = new podlab_config{std::move(cfg)};
  });
}

podlab_status podlab_config_to_json(const podlab_config* cfg, char** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "NULL argument");
    *out = dup_string(podlab::to_json(cfg->cfg).dump(2));
  });
}

void podlab_config_free(podlab_config* cfg) { delete cfg; }

podlab_status podlab_fom_run(const podlab_config* cfg, podlab_snapshots** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "NULL argument");
    *out = new podlab_snapshots{podlab::run_fom(cfg->cfg)};
  });
}

podlab_status podlab_snapshots_save(const podlab_snapshots* s, const char* path) {
  return guarded([&] {
    require(s != nullptr && path != nullptr, "NULL argument");
    podlab::save_snapshots(s->data, path);
  });
}

podlab_status podlab_snapshots_load(const char* path, podlab_snapshots** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "NULL argument");
    *out = new podlab_snapshots{podlab::load_snapshots(path)};
  });
}

podlab_status podlab_snapshots_shape(const podlab_snapshots* s, int* n_times,
                                     int* dim) {
  return guarded([&] {
    require(s != nullptr, "NULL snapshots");
    if (n_times) *n_times = static_cast<int>(s->data.snaps.values.cols());
    if (dim) *dim = s->data.snaps.dim();
  });
}

podlab_status podlab_snapshots_get(const podlab_snapshots* s, int k, double* buf,
                                   int len) {
  return guarded([&] {
    require(s != nullptr && buf != nullptr, "NULL argument");
    const auto& v = s->data.snaps.values;
    require(k >= 0 && k < v.cols(), "snapshot index out of range");
    if (len < v.rows()) throw podlab::DimensionMismatch("buffer too small");
    for (Eigen::Index i = 0; i < v.rows(); ++i) buf[i] = v(i, k);
  });
}

void podlab_snapshots_free(podlab_snapshots* s) { delete s; }

podlab_status podlab_basis_build(const podlab_snapshots* s,
                                 const podlab_config* cfg, const char* framework,
                                 podlab_basis** out) {
  return guarded([&] {
    require(s != nullptr && cfg != nullptr && framework != nullptr && out != nullptr,
            "NULL argument");
    const podlab::Framework fw = podlab::Framework::parse(framework);
    *out = new podlab_basis{
        podlab::build_framework_basis(s->data, fw, cfg->cfg.eigenvalue_cutoff), fw,
        s->data.n_cells};
  });
}

podlab_status podlab_basis_save(const podlab_basis* b, const char* matrix_path,
                                const char* sidecar_path) {
  return guarded([&] {
    require(b != nullptr && matrix_path != nullptr && sidecar_path != nullptr,
            "NULL argument");
    podlab::save_basis(b->basis, b->n_cells, matrix_path, sidecar_path,
                       b->framework.name());
  });
}

podlab_status podlab_basis_load(const char* matrix_path, const char* sidecar_path,
                                podlab_basis** out) {
  return guarded([&] {
    require(matrix_path != nullptr && sidecar_path != nullptr && out != nullptr,
            "NULL argument");
    podlab::PodBasis basis = podlab::load_basis(matrix_path, sidecar_path);
    const podlab::Framework fw{basis.use_dq, basis.inner_product};
    const int n_cells = static_cast<int>(basis.modes.rows()) + 1;
    *out = new podlab_basis{std::move(basis), fw, n_cells};
  });
}

podlab_status podlab_basis_dimension(const podlab_basis* b, int* d) {
  return guarded([&] {
    require(b != nullptr && d != nullptr, "NULL argument");
    *d = b->basis.d();
  });
}

podlab_status podlab_basis_framework(const podlab_basis* b, char* buf, int len) {
  return guarded([&] {
    require(b != nullptr && buf != nullptr && len > 0, "bad argument");
    const std::string name = b->framework.name();
    const std::size_t n = std::min(name.size(), static_cast<std::size_t>(len - 1));
    std::memcpy(buf, name.data(), n);
    buf[n] = '\0';
  });
}

podlab_status podlab_basis_eigenvalues(const podlab_basis* b, double* buf,
                                       int len) {
  return guarded([&] {
    require(b != nullptr && buf != nullptr, "NULL argument");
    if (len < b->basis.d()) throw podlab::DimensionMismatch("buffer too small");
    for (int i = 0; i < b->basis.d(); ++i) buf[i] = b->basis.eigenvalues[i];
  });
}

void podlab_basis_free(podlab_basis* b) { delete b; }

podlab_status podlab_sweep_run(const podlab_snapshots* s, const podlab_basis* b,
                               const podlab_config* cfg, podlab_sweep** out) {
  return guarded([&] {
    require(s != nullptr && b != nullptr && cfg != nullptr && out != nullptr,
            "NULL argument");
    *out = new podlab_sweep{podlab::run_sweep(s->data, b->basis, b->framework,
                                              sweep_config(cfg->cfg, s->data))};
  });
}

podlab_status podlab_sweep_rows(const podlab_sweep* sw, int* rows) {
  return guarded([&] {
    require(sw != nullptr && rows != nullptr, "NULL argument");
    *rows = static_cast<int>(sw->sweep.rows.size());
  });
}

podlab_status podlab_sweep_value(const podlab_sweep* sw, int row,
                                 const char* column, double* out) {
  return guarded([&] {
    require(sw != nullptr && column != nullptr && out != nullptr, "NULL argument");
    require(row >= 0 && row < static_cast<int>(sw->sweep.rows.size()),
            "row out of range");
    *out = column_value(sw->sweep.rows[row], column);
  });
}

podlab_status podlab_sweep_regression(const podlab_sweep* sw, const char* quantity,
                                      double* slope, double* r_squared, int* r_min,
                                      int* r_max) {
  return guarded([&] {
    require(sw != nullptr && quantity != nullptr, "NULL argument");
    for (const auto& reg : sw->sweep.regressions) {
      if (reg.quantity != quantity) continue;
      if (slope) *slope = reg.fit.slope;
      if (r_squared) *r_squared = reg.fit.r_squared;
      if (r_min) *r_min = reg.fit.r_min;
      if (r_max) *r_max = reg.fit.r_max;
      return;
    }
    throw podlab::InvalidArgument(std::string("no regression for '") + quantity + "'");
  });
}

podlab_status podlab_sweep_save(const podlab_sweep* sw, const podlab_config* cfg,
                                const char* dir) {
  return guarded([&] {
    require(sw != nullptr && cfg != nullptr && dir != nullptr, "NULL argument");
    const std::filesystem::path base(dir);
    const std::string fw = sw->sweep.framework.name();
    podlab::write_sweep_csv(sw->sweep, base / ("sweep_" + fw + ".csv"));
    podlab::write_regression_csv(sw->sweep, base / ("regression_" + fw + ".csv"));
    std::ofstream side(base / ("sweep_" + fw + ".json"), std::ios::binary);
    if (!side) throw podlab::IoError("cannot write sweep sidecar in " + base.string());
    side << podlab::sweep_sidecar(sw->sweep, cfg->cfg).dump(2) << '\n';
  });
}

podlab_status podlab_sweep_summary(const podlab_sweep* sw, const podlab_config* cfg,
                                   char** json) {
  return guarded([&] {
    require(sw != nullptr && cfg != nullptr && json != nullptr, "NULL argument");
    nlohmann::json j = podlab::sweep_sidecar(sw->sweep, cfg->cfg);
    j["regressions"] = nlohmann::json::array();
    for (const auto& reg : sw->sweep.regressions) {
      j["regressions"].push_back({{"quantity", reg.quantity},
                                  {"slope", reg.fit.slope},
                                  {"r_squared", reg.fit.r_squared},
                                  {"r_min", reg.fit.r_min},
                                  {"r_max", reg.fit.r_max}});
    }
    *json = dup_string(j.dump(2));
  });
}

void podlab_sweep_free(podlab_sweep* sw) { delete sw; }

podlab_status podlab_solutions_save(const podlab_snapshots* s,
                                    const podlab_basis* b,
                                    const podlab_config* cfg, const char* csv_path,
                                    int truncate, char** summary_json) {
  return guarded([&] {
    require(s != nullptr && b != nullptr && cfg != nullptr && csv_path != nullptr,
            "NULL argument");
    const std::filesystem::path path(csv_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const bool fresh = truncate != 0 || !std::filesystem::exists(path) ||
                       std::filesystem::file_size(path) == 0;
    std::ofstream out(path, fresh ? std::ios::binary | std::ios::trunc
                                  : std::ios::binary | std::ios::app);
    if (!out) throw podlab::IoError("cannot open '" + path.string() + "'");
    const auto summary =
        podlab::write_solutions(s->data, b->basis, b->framework,
                                sweep_config(cfg->cfg, s->data), out, fresh);
    if (!out) throw podlab::IoError("write failed for " + path.string());
    if (summary_json) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& row : summary) {
        j.push_back({{"framework", row.framework},
                     {"r", row.r},
                     {"t", row.t},
                     {"l2_error", row.l2_error}});
      }
      *summary_json = dup_string(j.dump(2));
    }
  });
}

podlab_status podlab_verify_run(const char* suite, int perturb, char** report_json,
                                int* passed) {
  return guarded([&] {
    require(suite != nullptr, "NULL suite");
    podlab::VerifyOptions opts;
    opts.suite = suite;
    opts.perturb_eigenvalues = perturb != 0;
    const podlab::VerifyReport rep = podlab::run_verification(opts);
    if (report_json) *report_json = dup_string(rep.to_json().dump(2));
    if (passed) *passed = rep.passed() ? 1 : 0;
  });
}

}  // extern "C"
