#include "podlab/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "podlab/error.hpp"

namespace podlab {

namespace {

using Json = nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

void write_matrix_rows(std::ostream& out, const Matrix& rows_by_cols) {
  std::string line;
  for (Eigen::Index i = 0; i < rows_by_cols.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < rows_by_cols.cols(); ++j) {
      if (j > 0) line += ',';
      line += format_double(rows_by_cols(i, j));
    }
    line += '\n';
    out << line;
  }
}

// Parses "# <magic> key=value key=value ...".
std::map<std::string, std::string> parse_header(const std::string& line,
                                                const std::string& magic,
                                                const std::filesystem::path& path) {
  std::istringstream in(line);
  std::string hash;
  std::string tag;
  in >> hash >> tag;
  if (hash != "#" || tag != magic) {
    throw IoError("'" + path.string() + "' is not a " + magic + " file");
  }
  std::map<std::string, std::string> out;
  std::string kv;
  while (in >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw IoError("malformed header field '" + kv + "' in " + path.string());
    }
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

double parse_number(const std::string& text, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw IoError("bad number '" + text + "' in " + path.string());
  }
  return v;
}

const std::string& require(const std::map<std::string, std::string>& fields,
                           const std::string& key,
                           const std::filesystem::path& path) {
  const auto it = fields.find(key);
  if (it == fields.end()) {
    throw IoError("header of " + path.string() + " lacks '" + key + "'");
  }
  return it->second;
}

std::vector<std::vector<double>> read_rows(std::istream& in,
                                           const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::string cell;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(parse_number(cell, path));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged matrix in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void save_snapshots(const FomData& data, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "# podlab-snapshots n_cells=" << data.n_cells
      << " dt=" << format_double(data.snaps.dt)
      << " nu=" << format_double(data.nu)
      << " t_final=" << format_double(data.t_final) << '\n';
  write_matrix_rows(out, data.snaps.values.transpose());
  if (!out) throw IoError("write failed for " + path.string());
}

FomData load_snapshots(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string header;
  std::getline(in, header);
  const auto fields = parse_header(header, "podlab-snapshots", path);
  FomData data;
  data.n_cells = static_cast<int>(parse_number(require(fields, "n_cells", path), path));
  data.snaps.dt = parse_number(require(fields, "dt", path), path);
  data.nu = parse_number(require(fields, "nu", path), path);
  data.t_final = parse_number(require(fields, "t_final", path), path);
  const auto rows = read_rows(in, path);
  if (rows.empty()) throw IoError("no snapshots in " + path.string());
  if (static_cast<int>(rows.front().size()) != data.n_cells - 1) {
    throw IoError("snapshot width does not match n_cells in " + path.string());
  }
  data.snaps.values.resize(data.n_cells - 1, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < rows[k].size(); ++j) {
      data.snaps.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = rows[k][j];
    }
  }
  return data;
}

void save_basis(const PodBasis& basis, int n_cells,
                const std::filesystem::path& matrix_path,
                const std::filesystem::path& sidecar_path,
                const std::string& framework) {
  {
    std::ofstream out = open_out(matrix_path);
    out << "# podlab-basis n_cells=" << n_cells << " d=" << basis.d() << '\n';
    write_matrix_rows(out, basis.modes);
    if (!out) throw IoError("write failed for " + matrix_path.string());
  }
  Json side;
  if (!framework.empty()) side["framework"] = framework;
  side["inner_product"] = std::string(to_string(basis.inner_product));
  side["use_dq"] = basis.use_dq;
  side["weight_M"] = basis.weight_m;
  side["eps_d"] = basis.eigenvalue_cutoff;
  side["d"] = basis.d();
  side["eigenvalues"] = std::vector<double>(basis.eigenvalues.begin(),
                                            basis.eigenvalues.end());
  std::ofstream out = open_out(sidecar_path);
  out << side.dump(2) << '\n';
}

PodBasis load_basis(const std::filesystem::path& matrix_path,
                    const std::filesystem::path& sidecar_path) {
  Json side;
  {
    std::ifstream in = open_in(sidecar_path);
    try {
      side = Json::parse(in);
    } catch (const Json::exception& e) {
      throw IoError("bad basis sidecar " + sidecar_path.string() + ": " + e.what());
    }
  }
  std::ifstream in = open_in(matrix_path);
  std::string header;
  std::getline(in, header);
  const auto fields = parse_header(header, "podlab-basis", matrix_path);
  const int d = static_cast<int>(parse_number(require(fields, "d", matrix_path), matrix_path));
  const auto rows = read_rows(in, matrix_path);

  PodBasis basis;
  try {
    basis.inner_product = parse_inner_product(side.at("inner_product").get<std::string>());
    basis.use_dq = side.at("use_dq").get<bool>();
    basis.weight_m = side.at("weight_M").get<int>();
    basis.eigenvalue_cutoff = side.at("eps_d").get<double>();
    const auto eig = side.at("eigenvalues").get<std::vector<double>>();
    basis.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Eigen::Index>(eig.size()));
  } catch (const Json::exception& e) {
    throw IoError("bad basis sidecar " + sidecar_path.string() + ": " + e.what());
  }
  basis.gram_spectrum = basis.eigenvalues;
  if (basis.d() != d || rows.empty() || static_cast<int>(rows.front().size()) != d) {
    throw IoError("basis matrix and sidecar disagree on d");
  }
  basis.modes.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int i = 0; i < d; ++i) basis.modes(static_cast<Eigen::Index>(j), i) = rows[j][i];
  }
  return basis;
}

void save_trajectory(const RomTrajectory& traj, double nu,
                     const std::string& basis_id,
                     const std::filesystem::path& matrix_path,
                     const std::filesystem::path& sidecar_path) {
  {
    std::ofstream out = open_out(matrix_path);
    out << "# podlab-trajectory r=" << traj.coefficients.rows()
        << " dt=" << format_double(traj.dt) << " nu=" << format_double(nu)
        << '\n';
    write_matrix_rows(out, traj.coefficients.transpose());
    if (!out) throw IoError("write failed for " + matrix_path.string());
  }
  Json side;
  side["r"] = traj.coefficients.rows();
  side["nu"] = nu;
  side["dt"] = traj.dt;
  side["basis"] = basis_id;
  std::ofstream out = open_out(sidecar_path);
  out << side.dump(2) << '\n';
}

}  // namespace podlab
