#pragma once

#include <filesystem>
#include <string>

#include "podlab/fom.hpp"
#include "podlab/pod.hpp"
#include "podlab/rom.hpp"

namespace podlab {

/// Formats a double with 17 significant digits (lossless round trip).
std::string format_double(double value);

/// Snapshots together with the run parameters recorded in the file header.
struct FomData {
  int n_cells = 0;
  double nu = 0.0;
  double t_final = 0.0;
  SnapshotSet snaps;
};

/// Snapshot matrix file:
///
///   # podlab-snapshots n_cells=<int> dt=<real> nu=<real> t_final=<real>
///   <row k: dim comma-separated values of u_h^k>     (k = 0..N)
///
/// Rows are time indices, columns interior nodes; '\n' line endings.
void save_snapshots(const FomData& data, const std::filesystem::path& path);
FomData load_snapshots(const std::filesystem::path& path);

/// Basis files: a CSV matrix with the modes as columns
///
///   # podlab-basis n_cells=<int> d=<int>
///   <row j: d values, mode values at interior node j>
///
/// and a JSON sidecar with eigenvalues, inner_product, use_dq, weight_M,
/// eps_d (and the framework name when known).
void save_basis(const PodBasis& basis, int n_cells,
                const std::filesystem::path& matrix_path,
                const std::filesystem::path& sidecar_path,
                const std::string& framework = "");
PodBasis load_basis(const std::filesystem::path& matrix_path,
                    const std::filesystem::path& sidecar_path);

/// Reduced trajectory in the snapshot layout (rows = time index, columns =
/// mode coefficients) plus a JSON sidecar with r, nu, dt and the basis id.
void save_trajectory(const RomTrajectory& traj, double nu,
                     const std::string& basis_id,
                     const std::filesystem::path& matrix_path,
                     const std::filesystem::path& sidecar_path);

}  // namespace podlab
