#pragma once

#include "podlab/fom.hpp"
#include "podlab/mesh_fem.hpp"

namespace podlab {

struct PodConfig {
  InnerProduct inner_product = InnerProduct::kL2;
  bool use_dq = false;
  /// Eigenvalues at or below eigenvalue_cutoff * lambda_1 are discarded.
  double eigenvalue_cutoff = 1e-12;

  void validate() const;
};

/// Data that a POD basis is built from: columns are the members, weight_m
/// is the normalization of the averaged projection error.
struct SnapshotCollection {
  Matrix members;  // dim x n_members
  int weight_m = 0;
  bool use_dq = false;

  [[nodiscard]] int size() const noexcept {
    return static_cast<int>(members.cols());
  }
};

struct PodBasis {
  Matrix modes;        // dim x d, H-orthonormal
  Vector eigenvalues;  // descending, all > cutoff * lambda_1
  /// Full spectrum of the Gram matrix before the cutoff, descending.
  Vector gram_spectrum;
  int weight_m = 0;
  InnerProduct inner_product = InnerProduct::kL2;
  bool use_dq = false;
  double eigenvalue_cutoff = 1e-12;

  [[nodiscard]] int d() const noexcept {
    return static_cast<int>(eigenvalues.size());
  }
  [[nodiscard]] FemFunction mode(int i) const { return modes.col(i); }
  /// Throws InvalidArgument unless lo <= r <= d.
  void check_rank(int r, int lo = 1) const;
};

/// Snapshots alone (weight N+1) or snapshots followed by the difference
/// quotients (u^n - u^{n-1}) / dt, n = 1..N (weight 2N+1).
SnapshotCollection build_dq_collection(const SnapshotSet& snaps, bool use_dq);

/// Method of snapshots: eigen-decomposition of the weighted Gram matrix of
/// the collection in the configured inner product.
PodBasis compute_pod(const SnapshotCollection& collection, const PodConfig& cfg,
                     const FemOperators& ops);

/// Convenience: collection + POD in one call.
PodBasis build_basis(const SnapshotSet& snaps, const PodConfig& cfg,
                     const FemOperators& ops);

/// H-orthogonal projection sum_{i<=r} (u, phi_i)_H phi_i.
FemFunction pod_project(const FemFunction& u, const PodBasis& basis, int r,
                        const FemOperators& ops);
Matrix pod_project(const Matrix& u, const PodBasis& basis, int r,
                   const FemOperators& ops);

/// sum_{i=r+1}^{d} lambda_i; 0 <= r <= d.
double tail_sum(const PodBasis& basis, int r);

/// max_{i,j} |(phi_i, phi_j)_H - delta_ij|.
double orthonormality_defect(const PodBasis& basis, const FemOperators& ops);

}  // namespace podlab
