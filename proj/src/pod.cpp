#include "podlab/pod.hpp"

#include <cmath>
#include <string>

#include "podlab/error.hpp"

namespace podlab {

void PodConfig::validate() const {
  if (!(eigenvalue_cutoff > 0.0 && eigenvalue_cutoff < 1.0)) {
    throw InvalidArgument("eigenvalue_cutoff must lie in (0, 1)");
  }
}

void PodBasis::check_rank(int r, int lo) const {
  if (r < lo || r > d()) {
    throw InvalidArgument("r = " + std::to_string(r) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(d()) +
                          "]");
  }
}

SnapshotCollection build_dq_collection(const SnapshotSet& snaps, bool use_dq) {
  const int n = snaps.n_steps();
  if (n < 1) throw InvalidArgument("collection needs at least two snapshots");
  SnapshotCollection out;
  out.use_dq = use_dq;
  if (!use_dq) {
    out.members = snaps.values;
    out.weight_m = n + 1;
    return out;
  }
  out.members.resize(snaps.dim(), 2 * n + 1);
  out.members.leftCols(n + 1) = snaps.values;
  out.members.rightCols(n) =
      (snaps.values.rightCols(n) - snaps.values.leftCols(n)) / snaps.dt;
  out.weight_m = 2 * n + 1;
  return out;
}

double orthonormality_defect(const PodBasis& basis, const FemOperators& ops) {
  if (basis.d() == 0) return 0.0;
  const Matrix gram = basis.modes.transpose() *
                      ops.gram(basis.inner_product).apply(basis.modes);
  return (gram - Matrix::Identity(basis.d(), basis.d())).cwiseAbs().maxCoeff();
}

namespace {

// Two passes of modified Gram-Schmidt in the basis inner product.
void reorthonormalize(Matrix& modes, const SymTridiagonal& gram) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < modes.cols(); ++i) {
      for (int j = 0; j < i; ++j) {
        const double c = gram.bilinear(modes.col(j), modes.col(i));
        modes.col(i) -= c * modes.col(j);
      }
      modes.col(i) /= std::sqrt(gram.bilinear(modes.col(i), modes.col(i)));
    }
  }
}

}  // namespace

PodBasis compute_pod(const SnapshotCollection& collection, const PodConfig& cfg,
                     const FemOperators& ops) {
  cfg.validate();
  if (collection.size() == 0 || collection.weight_m <= 0) {
    throw InvalidArgument("compute_pod: empty collection");
  }
  if (collection.members.rows() != ops.dim()) {
    throw DimensionMismatch("compute_pod: member size does not match mesh");
  }
  const SymTridiagonal& gram_op = ops.gram(cfg.inner_product);
  const double weight = collection.weight_m;

  Matrix gram = collection.members.transpose() *
                gram_op.apply(collection.members);
  gram = 0.5 * (gram + gram.transpose()) / weight;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw IllConditioned("compute_pod: Gram eigensolver did not converge");
  }
  const int m = collection.size();
  PodBasis basis;
  basis.inner_product = cfg.inner_product;
  basis.use_dq = collection.use_dq;
  basis.weight_m = collection.weight_m;
  basis.eigenvalue_cutoff = cfg.eigenvalue_cutoff;
  basis.gram_spectrum = eig.eigenvalues().reverse();

  const double lambda1 = basis.gram_spectrum[0];
  if (!(lambda1 > 0.0)) throw EmptyBasis("compute_pod: collection is all zero");
  int d = 0;
  while (d < m && basis.gram_spectrum[d] > cfg.eigenvalue_cutoff * lambda1) ++d;

  basis.eigenvalues = basis.gram_spectrum.head(d);
  basis.modes.resize(ops.dim(), d);
  for (int i = 0; i < d; ++i) {
    const double lambda = basis.eigenvalues[i];
    basis.modes.col(i) = collection.members * eig.eigenvectors().col(m - 1 - i) /
                         std::sqrt(weight * lambda);
  }
  if (orthonormality_defect(basis, ops) > 1e-10) {
    reorthonormalize(basis.modes, gram_op);
  }
  return basis;
}

PodBasis build_basis(const SnapshotSet& snaps, const PodConfig& cfg,
                     const FemOperators& ops) {
  return compute_pod(build_dq_collection(snaps, cfg.use_dq), cfg, ops);
}

Matrix pod_project(const Matrix& u, const PodBasis& basis, int r,
                   const FemOperators& ops) {
  basis.check_rank(r);
  const auto phi = basis.modes.leftCols(r);
  const Matrix coeffs =
      phi.transpose() * ops.gram(basis.inner_product).apply(u);
  return phi * coeffs;
}

FemFunction pod_project(const FemFunction& u, const PodBasis& basis, int r,
                        const FemOperators& ops) {
  if (u.size() != ops.dim()) {
    throw DimensionMismatch("pod_project: vector size does not match mesh");
  }
  return pod_project(Matrix(u), basis, r, ops).col(0);
}

double tail_sum(const PodBasis& basis, int r) {
  basis.check_rank(r, 0);
  return basis.eigenvalues.tail(basis.d() - r).sum();
}

}  // namespace podlab
