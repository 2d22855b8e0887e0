#include "podlab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "podlab/error.hpp"

namespace podlab {

namespace {

constexpr double kConditionLimit = 1e14;

InnerProduct gram_kind(ProjectionKind kind, InnerProduct basis_ip) {
  switch (kind) {
    case ProjectionKind::kPodH:
      return basis_ip;
    case ProjectionKind::kRitz:
    case ProjectionKind::kWOrthH01:
      return InnerProduct::kH01;
    case ProjectionKind::kWOrthL2:
      return InnerProduct::kL2;
  }
  return basis_ip;
}

}  // namespace

std::string_view to_string(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::kPodH:
      return "PodH";
    case ProjectionKind::kRitz:
      return "Ritz";
    case ProjectionKind::kWOrthL2:
      return "WOrthL2";
    case ProjectionKind::kWOrthH01:
      return "WOrthH01";
  }
  return "?";
}

ProjectionKind w_orth_kind(InnerProduct w) {
  return w == InnerProduct::kL2 ? ProjectionKind::kWOrthL2
                                : ProjectionKind::kWOrthH01;
}

Projector::Projector(const PodBasis& basis, int r, ProjectionKind kind,
                     const FemOperators& ops)
    : r_(r),
      kind_(kind),
      modes_(basis.modes.leftCols(std::max(0, std::min(r, basis.d())))),
      gram_op_(ops.gram(gram_kind(kind, basis.inner_product))) {
  basis.check_rank(r, 0);
  if (basis.modes.rows() != ops.dim()) {
    throw DimensionMismatch("Projector: basis does not match mesh");
  }
  if (kind == ProjectionKind::kPodH || r == 0) return;

  const Matrix reduced = modes_.transpose() * gram_op_.apply(modes_);
  llt_.compute(reduced);
  if (llt_.info() != Eigen::Success) {
    throw IllConditioned("reduced " + std::string(to_string(kind)) +
                         " Gram matrix is not positive definite at r = " +
                         std::to_string(r));
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced,
                                                   Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  cond_ = lo > 0.0 ? eig.eigenvalues().maxCoeff() / lo
                   : std::numeric_limits<double>::infinity();
  if (cond_ > kConditionLimit) {
    std::ostringstream msg;
    msg << "reduced " << to_string(kind) << " Gram matrix at r = " << r
        << " has condition number " << cond_;
    warn(msg.str());
  }
}

Matrix Projector::coefficients(const Matrix& u) const {
  if (u.rows() != modes_.rows()) {
    throw DimensionMismatch("Projector: input size does not match mesh");
  }
  if (r_ == 0) return Matrix::Zero(0, u.cols());
  Matrix rhs = modes_.transpose() * gram_op_.apply(u);
  if (kind_ == ProjectionKind::kPodH) return rhs;
  return llt_.solve(rhs);
}

Matrix Projector::apply(const Matrix& u) const {
  if (r_ == 0) return Matrix::Zero(u.rows(), u.cols());
  return modes_ * coefficients(u);
}

FemFunction Projector::apply(const FemFunction& u) const {
  return apply(Matrix(u)).col(0);
}

FemFunction ritz_project(const FemFunction& u, const PodBasis& basis, int r,
                         const FemOperators& ops) {
  basis.check_rank(r);
  return Projector(basis, r, ProjectionKind::kRitz, ops).apply(u);
}

FemFunction w_orth_project(const FemFunction& u, const PodBasis& basis, int r,
                           InnerProduct w, const FemOperators& ops) {
  basis.check_rank(r);
  return Projector(basis, r, w_orth_kind(w), ops).apply(u);
}

std::vector<DeflationNorms> ritz_deflation_norms(const PodBasis& basis, int r,
                                                 const FemOperators& ops) {
  const Projector ritz(basis, r, ProjectionKind::kRitz, ops);
  const int d = basis.d();
  std::vector<DeflationNorms> out;
  if (r == d) return out;
  const Matrix tail = basis.modes.rightCols(d - r);
  const Matrix defl = tail - ritz.apply(tail);
  const Vector l2 = squared_norms(defl, InnerProduct::kL2, ops);
  const Vector grad = squared_norms(defl, InnerProduct::kH01, ops);
  out.reserve(d - r);
  for (int i = 0; i < d - r; ++i) {
    out.push_back({r + i + 1, std::sqrt(l2[i]), std::sqrt(grad[i])});
  }
  return out;
}

double TailIdentity::relative_gap(double floor) const {
  return std::abs(lhs - rhs) / std::max(rhs, floor);
}

TailIdentity projection_error_tail_identity(const SnapshotCollection& collection,
                                            const PodBasis& basis, int r,
                                            ProjectionKind proj, InnerProduct w,
                                            const FemOperators& ops) {
  if (collection.weight_m != basis.weight_m) {
    throw DimensionMismatch(
        "projection_error_tail_identity: collection weight differs from the "
        "basis weight");
  }
  const Projector q(basis, r, proj, ops);
  TailIdentity out;
  const Matrix err = collection.members - q.apply(collection.members);
  out.lhs = squared_norms(err, w, ops).sum() / collection.weight_m;
  const int d = basis.d();
  if (r < d) {
    const Matrix tail = basis.modes.rightCols(d - r);
    const Vector defl = squared_norms(tail - q.apply(tail), w, ops);
    out.rhs = basis.eigenvalues.tail(d - r).dot(defl);
  }
  return out;
}

}  // namespace podlab
