#pragma once

#include <string_view>
#include <vector>

#include "podlab/pod.hpp"

namespace podlab {

enum class ProjectionKind {
  kPodH,     // sum_i (u, phi_i)_H phi_i
  kRitz,     // H01-seminorm (gradient) orthogonal projection
  kWOrthL2,  // L2-orthogonal projection onto X^r
  kWOrthH01, // H01-orthogonal projection onto X^r
};

std::string_view to_string(ProjectionKind kind);

/// W-orthogonal projection kind for a norm choice.
ProjectionKind w_orth_kind(InnerProduct w);

/// Projection onto the span of the first r modes, set up once and applied to
/// many vectors. The Gram-based kinds factor the r x r reduced Gram matrix
/// with Cholesky; a condition number above 1e14 triggers a warning.
/// r = 0 is accepted and yields the zero map.
class Projector {
 public:
  Projector(const PodBasis& basis, int r, ProjectionKind kind,
            const FemOperators& ops);

  [[nodiscard]] int r() const noexcept { return r_; }
  [[nodiscard]] ProjectionKind kind() const noexcept { return kind_; }
  /// Condition number of the reduced Gram system (1 for kPodH).
  [[nodiscard]] double condition_number() const noexcept { return cond_; }

  /// Coefficients in the mode basis, one column per input column.
  [[nodiscard]] Matrix coefficients(const Matrix& u) const;
  [[nodiscard]] Matrix apply(const Matrix& u) const;
  [[nodiscard]] FemFunction apply(const FemFunction& u) const;

 private:
  int r_;
  ProjectionKind kind_;
  Matrix modes_;
  SymTridiagonal gram_op_;
  Eigen::LLT<Matrix> llt_;
  double cond_ = 1.0;
};

FemFunction ritz_project(const FemFunction& u, const PodBasis& basis, int r,
                         const FemOperators& ops);

FemFunction w_orth_project(const FemFunction& u, const PodBasis& basis, int r,
                           InnerProduct w, const FemOperators& ops);

struct DeflationNorms {
  int mode;         // 1-based mode index i
  double l2;        // ||phi_i - R_r phi_i||_{L2}
  double gradient;  // ||(phi_i - R_r phi_i)_x||_{L2}
};

/// Deflation norms of the discarded modes i = r+1..d under the Ritz
/// projection onto X^r. Valid for 0 <= r <= d (r = 0 leaves modes intact).
std::vector<DeflationNorms> ritz_deflation_norms(const PodBasis& basis, int r,
                                                 const FemOperators& ops);

struct TailIdentity {
  double lhs = 0.0;  // averaged projection error of the collection
  double rhs = 0.0;  // eigenvalue-weighted deflation of the discarded modes

  /// |lhs - rhs| / max(rhs, floor); the floor absorbs rounding when both
  /// sides vanish.
  [[nodiscard]] double relative_gap(double floor) const;
};

/// Averaged projection error of the collection against
/// sum_{i>r} lambda_i ||phi_i - Q phi_i||_W^2 for projection Q onto X^r.
/// r = 0 is the zero projection.
TailIdentity projection_error_tail_identity(const SnapshotCollection& collection,
                                            const PodBasis& basis, int r,
                                            ProjectionKind proj, InnerProduct w,
                                            const FemOperators& ops);

}  // namespace podlab
