#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace podlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coefficients of a P1 function at the interior nodes of a uniform mesh.
/// Boundary values are identically zero and never stored.
using FemFunction = Vector;

enum class InnerProduct { kL2, kH01 };

std::string_view to_string(InnerProduct kind);
InnerProduct parse_inner_product(std::string_view name);

/// Uniform mesh of (0, 1) with n_cells cells.
class Mesh1D {
 public:
  explicit Mesh1D(int n_cells);

  [[nodiscard]] int n_cells() const noexcept { return n_cells_; }
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] int n_interior() const noexcept { return n_cells_ - 1; }
  /// Coordinate of global node j, 0 <= j <= n_cells.
  [[nodiscard]] double node(int j) const noexcept {
    return j == n_cells_ ? 1.0 : j * h_;
  }
  [[nodiscard]] Vector interior_nodes() const;

  friend bool operator==(const Mesh1D&, const Mesh1D&) = default;

 private:
  int n_cells_;
  double h_;
};

Mesh1D build_mesh(int n_cells);

/// Symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal.
struct SymTridiagonal {
  Vector diag;
  Vector off;  // size diag.size() - 1

  [[nodiscard]] int size() const noexcept {
    return static_cast<int>(diag.size());
  }
  [[nodiscard]] Vector apply(const Vector& u) const;
  /// Column-wise product for a block of vectors.
  [[nodiscard]] Matrix apply(const Matrix& u) const;
  [[nodiscard]] double bilinear(const Vector& u, const Vector& v) const;
  [[nodiscard]] Matrix dense() const;
};

/// General tridiagonal matrix; solved with the Thomas algorithm.
struct Tridiagonal {
  Vector lower;  // sub-diagonal, size n - 1
  Vector diag;
  Vector upper;  // super-diagonal, size n - 1

  explicit Tridiagonal(int n = 0)
      : lower(Vector::Zero(n > 0 ? n - 1 : 0)),
        diag(Vector::Zero(n)),
        upper(Vector::Zero(n > 0 ? n - 1 : 0)) {}

  [[nodiscard]] int size() const noexcept {
    return static_cast<int>(diag.size());
  }
  void add_scaled(const SymTridiagonal& a, double scale);
  void add_scaled(const Tridiagonal& a, double scale);
  [[nodiscard]] Vector apply(const Vector& u) const;
  /// Throws IllConditioned on a vanishing pivot.
  [[nodiscard]] Vector solve(const Vector& rhs) const;
};

/// Exact P1 mass and stiffness matrices for homogeneous Dirichlet data.
class FemOperators {
 public:
  explicit FemOperators(const Mesh1D& mesh);

  [[nodiscard]] const Mesh1D& mesh() const noexcept { return mesh_; }
  [[nodiscard]] int dim() const noexcept { return mesh_.n_interior(); }
  [[nodiscard]] const SymTridiagonal& mass() const noexcept { return mass_; }
  [[nodiscard]] const SymTridiagonal& stiffness() const noexcept {
    return stiffness_;
  }
  /// Gram matrix of the requested inner product.
  [[nodiscard]] const SymTridiagonal& gram(InnerProduct kind) const noexcept {
    return kind == InnerProduct::kL2 ? mass_ : stiffness_;
  }

 private:
  Mesh1D mesh_;
  SymTridiagonal mass_;
  SymTridiagonal stiffness_;
};

FemOperators assemble_operators(const Mesh1D& mesh);

double inner_product(const FemFunction& u, const FemFunction& v,
                     InnerProduct kind, const FemOperators& ops);

/// Squared norm in the given inner product of each column of `u`.
Vector squared_norms(const Matrix& u, InnerProduct kind,
                     const FemOperators& ops);

/// Two-point Gauss rule on the reference cell [0, 1].
struct GaussRule2 {
  static constexpr double kPoints[2] = {0.21132486540518711775,
                                        0.78867513459481288225};
  static constexpr double kWeights[2] = {0.5, 0.5};
};

/// Load vector N(u)_i = (u u_x, phi_i), integrated exactly.
Vector nonlinear_form(const FemFunction& u, const Mesh1D& mesh);

/// Jacobian dN/du of nonlinear_form, tridiagonal.
Tridiagonal nonlinear_jacobian(const FemFunction& u, const Mesh1D& mesh);

}  // namespace podlab
