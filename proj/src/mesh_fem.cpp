#include "podlab/mesh_fem.hpp"

#include <cmath>
#include <string>

#include "podlab/error.hpp"

namespace podlab {

std::string_view to_string(InnerProduct kind) {
  return kind == InnerProduct::kL2 ? "L2" : "H01";
}

InnerProduct parse_inner_product(std::string_view name) {
  if (name == "L2") return InnerProduct::kL2;
  if (name == "H01") return InnerProduct::kH01;
  throw InvalidArgument("unknown inner product '" + std::string(name) +
                        "' (expected L2 or H01)");
}

Mesh1D::Mesh1D(int n_cells) : n_cells_(n_cells), h_(0.0) {
  if (n_cells < 2) {
    throw InvalidArgument("mesh needs at least 2 cells, got " +
                          std::to_string(n_cells));
  }
  h_ = 1.0 / n_cells;
}

Vector Mesh1D::interior_nodes() const {
  Vector x(n_interior());
  for (int j = 1; j < n_cells_; ++j) x[j - 1] = node(j);
  return x;
}

Mesh1D build_mesh(int n_cells) { return Mesh1D(n_cells); }

// --- SymTridiagonal -------------------------------------------------------

Vector SymTridiagonal::apply(const Vector& u) const {
  const int n = size();
  Vector out = diag.cwiseProduct(u);
  if (n > 1) {
    out.head(n - 1) += off.cwiseProduct(u.tail(n - 1));
    out.tail(n - 1) += off.cwiseProduct(u.head(n - 1));
  }
  return out;
}

Matrix SymTridiagonal::apply(const Matrix& u) const {
  const int n = size();
  Matrix out = diag.asDiagonal() * u;
  if (n > 1) {
    out.topRows(n - 1) += off.asDiagonal() * u.bottomRows(n - 1);
    out.bottomRows(n - 1) += off.asDiagonal() * u.topRows(n - 1);
  }
  return out;
}

double SymTridiagonal::bilinear(const Vector& u, const Vector& v) const {
  return u.dot(apply(v));
}

Matrix SymTridiagonal::dense() const {
  const int n = size();
  Matrix a = Matrix::Zero(n, n);
  a.diagonal() = diag;
  if (n > 1) {
    a.diagonal(1) = off;
    a.diagonal(-1) = off;
  }
  return a;
}

// --- Tridiagonal ----------------------------------------------------------

void Tridiagonal::add_scaled(const SymTridiagonal& a, double scale) {
  diag += scale * a.diag;
  lower += scale * a.off;
  upper += scale * a.off;
}

void Tridiagonal::add_scaled(const Tridiagonal& a, double scale) {
  diag += scale * a.diag;
  lower += scale * a.lower;
  upper += scale * a.upper;
}

Vector Tridiagonal::apply(const Vector& u) const {
  const int n = size();
  Vector out = diag.cwiseProduct(u);
  if (n > 1) {
    out.head(n - 1) += upper.cwiseProduct(u.tail(n - 1));
    out.tail(n - 1) += lower.cwiseProduct(u.head(n - 1));
  }
  return out;
}

Vector Tridiagonal::solve(const Vector& rhs) const {
  const int n = size();
  Vector c(n);
  Vector x(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw IllConditioned("zero pivot in tridiagonal solve");
  c[0] = n > 1 ? upper[0] / pivot : 0.0;
  x[0] = rhs[0] / pivot;
  for (int i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i - 1] * c[i - 1];
    if (pivot == 0.0) throw IllConditioned("zero pivot in tridiagonal solve");
    c[i] = i < n - 1 ? upper[i] / pivot : 0.0;
    x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
  }
  for (int i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

// --- FemOperators ---------------------------------------------------------

FemOperators::FemOperators(const Mesh1D& mesh) : mesh_(mesh) {
  const int n = mesh.n_interior();
  const double h = mesh.h();
  mass_.diag = Vector::Constant(n, 4.0 * h / 6.0);
  mass_.off = Vector::Constant(n - 1, h / 6.0);
  stiffness_.diag = Vector::Constant(n, 2.0 / h);
  stiffness_.off = Vector::Constant(n - 1, -1.0 / h);
}

FemOperators assemble_operators(const Mesh1D& mesh) {
  return FemOperators(mesh);
}

double inner_product(const FemFunction& u, const FemFunction& v,
                     InnerProduct kind, const FemOperators& ops) {
  if (u.size() != ops.dim() || v.size() != ops.dim()) {
    throw DimensionMismatch("inner_product: vectors of size " +
                            std::to_string(u.size()) + " and " +
                            std::to_string(v.size()) + " on a mesh with " +
                            std::to_string(ops.dim()) + " interior nodes");
  }
  return ops.gram(kind).bilinear(u, v);
}

Vector squared_norms(const Matrix& u, InnerProduct kind,
                     const FemOperators& ops) {
  if (u.rows() != ops.dim()) {
    throw DimensionMismatch("squared_norms: row count does not match mesh");
  }
  return u.cwiseProduct(ops.gram(kind).apply(u)).colwise().sum().transpose();
}

// --- Burgers nonlinearity -------------------------------------------------

namespace {

// Nodal value at global node g (boundary nodes are zero).
inline double nodal(const FemFunction& u, int g, int n_cells) {
  return (g == 0 || g == n_cells) ? 0.0 : u[g - 1];
}

}  // namespace

Vector nonlinear_form(const FemFunction& u, const Mesh1D& mesh) {
  const int n = mesh.n_cells();
  const double h = mesh.h();
  if (u.size() != mesh.n_interior()) {
    throw DimensionMismatch("nonlinear_form: wrong coefficient count");
  }
  Vector out = Vector::Zero(mesh.n_interior());
  for (int c = 0; c < n; ++c) {
    const double a = nodal(u, c, n);
    const double b = nodal(u, c + 1, n);
    const double ux = (b - a) / h;
    double left = 0.0;
    double right = 0.0;
    for (int q = 0; q < 2; ++q) {
      const double s = GaussRule2::kPoints[q];
      const double w = GaussRule2::kWeights[q] * h;
      const double uq = a * (1.0 - s) + b * s;
      left += w * uq * ux * (1.0 - s);
      right += w * uq * ux * s;
    }
    if (c > 0) out[c - 1] += left;
    if (c + 1 < n) out[c] += right;
  }
  return out;
}

Tridiagonal nonlinear_jacobian(const FemFunction& u, const Mesh1D& mesh) {
  const int n = mesh.n_cells();
  const double h = mesh.h();
  if (u.size() != mesh.n_interior()) {
    throw DimensionMismatch("nonlinear_jacobian: wrong coefficient count");
  }
  Tridiagonal jac(mesh.n_interior());
  for (int c = 0; c < n; ++c) {
    const double a = nodal(u, c, n);
    const double b = nodal(u, c + 1, n);
    const double ux = (b - a) / h;
    // local[test][trial], test/trial 0 = left node, 1 = right node
    double local[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int q = 0; q < 2; ++q) {
      const double s = GaussRule2::kPoints[q];
      const double w = GaussRule2::kWeights[q] * h;
      const double uq = a * (1.0 - s) + b * s;
      const double phi[2] = {1.0 - s, s};
      const double dphi[2] = {-1.0 / h, 1.0 / h};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          local[i][j] += w * (phi[j] * ux + uq * dphi[j]) * phi[i];
        }
      }
    }
    const int gl = c - 1;  // interior index of the left node
    const int gr = c;      // interior index of the right node
    const bool has_left = c > 0;
    const bool has_right = c + 1 < n;
    if (has_left) jac.diag[gl] += local[0][0];
    if (has_right) jac.diag[gr] += local[1][1];
    if (has_left && has_right) {
      jac.upper[gl] += local[0][1];
      jac.lower[gl] += local[1][0];
    }
  }
  return jac;
}

}  // namespace podlab
