#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace epictrl {

/// Uniform cell-centered grid on a rectangle [0,L_x] (x [0,L_y]).
///
/// Cells are numbered row-major: index = ix + nx * iy.
class Mesh {
 public:
  /// Throws ConfigError unless dimension is 1 or 2, every count is >= 1 and every length is > 0.
  static Mesh build(int dimension, std::span<const int> cells_per_axis,
                    std::span<const double> domain_lengths);

  int dimension() const { return dimension_; }
  int cells(int axis) const { return cells_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  double spacing(int axis) const { return lengths_[axis] / cells_[axis]; }
  std::size_t num_cells() const { return num_cells_; }
  double cell_volume() const { return cell_volume_; }
  /// |Omega|
  double measure() const;

  /// Cell-center coordinate along an axis.
  double center(std::size_t cell, int axis) const;

  friend bool operator==(const Mesh&, const Mesh&) = default;

 private:
  Mesh() = default;

  int dimension_ = 1;
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> lengths_{1.0, 1.0};
  std::size_t num_cells_ = 1;
  double cell_volume_ = 1.0;
};

/// One real value per mesh cell.
class Field {
 public:
  explicit Field(const Mesh& mesh, double value = 0.0)
      : mesh_(mesh), values_(mesh.num_cells(), value) {}
  Field(const Mesh& mesh, std::vector<double> values);

  const Mesh& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t c) const { return values_[c]; }
  double& operator[](std::size_t c) { return values_[c]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  Mesh mesh_;
  std::vector<double> values_;
};

/// Midpoint quadrature: cell_volume * sum(values).
double integrate(const Field& field);

/// L2(Omega) inner product by midpoint quadrature.
double inner(const Field& a, const Field& b);

/// L2(Omega) norm by midpoint quadrature.
double l2_norm(const Field& a);

/// Two-point-flux finite-volume discretization of v -> -div(kappa grad v) with
/// zero-flux boundaries.
///
/// Face conductivity is the arithmetic mean of the two adjacent cell values of
/// kappa divided by the squared spacing normal to the face. Boundary faces carry
/// no flux, so every row sums to zero and constants lie in the kernel.
class DiffusionOperator {
 public:
  const Mesh& mesh() const { return mesh_; }

  /// out = A v
  void apply(std::span<const double> v, std::span<double> out) const;
  Field apply(const Field& v) const;

  /// Diagonal entry of row c (sum of incident face conductivities).
  double diagonal(std::size_t c) const { return diag_[c]; }

  /// Conductivity of the face between cell c and its +x neighbour (1D/2D) or
  /// +y neighbour (2D). Only defined for interior faces.
  double face_x(std::size_t c) const { return face_x_[c]; }
  double face_y(std::size_t c) const { return face_y_[c]; }

  /// Max absolute row sum; an upper bound on the spectral norm.
  double norm_inf() const;

  /// Dense copy, row-major. Intended for small test instances only.
  std::vector<double> dense() const;

 private:
  friend DiffusionOperator assemble_diffusion(const Mesh&, const Field&, double, double);
  explicit DiffusionOperator(const Mesh& mesh) : mesh_(mesh) {}

  Mesh mesh_;
  // face_x_[c]: face between c and c+1 along x (0 on the last column).
  // face_y_[c]: face between c and c+nx along y (0 on the last row, unused in 1D).
  std::vector<double> face_x_;
  std::vector<double> face_y_;
  std::vector<double> diag_;
};

/// Throws ValidationError(KappaRange) if some kappa lies outside [kappa_lo, kappa_hi],
/// ValidationError(KappaBounds) if the bounds themselves are not 0 < lo <= hi.
DiffusionOperator assemble_diffusion(const Mesh& mesh, const Field& kappa, double kappa_lo,
                                     double kappa_hi);

enum class SolverKind { Tridiagonal, SparseLDLT };

std::string_view solver_kind_name(SolverKind kind);

/// Factorized (mass_scale I + diag(reaction) + A).
///
/// 1D meshes use a tridiagonal (banded) direct solve; 2D meshes use a sparse
/// LDL^T factorization with fill-reducing ordering. The matrix is a symmetric
/// nonsingular M-matrix whenever mass_scale > 0 and reaction >= 0.
/// The operator is referenced, not copied, and must outlive the solver.
class ImplicitSolver {
 public:
  ImplicitSolver(const DiffusionOperator& op, double mass_scale, std::span<const double> reaction);
  ImplicitSolver(const DiffusionOperator& op, double mass_scale, double reaction);
  ~ImplicitSolver();
  ImplicitSolver(ImplicitSolver&&) noexcept;
  ImplicitSolver& operator=(ImplicitSolver&&) noexcept;

  /// Re-factor with a new reaction diagonal, keeping the operator and mass scale.
  void refactor(std::span<const double> reaction);

  void solve(std::span<const double> rhs, std::span<double> out) const;
  Field solve(const Field& rhs) const;

  SolverKind kind() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves (mass_scale I + diag(reaction_diag) + A) v = rhs.
Field solve_implicit(const DiffusionOperator& op, double mass_scale, const Field& reaction_diag,
                     const Field& rhs);

}  // namespace epictrl
