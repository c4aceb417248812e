#include "epictrl/mesh.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "epictrl/errors.hpp"

namespace epictrl {

Mesh Mesh::build(int dimension, std::span<const int> cells_per_axis,
                 std::span<const double> domain_lengths) {
  if (dimension != 1 && dimension != 2) {
    throw ConfigError("mesh dimension must be 1 or 2, got " + std::to_string(dimension));
  }
  const auto d = static_cast<std::size_t>(dimension);
  if (cells_per_axis.size() != d || domain_lengths.size() != d) {
    throw ConfigError("mesh needs one cell count and one length per axis");
  }
  Mesh m;
  m.dimension_ = dimension;
  m.num_cells_ = 1;
  double measure = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    if (cells_per_axis[a] < 1) throw ConfigError("cell counts must be >= 1");
    if (!(domain_lengths[a] > 0.0) || !std::isfinite(domain_lengths[a])) {
      throw ConfigError("domain lengths must be positive and finite");
    }
    m.cells_[a] = cells_per_axis[a];
    m.lengths_[a] = domain_lengths[a];
    m.num_cells_ *= static_cast<std::size_t>(cells_per_axis[a]);
    measure *= domain_lengths[a];
  }
  m.cell_volume_ = measure / static_cast<double>(m.num_cells_);
  return m;
}

double Mesh::measure() const {
  return dimension_ == 1 ? lengths_[0] : lengths_[0] * lengths_[1];
}

double Mesh::center(std::size_t cell, int axis) const {
  const auto nx = static_cast<std::size_t>(cells_[0]);
  const std::size_t idx = axis == 0 ? cell % nx : cell / nx;
  return (static_cast<double>(idx) + 0.5) * spacing(axis);
}

Field::Field(const Mesh& mesh, std::vector<double> values) : mesh_(mesh), values_(std::move(values)) {
  if (values_.size() != mesh_.num_cells()) {
    throw ConfigError("field has " + std::to_string(values_.size()) + " values, mesh has " +
                      std::to_string(mesh_.num_cells()) + " cells");
  }
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double integrate(const Field& field) {
  const auto v = field.values();
  return field.mesh().cell_volume() * std::accumulate(v.begin(), v.end(), 0.0);
}

double inner(const Field& a, const Field& b) {
  const auto av = a.values();
  const auto bv = b.values();
  return a.mesh().cell_volume() * std::inner_product(av.begin(), av.end(), bv.begin(), 0.0);
}

double l2_norm(const Field& a) { return std::sqrt(inner(a, a)); }

// ---------------------------------------------------------------------------
// Diffusion operator

DiffusionOperator assemble_diffusion(const Mesh& mesh, const Field& kappa, double kappa_lo,
                                     double kappa_hi) {
  if (!(kappa_lo > 0.0) || !(kappa_lo <= kappa_hi) || !std::isfinite(kappa_hi)) {
    throw ValidationError(Assumption::KappaBounds);
  }
  if (kappa.size() != mesh.num_cells()) throw ConfigError("kappa field does not match mesh");
  for (std::size_t c = 0; c < kappa.size(); ++c) {
    if (!(kappa[c] >= kappa_lo && kappa[c] <= kappa_hi)) {
      std::ostringstream os;
      os << "kappa=" << kappa[c] << " at cell " << c << " outside [" << kappa_lo << ", "
         << kappa_hi << "]";
      throw ValidationError(Assumption::KappaRange, os.str());
    }
  }

  DiffusionOperator op(mesh);
  const std::size_t n = mesh.num_cells();
  const auto nx = static_cast<std::size_t>(mesh.cells(0));
  const auto ny = mesh.dimension() == 2 ? static_cast<std::size_t>(mesh.cells(1)) : 1U;
  op.face_x_.assign(n, 0.0);
  op.face_y_.assign(n, 0.0);
  op.diag_.assign(n, 0.0);

  const double hx2 = mesh.spacing(0) * mesh.spacing(0);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
      const std::size_t c = ix + nx * iy;
      const double k = 0.5 * (kappa[c] + kappa[c + 1]) / hx2;
      op.face_x_[c] = k;
      op.diag_[c] += k;
      op.diag_[c + 1] += k;
    }
  }
  if (mesh.dimension() == 2) {
    const double hy2 = mesh.spacing(1) * mesh.spacing(1);
    for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::size_t c = ix + nx * iy;
        const double k = 0.5 * (kappa[c] + kappa[c + nx]) / hy2;
        op.face_y_[c] = k;
        op.diag_[c] += k;
        op.diag_[c + nx] += k;
      }
    }
  }
  return op;
}

void DiffusionOperator::apply(std::span<const double> v, std::span<double> out) const {
  const std::size_t n = mesh_.num_cells();
  const auto nx = static_cast<std::size_t>(mesh_.cells(0));
  for (std::size_t c = 0; c < n; ++c) out[c] = 0.0;
  // Accumulate face fluxes so each face contributes antisymmetrically.
  for (std::size_t c = 0; c < n; ++c) {
    if (face_x_[c] != 0.0) {
      const double flux = face_x_[c] * (v[c] - v[c + 1]);
      out[c] += flux;
      out[c + 1] -= flux;
    }
    if (face_y_[c] != 0.0) {
      const double flux = face_y_[c] * (v[c] - v[c + nx]);
      out[c] += flux;
      out[c + nx] -= flux;
    }
  }
}

Field DiffusionOperator::apply(const Field& v) const {
  Field out(mesh_);
  apply(v.values(), out.values());
  return out;
}

double DiffusionOperator::norm_inf() const {
  // Row sum of |a_ij| is twice the diagonal for a zero-row-sum M-matrix.
  return 2.0 * *std::max_element(diag_.begin(), diag_.end());
}

std::vector<double> DiffusionOperator::dense() const {
  const std::size_t n = mesh_.num_cells();
  const auto nx = static_cast<std::size_t>(mesh_.cells(0));
  std::vector<double> a(n * n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    a[c * n + c] = diag_[c];
    if (face_x_[c] != 0.0) {
      a[c * n + c + 1] = -face_x_[c];
      a[(c + 1) * n + c] = -face_x_[c];
    }
    if (face_y_[c] != 0.0) {
      a[c * n + c + nx] = -face_y_[c];
      a[(c + nx) * n + c] = -face_y_[c];
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// Implicit solver

std::string_view solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Tridiagonal:
      return "banded-direct (tridiagonal)";
    case SolverKind::SparseLDLT:
      return "sparse-LDLT (AMD ordering)";
  }
  return "unknown";
}

struct ImplicitSolver::Impl {
  const DiffusionOperator* op = nullptr;
  double mass_scale = 1.0;
  SolverKind kind = SolverKind::Tridiagonal;

  // Tridiagonal: LU sweep coefficients. lower_[c] couples c to c-1.
  std::vector<double> upper;   // modified super-diagonal c'
  std::vector<double> pivot;   // 1 / modified diagonal
  std::vector<double> lower;   // sub-diagonal

  Eigen::SparseMatrix<double> matrix;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  bool analyzed = false;

  void factor(std::span<const double> reaction) {
    const std::size_t n = op->mesh().num_cells();
    if (reaction.size() != n) throw ConfigError("reaction diagonal does not match mesh");
    for (double r : reaction) {
      if (!(r >= 0.0) || !std::isfinite(r)) {
        throw NumericalError("reaction diagonal must be finite and nonnegative");
      }
    }
    if (kind == SolverKind::Tridiagonal) {
      factor_tridiagonal(reaction);
    } else {
      factor_sparse(reaction);
    }
  }

  void factor_tridiagonal(std::span<const double> reaction) {
    const std::size_t n = op->mesh().num_cells();
    upper.assign(n, 0.0);
    pivot.assign(n, 0.0);
    lower.assign(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      const double sub = c > 0 ? -op->face_x(c - 1) : 0.0;
      const double sup = c + 1 < n ? -op->face_x(c) : 0.0;
      const double d = mass_scale + reaction[c] + op->diagonal(c) - sub * (c > 0 ? upper[c - 1] : 0.0);
      if (!(d > 0.0)) throw NumericalError("tridiagonal pivot is not positive", d);
      pivot[c] = 1.0 / d;
      upper[c] = sup * pivot[c];
      lower[c] = sub;
    }
  }

  void factor_sparse(std::span<const double> reaction) {
    const std::size_t n = op->mesh().num_cells();
    const auto nx = static_cast<std::size_t>(op->mesh().cells(0));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    for (std::size_t c = 0; c < n; ++c) {
      const auto ic = static_cast<int>(c);
      trip.emplace_back(ic, ic, mass_scale + reaction[c] + op->diagonal(c));
      if (op->face_x(c) != 0.0) trip.emplace_back(ic + 1, ic, -op->face_x(c));
      if (op->face_y(c) != 0.0) trip.emplace_back(static_cast<int>(c + nx), ic, -op->face_y(c));
    }
    matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    matrix.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      ldlt.analyzePattern(matrix);
      analyzed = true;
    }
    ldlt.factorize(matrix);
    if (ldlt.info() != Eigen::Success) throw NumericalError("sparse LDLT factorization failed");
  }

  void solve(std::span<const double> rhs, std::span<double> out) const {
    const std::size_t n = op->mesh().num_cells();
    if (rhs.size() != n || out.size() != n) throw ConfigError("rhs does not match mesh");
    if (kind == SolverKind::Tridiagonal) {
      // Forward sweep then back substitution. With an M-matrix every
      // intermediate is a sum of nonnegative terms for nonnegative rhs.
      double prev = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        prev = (rhs[c] - lower[c] * prev) * pivot[c];
        out[c] = prev;
      }
      for (std::size_t c = n - 1; c-- > 0;) out[c] -= upper[c] * out[c + 1];
    } else {
      Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
      Eigen::Map<Eigen::VectorXd> x(out.data(), static_cast<Eigen::Index>(n));
      x = ldlt.solve(b);
      if (ldlt.info() != Eigen::Success) {
        throw NumericalError("sparse LDLT solve failed", (matrix * x - b).norm());
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(out[c])) throw NumericalError("implicit solve produced a non-finite value");
    }
  }
};

ImplicitSolver::ImplicitSolver(const DiffusionOperator& op, double mass_scale,
                               std::span<const double> reaction)
    : impl_(std::make_unique<Impl>()) {
  if (!(mass_scale > 0.0)) throw ConfigError("mass scale must be positive");
  impl_->op = &op;
  impl_->mass_scale = mass_scale;
  impl_->kind = op.mesh().dimension() == 1 ? SolverKind::Tridiagonal : SolverKind::SparseLDLT;
  impl_->factor(reaction);
}

ImplicitSolver::ImplicitSolver(const DiffusionOperator& op, double mass_scale, double reaction)
    : ImplicitSolver(op, mass_scale, std::vector<double>(op.mesh().num_cells(), reaction)) {}

ImplicitSolver::~ImplicitSolver() = default;
ImplicitSolver::ImplicitSolver(ImplicitSolver&&) noexcept = default;
ImplicitSolver& ImplicitSolver::operator=(ImplicitSolver&&) noexcept = default;

void ImplicitSolver::refactor(std::span<const double> reaction) { impl_->factor(reaction); }

void ImplicitSolver::solve(std::span<const double> rhs, std::span<double> out) const {
  impl_->solve(rhs, out);
}

Field ImplicitSolver::solve(const Field& rhs) const {
  Field out(rhs.mesh());
  impl_->solve(rhs.values(), out.values());
  return out;
}

SolverKind ImplicitSolver::kind() const { return impl_->kind; }

Field solve_implicit(const DiffusionOperator& op, double mass_scale, const Field& reaction_diag,
                     const Field& rhs) {
  const ImplicitSolver solver(op, mass_scale, reaction_diag.values());
  return solver.solve(rhs);
}

}  // namespace epictrl
