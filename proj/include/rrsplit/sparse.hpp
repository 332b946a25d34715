#pragma once

// Compressed sparse row storage and the two linear solve paths used by the
// subdomain steppers (SPD) and the monolithic saddle oracle (general square).

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rrsplit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Immutable CSR matrix. Symmetric operators are stored with both triangles.
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_(1, 0) {}

  CsrMatrix(Index n_rows, Index n_cols, std::vector<Index> row_offsets,
            std::vector<Index> col_indices, std::vector<double> values)
      : n_rows_(n_rows),
        n_cols_(n_cols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    check_structure();
  }

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  Index nonzeros() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  /// Stored value at (i, j), zero when the entry is not in the pattern.
  double at(Index i, Index j) const {
    if (i < 0 || i >= n_rows_ || j < 0 || j >= n_cols_) {
      throw std::out_of_range("CsrMatrix::at index out of range");
    }
    const auto first = col_indices_.begin() + row_offsets_[i];
    const auto last = col_indices_.begin() + row_offsets_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_rows_, n_cols_);
    for (Index i = 0; i < n_rows_; ++i) {
      for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
        d(i, col_indices_[p]) += values_[p];
      }
    }
    return d;
  }

  /// Copy into Eigen column-major storage for the factorization backends.
  Eigen::SparseMatrix<double> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (Index i = 0; i < n_rows_; ++i) {
      for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
        t.emplace_back(static_cast<int>(i), static_cast<int>(col_indices_[p]), values_[p]);
      }
    }
    Eigen::SparseMatrix<double> m(n_rows_, n_cols_);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  /// Appends scale * this, shifted by (row_offset, col_offset), to a triplet list.
  void append_to(std::vector<Triplet>& out, double scale = 1.0, Index row_offset = 0,
                 Index col_offset = 0) const {
    for (Index i = 0; i < n_rows_; ++i) {
      for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
        out.push_back({i + row_offset, col_indices_[p] + col_offset, scale * values_[p]});
      }
    }
  }

  /// Largest |A(i,j) - A(j,i)| over the stored pattern.
  double symmetry_defect() const {
    double worst = 0.0;
    for (Index i = 0; i < n_rows_; ++i) {
      for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
        const Index j = col_indices_[p];
        if (j >= n_rows_) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(values_[p] - at(j, i)));
      }
    }
    return worst;
  }

 private:
  void check_structure() const {
    if (n_rows_ < 0 || n_cols_ < 0) throw std::invalid_argument("negative matrix dimension");
    if (static_cast<Index>(row_offsets_.size()) != n_rows_ + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != static_cast<Index>(values_.size()) ||
        col_indices_.size() != values_.size()) {
      throw std::invalid_argument("inconsistent CSR arrays");
    }
    for (Index i = 0; i < n_rows_; ++i) {
      if (row_offsets_[i + 1] < row_offsets_[i]) {
        throw std::invalid_argument("row offsets must be nondecreasing");
      }
      for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
        const Index j = col_indices_[p];
        if (j < 0 || j >= n_cols_) throw std::out_of_range("column index out of range");
        if (p > row_offsets_[i] && col_indices_[p - 1] >= j) {
          throw std::invalid_argument("column indices must be strictly increasing per row");
        }
      }
    }
  }

  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// Builds a CSR matrix; duplicate (row, col) entries are summed.
inline CsrMatrix from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> entries) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= n_rows || e.col < 0 || e.col >= n_cols) {
      throw std::out_of_range("triplet (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                              ") outside " + std::to_string(n_rows) + "x" +
                              std::to_string(n_cols));
    }
  }
  // stable sort keeps the summation order deterministic for equal keys
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Index> offsets(static_cast<std::size_t>(n_rows) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      vals.back() += e.value;
      continue;
    }
    cols.push_back(e.col);
    vals.push_back(e.value);
    ++offsets[static_cast<std::size_t>(e.row) + 1];
  }
  for (Index i = 0; i < n_rows; ++i) offsets[i + 1] += offsets[i];
  return {n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals)};
}

inline Vector spmv(const CsrMatrix& a, const Vector& x) {
  if (x.size() != a.cols()) {
    throw std::invalid_argument("spmv: vector length " + std::to_string(x.size()) +
                                " does not match " + std::to_string(a.cols()) + " columns");
  }
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  Vector y(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Index p = offsets[i]; p < offsets[i + 1]; ++p) s += vals[p] * x[cols[p]];
    y[i] = s;
  }
  return y;
}

struct SolveReport {
  Index iterations = 0;
  double residual_norm = 0.0;  // ||Ax - b|| / ||b||
  bool converged = false;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

inline constexpr double default_solve_tolerance = 1e-12;

namespace detail {

inline double relative_residual(const CsrMatrix& a, const Vector& x, const Vector& b) {
  const double bn = b.norm();
  const double rn = (spmv(a, x) - b).norm();
  return bn > 0.0 ? rn / bn : rn;
}

inline void require_square(const CsrMatrix& a, const Vector& b, const char* who) {
  if (a.rows() != a.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
  if (b.size() != a.rows()) throw std::invalid_argument(std::string(who) + ": rhs size mismatch");
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients. Non-convergence is reported,
/// not thrown; the best iterate is returned.
inline SolveResult solve_spd(const CsrMatrix& a, const Vector& b,
                             double tol = default_solve_tolerance, Index max_iterations = -1) {
  detail::require_square(a, b, "solve_spd");
  if (a.symmetry_defect() > 1e-12) throw std::invalid_argument("solve_spd: matrix not symmetric");

  const Index n = a.rows();
  if (max_iterations < 0) max_iterations = 10 * n + 100;
  SolveResult out{Vector::Zero(n), {}};
  const double bn = b.norm();
  if (bn == 0.0) {
    out.report.converged = true;
    return out;
  }

  Vector inv_diag(n);
  for (Index i = 0; i < n; ++i) {
    const double d = a.at(i, i);
    if (!(d > 0.0)) throw std::invalid_argument("solve_spd: nonpositive diagonal entry");
    inv_diag[i] = 1.0 / d;
  }

  Vector& x = out.x;
  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  Vector best = x;
  double best_res = 1.0;

  for (Index it = 1; it <= max_iterations; ++it) {
    const Vector ap = spmv(a, p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double step = rz / pap;
    x += step * p;
    r -= step * ap;
    const double res = r.norm() / bn;
    out.report.iterations = it;
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= tol) {
      // recursive residual can drift; confirm with the true one
      const double true_res = detail::relative_residual(a, x, b);
      if (true_res <= tol) {
        out.report = {it, true_res, true};
        return out;
      }
      r = b - spmv(a, x);
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  x = best;
  out.report.residual_norm = detail::relative_residual(a, x, b);
  out.report.converged = out.report.residual_norm <= tol;
  return out;
}

/// Sparse LU with a few steps of iterative refinement; valid for indefinite
/// (saddle-point) systems. Singular matrices yield converged = false.
inline SolveResult solve_general(const CsrMatrix& a, const Vector& b,
                                 double tol = default_solve_tolerance) {
  detail::require_square(a, b, "solve_general");
  const Index n = a.rows();
  SolveResult out{Vector::Zero(n), {}};
  if (n == 0) {
    out.report.converged = true;
    return out;
  }
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  const auto m = a.to_eigen();
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) {
    out.report.residual_norm = b.norm() > 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.x = lu.solve(b);
  out.report.iterations = 1;
  out.report.residual_norm = detail::relative_residual(a, out.x, b);
  for (int refine = 0; refine < 3 && out.report.residual_norm > tol; ++refine) {
    out.x += lu.solve(Vector(b - spmv(a, out.x)));
    ++out.report.iterations;
    out.report.residual_norm = detail::relative_residual(a, out.x, b);
  }
  out.report.converged = std::isfinite(out.report.residual_norm) && out.report.residual_norm <= tol;
  return out;
}

/// Thrown when a stepper's linear solve misses its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, SolveReport report)
      : std::runtime_error(what + " (residual " + std::to_string(report.residual_norm) + ")"),
        report_(report) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// A matrix factored once and solved against many right-hand sides.
/// `Spd` selects an LDL^T factorization, otherwise sparse LU.
class Factorization {
 public:
  enum class Kind { spd, general };

  Factorization(CsrMatrix a, Kind kind, double tol = default_solve_tolerance)
      : a_(std::move(a)), kind_(kind), tol_(tol) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("Factorization: matrix not square");
    const auto m = a_.to_eigen();
    bool ok = false;
    if (kind_ == Kind::spd) {
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(m);
      ok = ldlt_->info() == Eigen::Success && (ldlt_->vectorD().array() > 0.0).all();
    } else {
      lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      lu_->analyzePattern(m);
      lu_->factorize(m);
      ok = lu_->info() == Eigen::Success;
    }
    if (!ok) throw SolverFailure("factorization failed (singular or indefinite matrix)", {});
  }

  const CsrMatrix& matrix() const { return a_; }

  SolveResult solve(const Vector& b) const {
    if (b.size() != a_.rows()) throw std::invalid_argument("Factorization::solve: size mismatch");
    SolveResult out{raw_solve(b), {1, 0.0, false}};
    out.report.residual_norm = detail::relative_residual(a_, out.x, b);
    for (int refine = 0; refine < 3 && out.report.residual_norm > tol_; ++refine) {
      out.x += raw_solve(Vector(b - spmv(a_, out.x)));
      ++out.report.iterations;
      out.report.residual_norm = detail::relative_residual(a_, out.x, b);
    }
    out.report.converged = out.report.residual_norm <= tol_;
    return out;
  }

  /// Solve that throws SolverFailure on a missed tolerance.
  Vector solve_or_throw(const Vector& b, const char* who) const {
    auto r = solve(b);
    if (!r.report.converged) throw SolverFailure(who, r.report);
    return std::move(r.x);
  }

 private:
  Vector raw_solve(const Vector& b) const {
    if (kind_ == Kind::spd) return ldlt_->solve(b);
    return lu_->solve(b);
  }

  CsrMatrix a_;
  Kind kind_;
  double tol_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

}  // namespace rrsplit
