#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qrm {

using Complex = std::complex<double>;

namespace linalg {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Real sparse matrix in compressed row storage.
///
/// Columns within a row are sorted and unique, and no stored value is an
/// exact zero. Every constructor enforces this.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values);

  /// Duplicates are summed; entries that sum to exactly zero are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// Entry lookup by binary search; zero when not stored.
  double at(std::size_t row, std::size_t col) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<Complex> multiply(std::span<const Complex> x) const;

  SparseMatrix transpose() const;
  bool is_symmetric(double rel_tol = 0.0) const;
  double max_abs() const;

  /// Rows/columns picked by index lists (A[rows, cols]).
  SparseMatrix submatrix(std::span<const std::size_t> rows,
                         std::span<const std::size_t> cols) const;

  std::vector<Triplet> triplets() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// alpha*A + beta*B.
SparseMatrix combine(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b);

/// Re(x^H A x) for real A.
double quadratic_form(const SparseMatrix& a, std::span<const Complex> x);
double quadratic_form(const SparseMatrix& a, std::span<const double> x);

/// Row-major dense square-or-rectangular matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_sparse(const SparseMatrix& a);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline constexpr std::size_t kDenseSolveLimit = 2000;

/// Partial-pivot LU with two steps of iterative refinement. Throws NumericalError when a pivot falls below
/// 1e-14 * max|A|, InvalidArgument on shape problems or n > kDenseSolveLimit.
std::vector<double> dense_solve(const DenseMatrix& a, std::span<const double> b);

struct SolveReport {
  double residual_initial = 0.0;  ///< ||b - A x0|| / ||b|| before refinement
  double residual_final = 0.0;    ///< after one refinement step
};

/// Sparse LU with a fill-reducing column ordering and threshold partial
/// pivoting. One factorization serves any number of right-hand sides.
class SparseLu {
 public:
  static constexpr double kPivotThreshold = 0.1;

  SparseLu();
  explicit SparseLu(const SparseMatrix& a);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;
  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;

  void factor(const SparseMatrix& a);
  bool factored() const;
  std::size_t size() const;

  /// Solve with one step of iterative refinement.
  std::vector<double> solve(std::span<const double> b, SolveReport* report = nullptr) const;
  /// Real and imaginary parts are solved as two right-hand sides.
  std::vector<Complex> solve(std::span<const Complex> b) const;

  /// Human-readable description of the ordering and pivoting in use.
  static std::string method();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around SparseLu.
std::vector<double> sparse_lu_solve(const SparseMatrix& a, std::span<const double> b,
                                    SolveReport* report = nullptr);

double norm2(std::span<const double> x);
double norm2(std::span<const Complex> x);

}  // namespace linalg
}  // namespace qrm
