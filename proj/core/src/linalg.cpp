#include "qrm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "qrm/error.hpp"

namespace qrm::linalg {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
    throw InvalidArgument("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) throw InvalidArgument("SparseMatrix: row_ptr not monotone");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= cols_) throw InvalidArgument("SparseMatrix: column index out of range");
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
        throw InvalidArgument("SparseMatrix: columns not sorted/unique");
      }
      if (values_[k] == 0.0) throw InvalidArgument("SparseMatrix: explicit zero stored");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw InvalidArgument("from_triplets: index out of range");
  }
  // Stable sort keeps the summation order of duplicates equal to insertion
  // order, which makes assembly bit-reproducible.
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  std::size_t k = 0;
  while (k < triplets.size()) {
    const std::size_t r = triplets[k].row;
    const std::size_t c = triplets[k].col;
    double sum = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
      sum += triplets[k].value;
      ++k;
    }
    if (sum != 0.0) {
      col_idx.push_back(c);
      values.push_back(sum);
      ++row_ptr[r + 1];
    }
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1);
  std::vector<std::size_t> col_idx(n);
  std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
  std::iota(col_idx.begin(), col_idx.end(), std::size_t{0});
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  if (row >= rows_ || col >= cols_) throw InvalidArgument("SparseMatrix::at out of range");
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) throw InvalidArgument("multiply: dimension mismatch");
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<Complex> SparseMatrix::multiply(std::span<const Complex> x) const {
  if (x.size() != cols_) throw InvalidArgument("multiply: dimension mismatch");
  std::vector<Complex> y(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    Complex s{};
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({col_idx_[k], i, values_[k]});
  }
  return from_triplets(cols_, rows_, std::move(t));
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double scale = max_abs();
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (std::abs(values_[k] - at(col_idx_[k], i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix SparseMatrix::submatrix(std::span<const std::size_t> rows,
                                     std::span<const std::size_t> cols) const {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> col_map(cols_, kNone);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= cols_) throw InvalidArgument("submatrix: column out of range");
    col_map[cols[j]] = j;
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    if (r >= rows_) throw InvalidArgument("submatrix: row out of range");
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t j = col_map[col_idx_[k]];
      if (j != kNone) t.push_back({i, j, values_[k]});
    }
  }
  return from_triplets(rows.size(), cols.size(), std::move(t));
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({i, col_idx_[k], values_[k]});
  }
  return t;
}

SparseMatrix combine(double alpha, const SparseMatrix& a, double beta, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("combine: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  for (auto x : a.triplets()) t.push_back({x.row, x.col, alpha * x.value});
  for (auto x : b.triplets()) t.push_back({x.row, x.col, beta * x.value});
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

double quadratic_form(const SparseMatrix& a, std::span<const Complex> x) {
  const auto ax = a.multiply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (std::conj(x[i]) * ax[i]).real();
  return s;
}

double quadratic_form(const SparseMatrix& a, std::span<const double> x) {
  const auto ax = a.multiply(x);
  return std::inner_product(x.begin(), x.end(), ax.begin(), 0.0);
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& a) {
  DenseMatrix d(a.rows(), a.cols());
  for (const auto& t : a.triplets()) d(t.row, t.col) = t.value;
  return d;
}

std::vector<double> dense_solve(const DenseMatrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidArgument("dense_solve: matrix not square");
  if (b.size() != n) throw InvalidArgument("dense_solve: dimension mismatch");
  if (n > kDenseSolveLimit) throw InvalidArgument("dense_solve: n exceeds dense limit");

  DenseMatrix lu = a;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-14 * scale;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > std::abs(lu(p, k))) p = i;
    }
    if (!(std::abs(lu(p, k)) > tiny)) {
      throw NumericalError("dense_solve: matrix is numerically singular", k);
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(perm[k], perm[p]);
    }
    const double pivot = lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu(i, k) / pivot;
      lu(i, k) = m;
      if (m == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
    }
  }

  auto substitute = [&](const std::vector<double>& rhs) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs[perm[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * y[j];
      y[i] = s;
    }
    for (std::size_t k = n; k-- > 0;) {
      double s = y[k];
      for (std::size_t j = k + 1; j < n; ++j) s -= lu(k, j) * y[j];
      y[k] = s / lu(k, k);
    }
    return y;
  };

  std::vector<double> x = substitute(std::vector<double>(b.begin(), b.end()));
  // Two refinement steps with the residual accumulated in extended precision;
  // saddle-point systems with small delta lose digits in plain elimination.
  for (int step = 0; step < 2; ++step) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      long double s = b[i];
      for (std::size_t j = 0; j < n; ++j) s -= static_cast<long double>(a(i, j)) * x[j];
      r[i] = static_cast<double>(s);
    }
    const auto dx = substitute(r);
    for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  }
  return x;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double norm2(std::span<const Complex> x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

struct SparseLu::Impl {
  using EigenMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  Eigen::SparseLU<EigenMatrix, Eigen::COLAMDOrdering<int>> lu;
  SparseMatrix a;
  bool ok = false;
};

SparseLu::SparseLu() : impl_(std::make_unique<Impl>()) {}
SparseLu::SparseLu(const SparseMatrix& a) : SparseLu() { factor(a); }
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

std::string SparseLu::method() {
  return "supernodal sparse LU, COLAMD column ordering, threshold partial pivoting 0.1, "
         "one refinement step";
}

void SparseLu::factor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("SparseLu: matrix not square");
  impl_->ok = false;
  impl_->a = a;
  const auto n = static_cast<Eigen::Index>(a.rows());
  Impl::EigenMatrix m(n, n);
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nnz());
  for (const auto& x : a.triplets()) {
    t.emplace_back(static_cast<int>(x.row), static_cast<int>(x.col), x.value);
  }
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();

  impl_->lu.setPivotThreshold(kPivotThreshold);
  impl_->lu.analyzePattern(m);
  impl_->lu.factorize(m);
  if (impl_->lu.info() != Eigen::Success) {
    const std::string msg = impl_->lu.lastErrorMessage();
    std::optional<std::size_t> row;
    std::smatch match;
    static const std::regex trailing_index("([0-9]+)\\s*$");
    if (std::regex_search(msg, match, trailing_index)) row = std::stoul(match[1].str());
    throw NumericalError("sparse LU failed: " + msg, row);
  }
  impl_->ok = true;
}

bool SparseLu::factored() const { return impl_ && impl_->ok; }

std::size_t SparseLu::size() const { return impl_->a.rows(); }

std::vector<double> SparseLu::solve(std::span<const double> b, SolveReport* report) const {
  if (!factored()) throw InvalidArgument("SparseLu::solve before a successful factor()");
  if (b.size() != size()) throw InvalidArgument("SparseLu::solve: dimension mismatch");
  const auto n = static_cast<Eigen::Index>(b.size());
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success) throw NumericalError("sparse LU solve failed");

  std::vector<double> xv(x.data(), x.data() + n);
  std::vector<double> r = impl_->a.multiply(xv);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double bnorm = norm2(b);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  const double res0 = norm2(r) / scale;

  Eigen::Map<const Eigen::VectorXd> rmap(r.data(), n);
  Eigen::VectorXd dx = impl_->lu.solve(rmap);
  std::vector<double> refined(xv);
  for (Eigen::Index i = 0; i < n; ++i) refined[static_cast<std::size_t>(i)] += dx[i];
  std::vector<double> r1 = impl_->a.multiply(refined);
  for (std::size_t i = 0; i < r1.size(); ++i) r1[i] = b[i] - r1[i];
  const double res1 = norm2(r1) / scale;

  // Keep whichever iterate has the smaller residual.
  const bool take_refined = res1 <= res0;
  if (report) {
    report->residual_initial = res0;
    report->residual_final = take_refined ? res1 : res0;
  }
  return take_refined ? refined : xv;
}

std::vector<Complex> SparseLu::solve(std::span<const Complex> b) const {
  std::vector<double> re(b.size()), im(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    re[i] = b[i].real();
    im[i] = b[i].imag();
  }
  const auto xr = solve(re);
  const auto xi = solve(im);
  std::vector<Complex> x(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) x[i] = {xr[i], xi[i]};
  return x;
}

std::vector<double> sparse_lu_solve(const SparseMatrix& a, std::span<const double> b,
                                    SolveReport* report) {
  if (a.rows() != b.size()) throw InvalidArgument("sparse_lu_solve: dimension mismatch");
  return SparseLu(a).solve(b, report);
}

}  // namespace qrm::linalg
