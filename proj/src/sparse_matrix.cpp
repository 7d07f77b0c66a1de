#include "geneo/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "geneo/error.hpp"

namespace geneo {

namespace {

void require(bool cond, ErrorCode code, const std::string &msg)
{
  if (!cond)
    throw Error(code, msg);
}

} // namespace

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> entries)
{
  require(rows >= 0 && cols >= 0, ErrorCode::InvalidArgument, "negative matrix dimension");

  std::vector<int> counts(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto &t : entries) {
    require(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols, ErrorCode::IndexOutOfRange,
            "triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") outside " + std::to_string(rows) +
                "x" + std::to_string(cols));
    ++counts[t.row + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());

  // Bucket by row, then sort and merge duplicates within each row.
  std::vector<int> cols_tmp(entries.size());
  std::vector<double> vals_tmp(entries.size());
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (const auto &t : entries) {
    const int pos = fill[t.row]++;
    cols_tmp[pos] = t.col;
    vals_tmp[pos] = t.value;
  }

  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_offsets_.assign(static_cast<std::size_t>(rows) + 1, 0);
  m.col_indices_.reserve(entries.size());
  m.values_.reserve(entries.size());

  std::vector<int> order;
  for (int i = 0; i < rows; ++i) {
    const int begin = counts[i];
    const int end = counts[i + 1];
    order.resize(static_cast<std::size_t>(end - begin));
    std::iota(order.begin(), order.end(), begin);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return cols_tmp[a] < cols_tmp[b]; });
    int last_col = -1;
    for (int idx : order) {
      if (cols_tmp[idx] == last_col) {
        m.values_.back() += vals_tmp[idx];
      }
      else {
        m.col_indices_.push_back(cols_tmp[idx]);
        m.values_.push_back(vals_tmp[idx]);
        last_col = cols_tmp[idx];
      }
    }
    m.row_offsets_[i + 1] = static_cast<int>(m.col_indices_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::from_csr(int rows, int cols, std::vector<int> row_offsets, std::vector<int> col_indices,
                                    std::vector<double> values)
{
  require(row_offsets.size() == static_cast<std::size_t>(rows) + 1, ErrorCode::InvalidArgument,
          "row_offsets must have rows+1 entries");
  require(row_offsets.front() == 0 && static_cast<std::size_t>(row_offsets.back()) == col_indices.size() &&
              col_indices.size() == values.size(),
          ErrorCode::InvalidArgument, "inconsistent CSR arrays");
  for (int i = 0; i < rows; ++i) {
    require(row_offsets[i] <= row_offsets[i + 1], ErrorCode::InvalidArgument, "row_offsets must be nondecreasing");
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      require(col_indices[k] >= 0 && col_indices[k] < cols, ErrorCode::IndexOutOfRange, "column index out of range");
      require(k == row_offsets[i] || col_indices[k - 1] < col_indices[k], ErrorCode::InvalidArgument,
              "column indices must be strictly increasing within a row");
    }
  }
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_offsets_ = std::move(row_offsets);
  m.col_indices_ = std::move(col_indices);
  m.values_ = std::move(values);
  return m;
}

SparseMatrix SparseMatrix::identity(int n)
{
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag)
{
  const int n = static_cast<int>(diag.size());
  std::vector<int> offsets(static_cast<std::size_t>(n) + 1);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::vector<int> cols(static_cast<std::size_t>(n));
  std::iota(cols.begin(), cols.end(), 0);
  return from_csr(n, n, std::move(offsets), std::move(cols), std::vector<double>(diag.begin(), diag.end()));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix &dense, double drop_tol)
{
  std::vector<Triplet> t;
  for (int i = 0; i < dense.rows(); ++i)
    for (int j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol || (drop_tol == 0.0 && dense(i, j) != 0.0))
        t.push_back({i, j, dense(i, j)});
  return from_triplets(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()), t);
}

double SparseMatrix::coeff(int i, int j) const
{
  require(i >= 0 && i < rows_ && j >= 0 && j < cols_, ErrorCode::IndexOutOfRange, "coeff index out of range");
  const auto first = col_indices_.begin() + row_offsets_[i];
  const auto last = col_indices_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j)
    return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vector SparseMatrix::operator*(const Vector &v) const
{
  Vector y = Vector::Zero(rows_);
  multiply_add(v, y);
  return y;
}

void SparseMatrix::multiply_add(const Vector &v, Vector &y, double alpha) const
{
  require(v.size() == cols_ && y.size() == rows_, ErrorCode::DimensionMismatch,
          "spmv: matrix is " + std::to_string(rows_) + "x" + std::to_string(cols_) + ", vector has " +
              std::to_string(v.size()) + " entries");
  const double *x = v.data();
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      sum += values_[k] * x[col_indices_[k]];
    y[i] += alpha * sum;
  }
}

SparseMatrix SparseMatrix::transpose() const
{
  std::vector<int> offsets(static_cast<std::size_t>(cols_) + 1, 0);
  for (int c : col_indices_)
    ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<int> cols(col_indices_.size());
  std::vector<double> vals(values_.size());
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const int pos = fill[col_indices_[k]]++;
      cols[pos] = i;
      vals[pos] = values_[k];
    }
  }
  SparseMatrix t;
  t.rows_ = cols_;
  t.cols_ = rows_;
  t.row_offsets_ = std::move(offsets);
  t.col_indices_ = std::move(cols);
  t.values_ = std::move(vals);
  return t;
}

SparseMatrix SparseMatrix::submatrix(std::span<const int> row_set, std::span<const int> col_set) const
{
  std::vector<int> col_map(static_cast<std::size_t>(cols_), -1);
  for (std::size_t k = 0; k < col_set.size(); ++k) {
    require(col_set[k] >= 0 && col_set[k] < cols_, ErrorCode::IndexOutOfRange, "submatrix column out of range");
    require(k == 0 || col_set[k - 1] < col_set[k], ErrorCode::InvalidArgument, "submatrix column set must be sorted");
    col_map[col_set[k]] = static_cast<int>(k);
  }

  SparseMatrix s;
  s.rows_ = static_cast<int>(row_set.size());
  s.cols_ = static_cast<int>(col_set.size());
  s.row_offsets_.assign(row_set.size() + 1, 0);
  for (std::size_t r = 0; r < row_set.size(); ++r) {
    const int i = row_set[r];
    require(i >= 0 && i < rows_, ErrorCode::IndexOutOfRange, "submatrix row out of range");
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const int c = col_map[col_indices_[k]];
      if (c >= 0) {
        s.col_indices_.push_back(c);
        s.values_.push_back(values_[k]);
      }
    }
    s.row_offsets_[r + 1] = static_cast<int>(s.col_indices_.size());
  }
  return s;
}

SparseMatrix SparseMatrix::scaled(std::span<const double> left, std::span<const double> right) const
{
  require(left.size() == static_cast<std::size_t>(rows_) && right.size() == static_cast<std::size_t>(cols_),
          ErrorCode::DimensionMismatch, "scaling vectors do not match matrix dimensions");
  SparseMatrix s = *this;
  for (int i = 0; i < rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      s.values_[k] = left[i] * values_[k] * right[col_indices_[k]];
  return s;
}

SparseMatrix SparseMatrix::linear_combination(double alpha, const SparseMatrix &a, double beta, const SparseMatrix &b)
{
  require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorCode::DimensionMismatch,
          "linear_combination: operands have different shapes");
  SparseMatrix s;
  s.rows_ = a.rows_;
  s.cols_ = a.cols_;
  s.row_offsets_.assign(static_cast<std::size_t>(a.rows_) + 1, 0);
  s.col_indices_.reserve(static_cast<std::size_t>(std::max(a.nnz(), b.nnz())));
  s.values_.reserve(s.col_indices_.capacity());
  for (int i = 0; i < a.rows_; ++i) {
    int ka = a.row_offsets_[i];
    int kb = b.row_offsets_[i];
    const int ea = a.row_offsets_[i + 1];
    const int eb = b.row_offsets_[i + 1];
    while (ka < ea || kb < eb) {
      const int ca = ka < ea ? a.col_indices_[ka] : a.cols_;
      const int cb = kb < eb ? b.col_indices_[kb] : b.cols_;
      if (ca == cb) {
        s.col_indices_.push_back(ca);
        s.values_.push_back(alpha * a.values_[ka++] + beta * b.values_[kb++]);
      }
      else if (ca < cb) {
        s.col_indices_.push_back(ca);
        s.values_.push_back(alpha * a.values_[ka++]);
      }
      else {
        s.col_indices_.push_back(cb);
        s.values_.push_back(beta * b.values_[kb++]);
      }
    }
    s.row_offsets_[i + 1] = static_cast<int>(s.col_indices_.size());
  }
  return s;
}

Vector SparseMatrix::diagonal_values() const
{
  const int n = std::min(rows_, cols_);
  Vector d = Vector::Zero(n);
  for (int i = 0; i < n; ++i)
    d[i] = coeff(i, i);
  return d;
}

double SparseMatrix::frobenius_norm() const
{
  double s = 0.0;
  for (double v : values_)
    s += v * v;
  return std::sqrt(s);
}

double SparseMatrix::max_abs() const
{
  double m = 0.0;
  for (double v : values_)
    m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::symmetry_defect() const
{
  if (rows_ != cols_)
    return std::numeric_limits<double>::infinity();
  const double scale = max_abs();
  if (scale == 0.0)
    return 0.0;
  double defect = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      defect = std::max(defect, std::abs(values_[k] - coeff(col_indices_[k], i)));
  return defect / scale;
}

bool SparseMatrix::has_empty_row_or_column() const
{
  std::vector<char> col_seen(static_cast<std::size_t>(cols_), 0);
  for (int i = 0; i < rows_; ++i) {
    bool any = false;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (values_[k] != 0.0) {
        any = true;
        col_seen[col_indices_[k]] = 1;
      }
    }
    if (!any)
      return true;
  }
  return std::find(col_seen.begin(), col_seen.end(), 0) != col_seen.end();
}

DenseMatrix SparseMatrix::to_dense() const
{
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      d(i, col_indices_[k]) = values_[k];
  return d;
}

Eigen::SparseMatrix<double, Eigen::ColMajor, int> SparseMatrix::to_eigen() const
{
  // CSR of this matrix is the CSC of its transpose.
  const SparseMatrix t = transpose();
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor, int>> csc(
      rows_, cols_, static_cast<Eigen::Index>(t.values_.size()), t.row_offsets_.data(), t.col_indices_.data(),
      t.values_.data());
  return Eigen::SparseMatrix<double, Eigen::ColMajor, int>(csc);
}

Vector spmv(const SparseMatrix &m, const Vector &v) { return m * v; }

DenseMatrix galerkin_triple_product(const DenseMatrix &basis, const SparseMatrix &b)
{
  require(basis.rows() == b.cols() && b.rows() == b.cols(), ErrorCode::DimensionMismatch,
          "galerkin_triple_product: basis has " + std::to_string(basis.rows()) + " rows, operator is " +
              std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  DenseMatrix applied(b.rows(), basis.cols());
  for (Eigen::Index c = 0; c < basis.cols(); ++c)
    applied.col(c) = b * Vector(basis.col(c));
  return basis.transpose() * applied;
}

} // namespace geneo
