#pragma once

/** @file sparse_matrix.hpp
    @brief Compressed sparse row storage used for the global, local and coarse operators.
*/

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace geneo {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  int row;
  int col;
  double value;
};

/**
 * @brief Real CSR matrix with strictly increasing column indices in each row.
 *
 * Instances are immutable once built; all "modifying" operations return a new matrix.
 * Duplicate entries passed to from_triplets() are summed.
 */
class SparseMatrix {
public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> entries);
  /// Takes ownership of already valid CSR arrays; the layout is checked.
  static SparseMatrix from_csr(int rows, int cols, std::vector<int> row_offsets, std::vector<int> col_indices,
                               std::vector<double> values);
  static SparseMatrix identity(int n);
  static SparseMatrix diagonal(std::span<const double> diag);
  static SparseMatrix from_dense(const DenseMatrix &dense, double drop_tol = 0.0);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(values_.size()); }

  std::span<const int> row_offsets() const noexcept { return row_offsets_; }
  std::span<const int> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Stored value at (i, j), zero when the entry is not in the pattern.
  double coeff(int i, int j) const;

  Vector operator*(const Vector &v) const;
  /// y += alpha * this * v
  void multiply_add(const Vector &v, Vector &y, double alpha = 1.0) const;

  SparseMatrix transpose() const;

  /// Principal/rectangular submatrix on sorted index sets.
  SparseMatrix submatrix(std::span<const int> row_set, std::span<const int> col_set) const;

  /// diag(left) * this * diag(right)
  SparseMatrix scaled(std::span<const double> left, std::span<const double> right) const;

  /// alpha * a + beta * b (patterns are merged).
  static SparseMatrix linear_combination(double alpha, const SparseMatrix &a, double beta, const SparseMatrix &b);

  Vector diagonal_values() const;
  double frobenius_norm() const;
  double max_abs() const;

  /// Max |a_ij - a_ji| relative to max |a_ij|.
  double symmetry_defect() const;
  bool is_symmetric(double rtol = 1e-14) const { return symmetry_defect() <= rtol; }

  /// True when some row holds no stored entry or some column is never referenced.
  bool has_empty_row_or_column() const;

  DenseMatrix to_dense() const;
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> to_eigen() const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// Sparse matrix-vector product; throws DimensionMismatch on bad sizes.
Vector spmv(const SparseMatrix &m, const Vector &v);

/// R^T B R for a dense column block R (one column per coarse basis vector).
DenseMatrix galerkin_triple_product(const DenseMatrix &basis, const SparseMatrix &b);

} // namespace geneo
