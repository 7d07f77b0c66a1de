#pragma once

#include <memory>
#include <optional>
#include <string>

#include "geneo/sparse_matrix.hpp"

namespace geneo {

/// Sylvester inertia of a symmetric matrix read off an LDL^T factorization.
struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

/**
 * @brief Direct factorization of a square sparse matrix, reusable for many solves.
 *
 * Symmetric matrices are factored as P A P^T = L D L^T with a fill-reducing ordering;
 * if that factorization is rejected (breakdown, tiny pivot or a failed residual probe)
 * the matrix is refactored with a partial-pivoting sparse LU. Every accepted
 * factorization passes a random-vector probe ||A x - v|| <= 1e-10 ||v||.
 */
class Factorization {
public:
  enum class Method { LDLT, LU };

  /// @param label identifies the matrix (e.g. "subdomain 3") in error messages.
  static Factorization factorize(const SparseMatrix &m, bool symmetric_indefinite, const std::string &label = {});

  Factorization(Factorization &&) noexcept;
  Factorization &operator=(Factorization &&) noexcept;
  ~Factorization();

  Vector solve(const Vector &rhs) const;
  DenseMatrix solve(const DenseMatrix &rhs) const;

  int size() const noexcept { return size_; }
  Method method() const noexcept { return method_; }
  bool symmetric() const noexcept { return symmetric_; }
  /// Set when a pivot fell below 1e-14 times the largest pivot magnitude.
  bool near_singular() const noexcept { return near_singular_; }
  /// Relative residual of the random-vector probe run at construction.
  double probe_residual() const noexcept { return probe_residual_; }
  /// Only available for LDL^T factorizations.
  std::optional<Inertia> inertia() const noexcept { return inertia_; }

  static constexpr double residual_tolerance = 1e-10;
  static constexpr double pivot_tolerance = 1e-14;

  struct Impl;

private:
  Factorization() = default;

  std::unique_ptr<Impl> impl_;
  int size_ = 0;
  Method method_ = Method::LDLT;
  bool symmetric_ = false;
  bool near_singular_ = false;
  double probe_residual_ = 0.0;
  std::optional<Inertia> inertia_;
};

} // namespace geneo
