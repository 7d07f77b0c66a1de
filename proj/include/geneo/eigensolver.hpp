#pragma once

/** @file eigensolver.hpp
    @brief Generalized eigensolvers for symmetric pencils (K, M) with M positive semidefinite and singular.

    Only finite eigenvalues are returned. Directions in null(M) correspond to infinite
    eigenvalues and are eliminated by a Schur complement: writing the unknowns as
    x = (x_r, x_0) with M acting only on x_r, every finite eigenpair satisfies
    S x_r = lambda M_rr x_r with S = K_rr - K_r0 K_00^{-1} K_0r, and x_0 = -K_00^{-1} K_0r x_r.
*/

#include <cstdint>
#include <vector>

#include "geneo/sparse_matrix.hpp"

namespace geneo {

struct Pencil {
  SparseMatrix lhs; ///< symmetric, possibly indefinite
  SparseMatrix rhs; ///< symmetric positive semidefinite, possibly singular

  int dimension() const { return lhs.rows(); }
  /// Throws DimensionMismatch unless both matrices are square of equal size.
  void validate() const;
};

/// Finite eigenpairs sorted by eigenvalue; columns of `vectors` are M-orthonormal.
struct EigenPairSet {
  std::vector<double> values;
  DenseMatrix vectors;

  std::size_t size() const { return values.size(); }
};

/// Default size above which the dense reference solver refuses to run.
inline constexpr int dense_eig_limit = 4000;

/// Relative eigenresidual ||K x - lambda M x|| / ((||K||_F + |lambda| ||M||_F) ||x||).
double eigen_residual(const Pencil &p, double lambda, const Vector &x);

/**
 * @brief Dense reference solver returning every finite eigenpair.
 *
 * A direction x is classified as infinite when ||x||_M^2 <= 1e-12 ||x||^2 ||M||; the finite
 * count equals rank(M). Throws DimensionTooLarge above @p limit and SingularPencil when K is
 * singular on null(M).
 */
EigenPairSet solve_pencil_dense(const Pencil &p, int limit = dense_eig_limit);

struct ShiftInvertStats {
  int factorizations = 0;
  int lanczos_steps = 0;
  int rounds = 0;
  int max_subspace = 0;
};

struct ShiftInvertOptions {
  /// Relative residual required of every returned pair.
  double residual_tolerance = 1e-8;
  /// Relative Ritz estimate at which a Lanczos pair is taken as converged.
  double ritz_tolerance = 1e-10;
  /// Windows holding more eigenvalues than this are bisected before the Lanczos solve.
  int max_window_count = 40;
  /// Retries with a perturbed shift when a shifted matrix is numerically singular.
  int shift_retries = 5;
  std::uint64_t seed = 20210311;
  ShiftInvertStats *stats = nullptr;
};

/**
 * @brief The @p target_count smallest finite eigenvalues strictly above @p shift.
 *
 * Shift-invert Lanczos with full reorthogonalization in the M-inner product. Completeness
 * (including repeated eigenvalues) is verified through Sylvester inertia counts of K - sigma M.
 * Requires the null space of M to be spanned by coordinate vectors (rows of M that are zero).
 * Throws NoConvergence or ShiftSingular.
 */
EigenPairSet solve_pencil_shift_invert(const Pencil &p, int target_count, double shift,
                                       const ShiftInvertOptions &opts = {});

/**
 * @brief All finite eigenpairs with eigenvalue strictly below @p threshold.
 *
 * The interval below the threshold is sliced using inertia counts until every slice holds a
 * known, bounded number of eigenvalues; each slice is solved by shift-invert Lanczos with a
 * shift inside it, locking converged vectors until the counted number is reached.
 */
EigenPairSet solve_pencil_below(const Pencil &p, double threshold, const ShiftInvertOptions &opts = {});

} // namespace geneo
