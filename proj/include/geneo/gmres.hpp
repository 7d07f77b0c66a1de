#pragma once

/** @file gmres.hpp
    @brief Preconditioned GMRES with Euclidean or energy inner product.
*/

#include <filesystem>
#include <optional>
#include <vector>

#include "geneo/schwarz.hpp"
#include "geneo/sparse_matrix.hpp"

namespace geneo {

enum class GmresNorm { Euclidean, Energy };
enum class GmresOrientation { Left, Right };

struct GmresConfig {
  double rtol = 1e-6;
  int max_iters = 1000;
  /// Restart length; none means full GMRES.
  std::optional<int> restart;
  GmresNorm norm = GmresNorm::Euclidean;
  GmresOrientation orientation = GmresOrientation::Right;
  /// SPD matrix of the energy inner product (required for GmresNorm::Energy).
  const SparseMatrix *energy_matrix = nullptr;

  void validate() const;
};

struct SolveReport {
  /// Arnoldi steps performed.
  int iterations = 0;
  /// Relative residual (configured norm and orientation) after every step; starts at 1.
  std::vector<double> residual_history;
  bool converged = false;
  int coarse_size = 0;
  double wall_time = 0.0;
  /// Euclidean ||f - B x|| / ||f|| of the returned iterate.
  double true_residual = 0.0;
  /// Set when the Krylov space became invariant before convergence.
  bool breakdown = false;
};

struct GmresResult {
  Vector solution;
  SolveReport report;
};

/**
 * @brief Solves B x = f from a zero initial guess.
 *
 * Right orientation minimizes the unpreconditioned residual; when the recurrence reports
 * convergence the true residual is recomputed and the iteration continues if it drifted.
 * Left orientation minimizes the preconditioned residual M^{-1}(f - B x).
 * Reaching max_iters returns the current iterate with converged = false.
 */
GmresResult gmres(const SparseMatrix &b, const Vector &f, const Preconditioner &p, const GmresConfig &cfg = {});

/// ||f - B x||_2 / ||f||_2
double true_residual_check(const SparseMatrix &b, const Vector &f, const Vector &x);

/// CSV "iteration,relative_residual".
void write_residual_history(const SolveReport &report, const std::filesystem::path &path);

} // namespace geneo
