#pragma once

/** @file coarse_space.hpp
    @brief Spectral coarse spaces from local generalized eigenproblems in the overlap.

    On every subdomain the Neumann forms a_j (stiffness) and b_j (stiffness - kappa mass) are
    assembled over the elements of the extended subdomain. The pencils are

      Delta-GenEO:  a_j(p, v) = lambda a_j(D p, D v)
      H-GenEO:      b_j(q, v) = lambda a_j(D q, D v)

    with D the partition-of-unity diagonal. Every eigenvector with lambda < lambda_max (for H-GenEO
    this includes all negative eigenvalues) contributes the coarse basis vector R_j^T D p.
*/

#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/LU>

#include "geneo/decomposition.hpp"
#include "geneo/eigensolver.hpp"
#include "geneo/model_problem.hpp"
#include "geneo/sparse_matrix.hpp"

namespace geneo {

enum class CoarseKind { DeltaGenEO, HGenEO };

std::string_view to_string(CoarseKind kind);

struct LocalOperators {
  SparseMatrix stiffness;      ///< a_j on the overlapping dofs
  SparseMatrix mass_kappa;     ///< kappa-weighted local mass
  SparseMatrix operator_matrix; ///< b_j = stiffness - mass_kappa
  SparseMatrix pou_weighted;   ///< D a_j D
  std::vector<double> weights; ///< diagonal of D
};

LocalOperators assemble_local(const MeshGrid &mesh, const CoefficientField &field, const Decomposition &d, int j);

Pencil build_pencil(const LocalOperators &ops, CoarseKind kind);

/// Pairs with eigenvalue < lambda_max, in ascending order.
EigenPairSet select_modes(const EigenPairSet &pairs, double lambda_max);

enum class EigenSolverChoice { ShiftInvert, Dense };

struct CoarseSpaceOptions {
  double lambda_max = 0.5;
  EigenSolverChoice solver = EigenSolverChoice::ShiftInvert;
  int dense_limit = dense_eig_limit;
  /// Keep the pre-PoU eigenvectors (needed for eigenfunction export).
  bool keep_eigenvectors = false;
  ShiftInvertOptions shift_invert{};
};

/// Selected (pre-PoU) eigenpairs of one subdomain pencil, eigenvalues below lambda_max.
EigenPairSet solve_local_modes(const MeshGrid &mesh, const CoefficientField &field, const Decomposition &d, int j,
                               CoarseKind kind, const CoarseSpaceOptions &opts = {});

/**
 * @brief Coarse basis R_0^T stored block-wise (one dense block per subdomain) plus the factored
 *        Galerkin operator B_0 = R_0 B R_0^T.
 *
 * Each basis column is normalized in the Euclidean norm and supported on one subdomain.
 */
class CoarseSpace {
public:
  CoarseKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return offsets_.back(); }
  int subdomain_count() const noexcept { return static_cast<int>(blocks_.size()); }
  int mode_count(int j) const { return offsets_[static_cast<std::size_t>(j) + 1] - offsets_[static_cast<std::size_t>(j)]; }
  int offset(int j) const { return offsets_[static_cast<std::size_t>(j)]; }
  double lambda_max() const noexcept { return lambda_max_; }

  const DenseMatrix &block(int j) const { return blocks_.at(static_cast<std::size_t>(j)); }
  const std::vector<double> &selected_eigenvalues(int j) const { return eigenvalues_.at(static_cast<std::size_t>(j)); }
  /// Pre-PoU eigenvectors on subdomain j; empty unless kept at construction.
  const DenseMatrix &eigenvectors(int j) const { return eigenvectors_.at(static_cast<std::size_t>(j)); }
  const DenseMatrix &coarse_matrix() const noexcept { return coarse_matrix_; }

  /// R_0 r
  Vector restrict(const Decomposition &d, const Vector &r) const;
  /// y += R_0^T c
  void prolong_add(const Decomposition &d, const Vector &c, Vector &y) const;
  Vector prolong(const Decomposition &d, const Vector &c) const;
  /// B_0^{-1} c
  Vector coarse_solve(const Vector &c) const;
  /// Q_0 r = R_0^T B_0^{-1} R_0 r
  Vector apply_correction(const Decomposition &d, const Vector &r) const;

  /// Full n x m matrix R_0^T (for testing on small problems).
  DenseMatrix dense_basis(const Decomposition &d) const;

  friend CoarseSpace build_coarse_space(const MeshGrid &, const CoefficientField &, const Decomposition &, CoarseKind,
                                        const SparseMatrix &, const CoarseSpaceOptions &);
  friend CoarseSpace coarse_space_from_blocks(const Decomposition &, CoarseKind, std::vector<DenseMatrix>,
                                              const SparseMatrix &);

private:
  void finalize(const Decomposition &d, const SparseMatrix &b);

  CoarseKind kind_ = CoarseKind::DeltaGenEO;
  double lambda_max_ = 0.0;
  std::vector<DenseMatrix> blocks_;
  std::vector<int> offsets_{0};
  std::vector<std::vector<double>> eigenvalues_;
  std::vector<DenseMatrix> eigenvectors_;
  DenseMatrix coarse_matrix_;
  std::shared_ptr<const Eigen::PartialPivLU<DenseMatrix>> coarse_lu_;
};

/**
 * @brief Solves every subdomain pencil, selects modes below lambda_max and factors B_0.
 *
 * Throws CoarseSingular when B_0 has a pivot below 1e-14 of the largest one; eigensolver errors
 * propagate with the subdomain index attached.
 */
CoarseSpace build_coarse_space(const MeshGrid &mesh, const CoefficientField &field, const Decomposition &d,
                               CoarseKind kind, const SparseMatrix &b, const CoarseSpaceOptions &opts = {});

/// Coarse space from explicit per-subdomain basis blocks (columns used as given).
CoarseSpace coarse_space_from_blocks(const Decomposition &d, CoarseKind kind, std::vector<DenseMatrix> blocks,
                                     const SparseMatrix &b);

/// R_0 B R_0^T computed block-wise from the per-subdomain bases.
DenseMatrix blockwise_galerkin_product(const Decomposition &d, const std::vector<DenseMatrix> &blocks,
                                       const SparseMatrix &b);

/**
 * @brief Sign changes of a local vector along the horizontal node row through the middle of the
 *        subdomain's block. Entries below 1% of the vector's largest magnitude are skipped.
 */
int midline_sign_changes(const MeshGrid &mesh, const Decomposition &d, int j, const Vector &local);

/// Writes eigenvector l (0-based) of subdomain j on the subdomain's node bounding box.
void export_eigenfunction(const CoarseSpace &cs, const Decomposition &d, const MeshGrid &mesh, int j, int l,
                          const std::filesystem::path &path);

/// Writes a local vector of subdomain j on its node bounding box (nodes outside the subdomain are 0).
void write_local_grid(const MeshGrid &mesh, const Decomposition &d, int j, const Vector &local,
                      const std::filesystem::path &path);

/// CSV with one row per subdomain: subdomain, modes, semicolon-separated eigenvalues.
void write_coarse_summary(const CoarseSpace &cs, const std::filesystem::path &path);

} // namespace geneo
