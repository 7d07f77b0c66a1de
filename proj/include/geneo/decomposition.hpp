#pragma once

/** @file decomposition.hpp
    @brief Overlapping decomposition of the unit square into N square subdomains with minimal overlap.

    The cell grid is split into sqrt(N) x sqrt(N) blocks; each block is then extended by every
    triangle that shares at least one vertex with it. A dof is *internal* to a subdomain when all
    triangles around it belong to the extended subdomain. The partition-of-unity weight of a dof is
    1 / mu_i on internal dofs (mu_i = number of subdomains it is internal to) and 0 elsewhere.
*/

#include <array>
#include <filesystem>
#include <vector>

#include "geneo/model_problem.hpp"
#include "geneo/sparse_matrix.hpp"

namespace geneo {

struct Subdomain {
  int id = 0;
  /// Sorted global dofs touched by the extended subdomain (global Dirichlet nodes excluded).
  std::vector<int> overlapping_dofs;
  /// Local positions (into overlapping_dofs) of the internal dofs, ascending.
  std::vector<int> internal_local;
  /// Aligned with overlapping_dofs.
  std::vector<double> pou_weights;
  /// Triangles of the extended subdomain.
  std::vector<int> elements;
  /// Block of cells before extension: [cell_begin, cell_end) in x and y.
  std::array<int, 2> cell_begin{};
  std::array<int, 2> cell_end{};

  int size() const { return static_cast<int>(overlapping_dofs.size()); }
  /// Local index of a global dof, or -1 when the dof is outside the subdomain.
  int local_index(int global_dof) const;
};

struct Decomposition {
  int global_dofs = 0;
  int blocks_per_side = 0;
  std::vector<Subdomain> subdomains;
  std::vector<int> multiplicity;

  int count() const { return static_cast<int>(subdomains.size()); }
  const Subdomain &at(int j) const;
};

/// Throws NotPerfectSquare or SubdomainTooSmall.
Decomposition build_decomposition(const MeshGrid &mesh, int n_subdomains);

Vector restrict_to(const Decomposition &d, int j, const Vector &v);
Vector extend_from(const Decomposition &d, int j, const Vector &v_local);
/// y += extend_from(d, j, v_local) without allocating a global vector.
void extend_add(const Decomposition &d, int j, const Vector &v_local, Vector &y);
Vector apply_pou(const Decomposition &d, int j, const Vector &v_local);

/// Sum_j R_j^T D_j R_j v; equals v for a valid partition of unity.
Vector pou_sum(const Decomposition &d, const Vector &v);

enum class MaskKind { Membership, Internal, Weight };

/// Per-node mask for subdomain j written as a text grid; boundary nodes are 0.
void write_subdomain_mask(const MeshGrid &mesh, const Decomposition &d, int j, MaskKind kind,
                          const std::filesystem::path &path);

} // namespace geneo
