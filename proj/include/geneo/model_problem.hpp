#pragma once

/** @file model_problem.hpp
    @brief -div(a grad u) - kappa u = f on the unit square with homogeneous Dirichlet data,
           discretized by P1 elements on a uniform triangulated grid.
*/

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "geneo/sparse_matrix.hpp"

namespace geneo {

enum class LayerProfile { Homogeneous, IncreasingLayers, AlternatingLayers, DiagonalLayers };

std::string_view to_string(LayerProfile profile);
/// Accepts "homogeneous", "increasing", "alternating", "diagonal" (and the *-layers spellings).
LayerProfile parse_layer_profile(std::string_view name);

/**
 * @brief Layered diffusion coefficient a(x) in [1, a_max] and a constant reaction coefficient.
 *
 * Ten layers of equal width. Increasing and alternating layers are horizontal, numbered from the
 * bottom; diagonal layers are bands of constant x - y. Each layer carries a grey shade s in (0, 1]
 * mapped linearly to a = 1 + (a_max - 1) (1 - s) / (1 - s_min), so the darkest shade (s = 1) gives
 * a = 1 and the lightest shade gives a_max.
 */
struct CoefficientField {
  LayerProfile profile = LayerProfile::Homogeneous;
  double a_max = 1.0;
  double kappa = 0.0;

  /// Throws OutOfDomain outside the closed unit square.
  double diffusion(double x, double y) const;
  double reaction(double /*x*/, double /*y*/) const { return kappa; }

  /// Shade of each of the ten layers (bottom to top, or increasing x - y for diagonal bands).
  static std::array<double, 10> layer_shades(LayerProfile profile);
};

double evaluate_coefficient(const CoefficientField &field, double x, double y);

/**
 * @brief Uniform grid with n points per direction, each cell cut along its "/" diagonal.
 *
 * Node (i, j) sits at (i h, j h) and has global id j n + i. Cell (ci, cj) holds the triangles
 * {(ci,cj), (ci+1,cj), (ci+1,cj+1)} (id 2 c) and {(ci,cj), (ci+1,cj+1), (ci,cj+1)} (id 2 c + 1),
 * with c = cj (n - 1) + ci. Interior nodes are numbered row by row as dofs.
 */
class MeshGrid {
public:
  explicit MeshGrid(int n_glob);

  int n_glob() const noexcept { return n_; }
  int cells_per_side() const noexcept { return n_ - 1; }
  double h() const noexcept { return h_; }

  int node_count() const noexcept { return n_ * n_; }
  int node_id(int i, int j) const noexcept { return j * n_ + i; }
  std::array<double, 2> node_coords(int node) const noexcept { return {(node % n_) * h_, (node / n_) * h_}; }

  int element_count() const noexcept { return 2 * (n_ - 1) * (n_ - 1); }
  std::array<int, 3> element_nodes(int e) const noexcept;
  std::array<double, 2> element_centroid(int e) const noexcept;

  int dof_count() const noexcept { return (n_ - 2) * (n_ - 2); }
  /// Dof index of a node, or -1 on the Dirichlet boundary.
  int node_to_dof(int node) const noexcept
  {
    const int i = node % n_;
    const int j = node / n_;
    if (i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1)
      return -1;
    return (j - 1) * (n_ - 2) + (i - 1);
  }
  int dof_to_node(int dof) const noexcept { return node_id(dof % (n_ - 2) + 1, dof / (n_ - 2) + 1); }

  const std::vector<int> &interior_nodes() const noexcept { return interior_; }
  const std::vector<int> &boundary_nodes() const noexcept { return boundary_; }

private:
  int n_;
  double h_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
};

/// Throws TooCoarse for n_glob < 3.
MeshGrid build_mesh(int n_glob);

struct DiscreteSystem {
  SparseMatrix operator_matrix; ///< stiffness - kappa * mass, symmetric indefinite
  SparseMatrix stiffness;       ///< kappa-free part, SPD; defines the energy norm
  SparseMatrix mass_kappa;      ///< kappa-weighted mass matrix
  Vector load;
};

/// Local P1 stiffness (without the coefficient) and mass (without kappa) of one element.
struct ElementMatrices {
  std::array<std::array<double, 3>, 3> stiffness;
  std::array<std::array<double, 3>, 3> mass;
};
ElementMatrices element_matrices(const MeshGrid &mesh, int e);

/**
 * @brief Assembles the Dirichlet-eliminated system on interior dofs.
 *
 * The diffusion coefficient is sampled at each element centroid; the reaction term uses the
 * exact P1 mass matrix. The load is the unit point source (see point_source_load()).
 */
DiscreteSystem assemble(const MeshGrid &mesh, const CoefficientField &field);

/// Unit nodal load at the interior node nearest (1/2, 1/2); ties go to the lower index.
Vector point_source_load(const MeshGrid &mesh);

/// Consistent load M f_I for a smooth right-hand side given by its nodal interpolant.
Vector interpolated_load(const MeshGrid &mesh, const std::function<double(double, double)> &f);

/// Writes the node-sampled diffusion coefficient as a text grid (top row = y = 1).
void write_coefficient_grid(const MeshGrid &mesh, const CoefficientField &field, const std::filesystem::path &path);

/// Writes n_glob x n_glob nodal values as a text grid (top row = y = 1).
void write_node_grid(const MeshGrid &mesh, const std::vector<double> &node_values, const std::filesystem::path &path);

} // namespace geneo
