#include "geneo/model_problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "geneo/error.hpp"

namespace geneo {

std::string_view to_string(LayerProfile profile)
{
  switch (profile) {
  case LayerProfile::Homogeneous: return "homogeneous";
  case LayerProfile::IncreasingLayers: return "increasing";
  case LayerProfile::AlternatingLayers: return "alternating";
  case LayerProfile::DiagonalLayers: return "diagonal";
  }
  return "unknown";
}

LayerProfile parse_layer_profile(std::string_view name)
{
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s.ends_with("_layers") || s.ends_with("-layers"))
    s.resize(s.size() - 7);
  if (s == "homogeneous")
    return LayerProfile::Homogeneous;
  if (s == "increasing")
    return LayerProfile::IncreasingLayers;
  if (s == "alternating")
    return LayerProfile::AlternatingLayers;
  if (s == "diagonal")
    return LayerProfile::DiagonalLayers;
  throw Error(ErrorCode::InvalidArgument, "unknown layer profile '" + std::string(name) + "'");
}

std::array<double, 10> CoefficientField::layer_shades(LayerProfile profile)
{
  switch (profile) {
  case LayerProfile::Homogeneous: return {1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  case LayerProfile::IncreasingLayers: return {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
  case LayerProfile::AlternatingLayers: return {1.0, 0.1, 1.0, 0.1, 1.0, 0.1, 1.0, 0.1, 1.0, 0.1};
  // Bands ordered by increasing x - y, from the top-left corner to the bottom-right corner.
  case LayerProfile::DiagonalLayers: return {0.8, 1.0, 0.4, 1.0, 0.05, 1.0, 0.2, 1.0, 0.6, 1.0};
  }
  return {};
}

double CoefficientField::diffusion(double x, double y) const
{
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
    throw Error(ErrorCode::OutOfDomain, "point (" + std::to_string(x) + ", " + std::to_string(y) +
                                            ") outside the unit square");
  if (profile == LayerProfile::Homogeneous)
    return 1.0;

  int layer = 0;
  if (profile == LayerProfile::DiagonalLayers)
    layer = static_cast<int>(std::floor((x - y + 1.0) / 0.2));
  else
    layer = static_cast<int>(std::floor(10.0 * y));
  layer = std::clamp(layer, 0, 9);

  const auto shades = layer_shades(profile);
  const double s_min = *std::min_element(shades.begin(), shades.end());
  return 1.0 + (a_max - 1.0) * (1.0 - shades[layer]) / (1.0 - s_min);
}

double evaluate_coefficient(const CoefficientField &field, double x, double y) { return field.diffusion(x, y); }

MeshGrid::MeshGrid(int n_glob) : n_(n_glob), h_(1.0 / (n_glob - 1))
{
  if (n_glob < 3)
    throw Error(ErrorCode::TooCoarse, "n_glob must be at least 3, got " + std::to_string(n_glob));
  interior_.reserve(static_cast<std::size_t>(dof_count()));
  for (int node = 0; node < node_count(); ++node)
    (node_to_dof(node) >= 0 ? interior_ : boundary_).push_back(node);
}

std::array<int, 3> MeshGrid::element_nodes(int e) const noexcept
{
  const int c = e / 2;
  const int ci = c % (n_ - 1);
  const int cj = c / (n_ - 1);
  if (e % 2 == 0)
    return {node_id(ci, cj), node_id(ci + 1, cj), node_id(ci + 1, cj + 1)};
  return {node_id(ci, cj), node_id(ci + 1, cj + 1), node_id(ci, cj + 1)};
}

std::array<double, 2> MeshGrid::element_centroid(int e) const noexcept
{
  const auto nodes = element_nodes(e);
  double x = 0.0;
  double y = 0.0;
  for (int v : nodes) {
    const auto p = node_coords(v);
    x += p[0];
    y += p[1];
  }
  return {x / 3.0, y / 3.0};
}

MeshGrid build_mesh(int n_glob) { return MeshGrid(n_glob); }

ElementMatrices element_matrices(const MeshGrid &mesh, int e)
{
  const auto nodes = mesh.element_nodes(e);
  std::array<std::array<double, 2>, 3> p;
  for (int a = 0; a < 3; ++a)
    p[a] = mesh.node_coords(nodes[a]);
  const double det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
  const double area = 0.5 * std::abs(det);
  // Gradients of the barycentric coordinates.
  std::array<std::array<double, 2>, 3> g;
  for (int a = 0; a < 3; ++a) {
    const auto &q1 = p[(a + 1) % 3];
    const auto &q2 = p[(a + 2) % 3];
    g[a] = {(q1[1] - q2[1]) / det, (q2[0] - q1[0]) / det};
  }
  ElementMatrices m{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      m.stiffness[a][b] = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
      m.mass[a][b] = area / 12.0 * (a == b ? 2.0 : 1.0);
    }
  }
  return m;
}

DiscreteSystem assemble(const MeshGrid &mesh, const CoefficientField &field)
{
  const int n = mesh.dof_count();
  std::vector<Triplet> stiff;
  std::vector<Triplet> mass;
  stiff.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
  mass.reserve(stiff.capacity());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    const auto c = mesh.element_centroid(e);
    const double a = field.diffusion(c[0], c[1]);
    const double kappa = field.reaction(c[0], c[1]);
    const ElementMatrices em = element_matrices(mesh, e);
    for (int r = 0; r < 3; ++r) {
      const int dr = mesh.node_to_dof(nodes[r]);
      if (dr < 0)
        continue;
      for (int s = 0; s < 3; ++s) {
        const int ds = mesh.node_to_dof(nodes[s]);
        if (ds < 0)
          continue;
        stiff.push_back({dr, ds, a * em.stiffness[r][s]});
        mass.push_back({dr, ds, kappa * em.mass[r][s]});
      }
    }
  }
  DiscreteSystem sys;
  sys.stiffness = SparseMatrix::from_triplets(n, n, stiff);
  sys.mass_kappa = SparseMatrix::from_triplets(n, n, mass);
  sys.operator_matrix = SparseMatrix::linear_combination(1.0, sys.stiffness, -1.0, sys.mass_kappa);
  sys.load = point_source_load(mesh);
  return sys;
}

Vector point_source_load(const MeshGrid &mesh)
{
  Vector f = Vector::Zero(mesh.dof_count());
  const int n = mesh.n_glob();
  // Nearest index to the midpoint (n - 1) / 2; on a tie the lower index wins.
  const int mid = (n - 1) / 2;
  f[mesh.node_to_dof(mesh.node_id(mid, mid))] = 1.0;
  return f;
}

Vector interpolated_load(const MeshGrid &mesh, const std::function<double(double, double)> &f)
{
  std::vector<double> nodal(static_cast<std::size_t>(mesh.node_count()));
  for (int v = 0; v < mesh.node_count(); ++v) {
    const auto p = mesh.node_coords(v);
    nodal[v] = f(p[0], p[1]);
  }
  Vector load = Vector::Zero(mesh.dof_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    const ElementMatrices em = element_matrices(mesh, e);
    for (int r = 0; r < 3; ++r) {
      const int dr = mesh.node_to_dof(nodes[r]);
      if (dr < 0)
        continue;
      for (int s = 0; s < 3; ++s)
        load[dr] += em.mass[r][s] * nodal[nodes[s]];
    }
  }
  return load;
}

void write_node_grid(const MeshGrid &mesh, const std::vector<double> &node_values, const std::filesystem::path &path)
{
  if (node_values.size() != static_cast<std::size_t>(mesh.node_count()))
    throw Error(ErrorCode::DimensionMismatch, "grid export expects one value per node");
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  out << std::setprecision(10);
  const int n = mesh.n_glob();
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i)
      out << (i ? " " : "") << node_values[static_cast<std::size_t>(mesh.node_id(i, j))];
    out << '\n';
  }
  if (!out)
    throw Error(ErrorCode::IOError, "write to " + path.string() + " failed");
}

void write_coefficient_grid(const MeshGrid &mesh, const CoefficientField &field, const std::filesystem::path &path)
{
  std::vector<double> values(static_cast<std::size_t>(mesh.node_count()));
  for (int v = 0; v < mesh.node_count(); ++v) {
    const auto p = mesh.node_coords(v);
    values[v] = field.diffusion(p[0], p[1]);
  }
  write_node_grid(mesh, values, path);
}

} // namespace geneo
