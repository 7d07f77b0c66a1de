#include "geneo/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geneo/error.hpp"

namespace geneo {

namespace {

void check_index(const Decomposition &d, int j)
{
  if (j < 0 || j >= d.count())
    throw Error(ErrorCode::BadSubdomainIndex,
                "subdomain " + std::to_string(j) + " out of range [0, " + std::to_string(d.count()) + ")");
}

void check_local(const Subdomain &s, const Vector &v)
{
  if (v.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch, "local vector has " + std::to_string(v.size()) + " entries, subdomain " +
                                                  std::to_string(s.id) + " has " + std::to_string(s.size()) + " dofs");
}

std::vector<int> block_starts(int cells, int blocks)
{
  // Leading blocks absorb the remainder, one cell each.
  std::vector<int> starts(static_cast<std::size_t>(blocks) + 1);
  const int base = cells / blocks;
  const int rem = cells % blocks;
  for (int b = 0; b <= blocks; ++b)
    starts[b] = b * base + std::min(b, rem);
  return starts;
}

} // namespace

int Subdomain::local_index(int global_dof) const
{
  const auto it = std::lower_bound(overlapping_dofs.begin(), overlapping_dofs.end(), global_dof);
  if (it == overlapping_dofs.end() || *it != global_dof)
    return -1;
  return static_cast<int>(it - overlapping_dofs.begin());
}

const Subdomain &Decomposition::at(int j) const
{
  check_index(*this, j);
  return subdomains[static_cast<std::size_t>(j)];
}

Decomposition build_decomposition(const MeshGrid &mesh, int n_subdomains)
{
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(n_subdomains, 0)))));
  if (n_subdomains < 1 || side * side != n_subdomains)
    throw Error(ErrorCode::NotPerfectSquare, "number of subdomains must be a perfect square, got " +
                                                 std::to_string(n_subdomains));
  const int cells = mesh.cells_per_side();
  if (side > cells)
    throw Error(ErrorCode::SubdomainTooSmall, std::to_string(side) + " blocks per side but only " +
                                                  std::to_string(cells) + " cells");

  const int n = mesh.n_glob();
  const auto starts = block_starts(cells, side);

  Decomposition d;
  d.global_dofs = mesh.dof_count();
  d.blocks_per_side = side;
  d.multiplicity.assign(static_cast<std::size_t>(d.global_dofs), 0);
  d.subdomains.resize(static_cast<std::size_t>(n_subdomains));

  for (int by = 0; by < side; ++by) {
    for (int bx = 0; bx < side; ++bx) {
      Subdomain &s = d.subdomains[static_cast<std::size_t>(by * side + bx)];
      s.id = by * side + bx;
      s.cell_begin = {starts[bx], starts[by]};
      s.cell_end = {starts[bx + 1], starts[by + 1]};

      const int i0 = s.cell_begin[0];
      const int i1 = s.cell_end[0];
      const int j0 = s.cell_begin[1];
      const int j1 = s.cell_end[1];
      auto in_block = [&](int node) {
        const int i = node % n;
        const int j = node / n;
        return i >= i0 && i <= i1 && j >= j0 && j <= j1;
      };

      // Node box covering the extended region.
      const int bi0 = std::max(0, i0 - 1);
      const int bi1 = std::min(n - 1, i1 + 1);
      const int bj0 = std::max(0, j0 - 1);
      const int bj1 = std::min(n - 1, j1 + 1);
      const int bw = bi1 - bi0 + 1;
      std::vector<int> incidence(static_cast<std::size_t>(bw * (bj1 - bj0 + 1)), 0);

      for (int cj = std::max(0, j0 - 1); cj < std::min(cells, j1 + 1); ++cj) {
        for (int ci = std::max(0, i0 - 1); ci < std::min(cells, i1 + 1); ++ci) {
          const bool inside = ci >= i0 && ci < i1 && cj >= j0 && cj < j1;
          for (int t = 0; t < 2; ++t) {
            const int e = 2 * (cj * cells + ci) + t;
            const auto nodes = mesh.element_nodes(e);
            if (!inside && !std::any_of(nodes.begin(), nodes.end(), in_block))
              continue;
            s.elements.push_back(e);
            for (int v : nodes)
              ++incidence[static_cast<std::size_t>((v / n - bj0) * bw + (v % n - bi0))];
          }
        }
      }

      // Row-major traversal keeps the dofs sorted.
      for (int j = bj0; j <= bj1; ++j) {
        for (int i = bi0; i <= bi1; ++i) {
          const int count = incidence[static_cast<std::size_t>((j - bj0) * bw + (i - bi0))];
          const int dof = mesh.node_to_dof(mesh.node_id(i, j));
          if (count == 0 || dof < 0)
            continue;
          if (count == 6) { // every triangle around an interior node
            s.internal_local.push_back(s.size());
            ++d.multiplicity[static_cast<std::size_t>(dof)];
          }
          s.overlapping_dofs.push_back(dof);
        }
      }
      if (s.internal_local.empty())
        throw Error(ErrorCode::SubdomainTooSmall, "subdomain " + std::to_string(s.id) + " has no internal dofs");
    }
  }

  for (int dof = 0; dof < d.global_dofs; ++dof)
    if (d.multiplicity[static_cast<std::size_t>(dof)] < 1)
      throw Error(ErrorCode::SubdomainTooSmall, "dof " + std::to_string(dof) + " is internal to no subdomain");

  for (auto &s : d.subdomains) {
    s.pou_weights.assign(s.overlapping_dofs.size(), 0.0);
    for (int loc : s.internal_local)
      s.pou_weights[static_cast<std::size_t>(loc)] =
          1.0 / d.multiplicity[static_cast<std::size_t>(s.overlapping_dofs[static_cast<std::size_t>(loc)])];
  }
  return d;
}

Vector restrict_to(const Decomposition &d, int j, const Vector &v)
{
  const Subdomain &s = d.at(j);
  if (v.size() != d.global_dofs)
    throw Error(ErrorCode::DimensionMismatch, "restrict: vector has " + std::to_string(v.size()) +
                                                  " entries, expected " + std::to_string(d.global_dofs));
  Vector out(s.size());
  for (int k = 0; k < s.size(); ++k)
    out[k] = v[s.overlapping_dofs[static_cast<std::size_t>(k)]];
  return out;
}

void extend_add(const Decomposition &d, int j, const Vector &v_local, Vector &y)
{
  const Subdomain &s = d.at(j);
  check_local(s, v_local);
  if (y.size() != d.global_dofs)
    throw Error(ErrorCode::DimensionMismatch, "extend: global vector has wrong size");
  for (int k = 0; k < s.size(); ++k)
    y[s.overlapping_dofs[static_cast<std::size_t>(k)]] += v_local[k];
}

Vector extend_from(const Decomposition &d, int j, const Vector &v_local)
{
  Vector y = Vector::Zero(d.global_dofs);
  extend_add(d, j, v_local, y);
  return y;
}

Vector apply_pou(const Decomposition &d, int j, const Vector &v_local)
{
  const Subdomain &s = d.at(j);
  check_local(s, v_local);
  Vector out(s.size());
  for (int k = 0; k < s.size(); ++k)
    out[k] = s.pou_weights[static_cast<std::size_t>(k)] * v_local[k];
  return out;
}

Vector pou_sum(const Decomposition &d, const Vector &v)
{
  Vector y = Vector::Zero(d.global_dofs);
  for (int j = 0; j < d.count(); ++j)
    extend_add(d, j, apply_pou(d, j, restrict_to(d, j, v)), y);
  return y;
}

void write_subdomain_mask(const MeshGrid &mesh, const Decomposition &d, int j, MaskKind kind,
                          const std::filesystem::path &path)
{
  const Subdomain &s = d.at(j);
  std::vector<double> values(static_cast<std::size_t>(mesh.node_count()), 0.0);
  std::vector<char> internal(static_cast<std::size_t>(s.size()), 0);
  for (int loc : s.internal_local)
    internal[static_cast<std::size_t>(loc)] = 1;
  for (int k = 0; k < s.size(); ++k) {
    const int node = mesh.dof_to_node(s.overlapping_dofs[static_cast<std::size_t>(k)]);
    switch (kind) {
    case MaskKind::Membership: values[static_cast<std::size_t>(node)] = 1.0; break;
    case MaskKind::Internal: values[static_cast<std::size_t>(node)] = internal[static_cast<std::size_t>(k)]; break;
    case MaskKind::Weight: values[static_cast<std::size_t>(node)] = s.pou_weights[static_cast<std::size_t>(k)]; break;
    }
  }
  write_node_grid(mesh, values, path);
}

} // namespace geneo
