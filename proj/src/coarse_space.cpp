#include "geneo/coarse_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "geneo/error.hpp"

namespace geneo {

std::string_view to_string(CoarseKind kind)
{
  return kind == CoarseKind::DeltaGenEO ? "delta" : "h";
}

LocalOperators assemble_local(const MeshGrid &mesh, const CoefficientField &field, const Decomposition &d, int j)
{
  const Subdomain &s = d.at(j);
  const int n = s.size();
  std::vector<Triplet> stiff;
  std::vector<Triplet> mass;
  stiff.reserve(s.elements.size() * 9);
  mass.reserve(s.elements.size() * 9);
  for (int e : s.elements) {
    const auto nodes = mesh.element_nodes(e);
    std::array<int, 3> loc{};
    for (int a = 0; a < 3; ++a) {
      const int dof = mesh.node_to_dof(nodes[a]);
      loc[a] = dof < 0 ? -1 : s.local_index(dof);
    }
    const auto c = mesh.element_centroid(e);
    const double a_coef = field.diffusion(c[0], c[1]);
    const double kappa = field.reaction(c[0], c[1]);
    const ElementMatrices em = element_matrices(mesh, e);
    for (int r = 0; r < 3; ++r) {
      if (loc[r] < 0)
        continue;
      for (int q = 0; q < 3; ++q) {
        if (loc[q] < 0)
          continue;
        stiff.push_back({loc[r], loc[q], a_coef * em.stiffness[r][q]});
        mass.push_back({loc[r], loc[q], kappa * em.mass[r][q]});
      }
    }
  }
  LocalOperators ops;
  ops.stiffness = SparseMatrix::from_triplets(n, n, stiff);
  ops.mass_kappa = SparseMatrix::from_triplets(n, n, mass);
  ops.operator_matrix = SparseMatrix::linear_combination(1.0, ops.stiffness, -1.0, ops.mass_kappa);
  ops.weights = s.pou_weights;
  ops.pou_weighted = ops.stiffness.scaled(ops.weights, ops.weights);
  return ops;
}

Pencil build_pencil(const LocalOperators &ops, CoarseKind kind)
{
  return Pencil{kind == CoarseKind::DeltaGenEO ? ops.stiffness : ops.operator_matrix, ops.pou_weighted};
}

EigenPairSet select_modes(const EigenPairSet &pairs, double lambda_max)
{
  EigenPairSet out;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < pairs.values.size(); ++i) {
    if (pairs.values[i] < lambda_max) {
      out.values.push_back(pairs.values[i]);
      keep.push_back(static_cast<Eigen::Index>(i));
    }
  }
  out.vectors.resize(pairs.vectors.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    out.vectors.col(static_cast<Eigen::Index>(c)) = pairs.vectors.col(keep[c]);
  return out;
}

// ---------------------------------------------------------------------------------------------

DenseMatrix blockwise_galerkin_product(const Decomposition &d, const std::vector<DenseMatrix> &blocks,
                                       const SparseMatrix &b)
{
  const int nsub = d.count();
  std::vector<int> offsets(static_cast<std::size_t>(nsub) + 1, 0);
  for (int j = 0; j < nsub; ++j)
    offsets[j + 1] = offsets[j] + static_cast<int>(blocks[static_cast<std::size_t>(j)].cols());
  const int m = offsets.back();
  DenseMatrix b0 = DenseMatrix::Zero(m, m);
  if (m == 0)
    return b0;

  // dof -> (subdomain, local index) for every subdomain containing it
  const int n = d.global_dofs;
  std::vector<int> owner_offsets(static_cast<std::size_t>(n) + 1, 0);
  for (const auto &s : d.subdomains)
    for (int g : s.overlapping_dofs)
      ++owner_offsets[g + 1];
  for (int i = 0; i < n; ++i)
    owner_offsets[i + 1] += owner_offsets[i];
  std::vector<std::pair<int, int>> owners(static_cast<std::size_t>(owner_offsets.back()));
  {
    std::vector<int> fill(owner_offsets.begin(), owner_offsets.end() - 1);
    for (const auto &s : d.subdomains)
      for (int k = 0; k < s.size(); ++k) {
        const int g = s.overlapping_dofs[static_cast<std::size_t>(k)];
        owners[static_cast<std::size_t>(fill[g]++)] = {s.id, k};
      }
  }

  const SparseMatrix bt = b.transpose();
  const auto bt_off = bt.row_offsets();
  const auto bt_col = bt.col_indices();
  const auto bt_val = bt.values();
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  std::vector<int> rows;
  std::vector<double> y;

  for (int k = 0; k < nsub; ++k) {
    const DenseMatrix &zk = blocks[static_cast<std::size_t>(k)];
    const int mk = static_cast<int>(zk.cols());
    if (mk == 0)
      continue;
    const Subdomain &sk = d.subdomains[static_cast<std::size_t>(k)];
    rows.clear();
    y.clear();
    // Y = B R_k^T Z_k, stored only on the rows it touches.
    for (int a = 0; a < sk.size(); ++a) {
      const int g = sk.overlapping_dofs[static_cast<std::size_t>(a)];
      for (int t = bt_off[g]; t < bt_off[g + 1]; ++t) {
        const int r = bt_col[t];
        if (pos[r] < 0) {
          pos[r] = static_cast<int>(rows.size());
          rows.push_back(r);
          y.resize(y.size() + static_cast<std::size_t>(mk), 0.0);
        }
        double *yr = y.data() + static_cast<std::size_t>(pos[r]) * mk;
        for (int c = 0; c < mk; ++c)
          yr[c] += bt_val[t] * zk(a, c);
      }
    }
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const int r = rows[t];
      const Eigen::Map<const Eigen::RowVectorXd> yrow(y.data() + t * static_cast<std::size_t>(mk), mk);
      for (int o = owner_offsets[r]; o < owner_offsets[r + 1]; ++o) {
        const auto [j, loc] = owners[static_cast<std::size_t>(o)];
        const DenseMatrix &zj = blocks[static_cast<std::size_t>(j)];
        if (zj.cols() == 0)
          continue;
        b0.block(offsets[j], offsets[k], zj.cols(), mk).noalias() += zj.row(loc).transpose() * yrow;
      }
      pos[r] = -1;
    }
  }
  return b0;
}

void CoarseSpace::finalize(const Decomposition &d, const SparseMatrix &b)
{
  offsets_.assign(blocks_.size() + 1, 0);
  for (std::size_t j = 0; j < blocks_.size(); ++j)
    offsets_[j + 1] = offsets_[j] + static_cast<int>(blocks_[j].cols());
  coarse_matrix_ = blockwise_galerkin_product(d, blocks_, b);
  if (dimension() == 0) {
    coarse_lu_.reset();
    return;
  }
  auto lu = std::make_shared<Eigen::PartialPivLU<DenseMatrix>>(coarse_matrix_);
  const auto &lu_mat = lu->matrixLU();
  const Vector piv = lu_mat.diagonal().cwiseAbs();
  Eigen::Index imin = 0;
  const double pmin = piv.minCoeff(&imin);
  const double pmax = piv.maxCoeff();
  if (!(pmin > 1e-14 * pmax))
    throw Error(ErrorCode::CoarseSingular, "coarse matrix of dimension " + std::to_string(dimension()) +
                                               " has pivot " + std::to_string(pmin) + " at position " +
                                               std::to_string(imin) + " (largest pivot " + std::to_string(pmax) + ")");
  coarse_lu_ = std::move(lu);
}

EigenPairSet solve_local_modes(const MeshGrid &mesh, const CoefficientField &field, const Decomposition &d, int j,
                               CoarseKind kind, const CoarseSpaceOptions &opts)
{
  const LocalOperators ops = assemble_local(mesh, field, d, j);
  const Pencil pencil = build_pencil(ops, kind);
  try {
    if (opts.solver == EigenSolverChoice::Dense)
      return select_modes(solve_pencil_dense(pencil, opts.dense_limit), opts.lambda_max);
    return solve_pencil_below(pencil, opts.lambda_max, opts.shift_invert);
  }
  catch (const Error &e) {
    throw Error(e.code(), "subdomain " + std::to_string(j) + ": " + e.what());
  }
}

CoarseSpace build_coarse_space(const MeshGrid &mesh, const CoefficientField &field, const Decomposition &d,
                               CoarseKind kind, const SparseMatrix &b, const CoarseSpaceOptions &opts)
{
  CoarseSpace cs;
  cs.kind_ = kind;
  cs.lambda_max_ = opts.lambda_max;
  cs.blocks_.resize(static_cast<std::size_t>(d.count()));
  cs.eigenvalues_.resize(static_cast<std::size_t>(d.count()));
  cs.eigenvectors_.resize(static_cast<std::size_t>(d.count()));

  for (int j = 0; j < d.count(); ++j) {
    EigenPairSet modes = solve_local_modes(mesh, field, d, j, kind, opts);
    const auto &weights = d.at(j).pou_weights;
    DenseMatrix block(modes.vectors.rows(), static_cast<Eigen::Index>(modes.size()));
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      Vector col = modes.vectors.col(c);
      for (Eigen::Index i = 0; i < col.size(); ++i)
        col[i] *= weights[static_cast<std::size_t>(i)];
      block.col(c) = col / col.norm();
    }
    cs.blocks_[static_cast<std::size_t>(j)] = std::move(block);
    cs.eigenvalues_[static_cast<std::size_t>(j)] = modes.values;
    if (opts.keep_eigenvectors)
      cs.eigenvectors_[static_cast<std::size_t>(j)] = std::move(modes.vectors);
  }
  cs.finalize(d, b);
  return cs;
}

CoarseSpace coarse_space_from_blocks(const Decomposition &d, CoarseKind kind, std::vector<DenseMatrix> blocks,
                                     const SparseMatrix &b)
{
  if (static_cast<int>(blocks.size()) != d.count())
    throw Error(ErrorCode::DimensionMismatch, "one basis block per subdomain required");
  for (int j = 0; j < d.count(); ++j)
    if (blocks[static_cast<std::size_t>(j)].rows() != d.subdomains[static_cast<std::size_t>(j)].size())
      throw Error(ErrorCode::DimensionMismatch, "basis block " + std::to_string(j) + " has wrong row count");
  CoarseSpace cs;
  cs.kind_ = kind;
  cs.blocks_ = std::move(blocks);
  cs.eigenvalues_.resize(cs.blocks_.size());
  cs.eigenvectors_.resize(cs.blocks_.size());
  cs.finalize(d, b);
  return cs;
}

Vector CoarseSpace::restrict(const Decomposition &d, const Vector &r) const
{
  Vector c(dimension());
  for (int j = 0; j < subdomain_count(); ++j) {
    const DenseMatrix &z = blocks_[static_cast<std::size_t>(j)];
    if (z.cols() == 0)
      continue;
    c.segment(offset(j), z.cols()).noalias() = z.transpose() * restrict_to(d, j, r);
  }
  return c;
}

void CoarseSpace::prolong_add(const Decomposition &d, const Vector &c, Vector &y) const
{
  if (c.size() != dimension())
    throw Error(ErrorCode::DimensionMismatch, "coarse vector has wrong dimension");
  for (int j = 0; j < subdomain_count(); ++j) {
    const DenseMatrix &z = blocks_[static_cast<std::size_t>(j)];
    if (z.cols() == 0)
      continue;
    extend_add(d, j, z * c.segment(offset(j), z.cols()), y);
  }
}

Vector CoarseSpace::prolong(const Decomposition &d, const Vector &c) const
{
  Vector y = Vector::Zero(d.global_dofs);
  prolong_add(d, c, y);
  return y;
}

Vector CoarseSpace::coarse_solve(const Vector &c) const
{
  if (dimension() == 0)
    return Vector(0);
  return coarse_lu_->solve(c);
}

Vector CoarseSpace::apply_correction(const Decomposition &d, const Vector &r) const
{
  if (dimension() == 0)
    return Vector::Zero(r.size());
  return prolong(d, coarse_solve(restrict(d, r)));
}

DenseMatrix CoarseSpace::dense_basis(const Decomposition &d) const
{
  DenseMatrix r0t = DenseMatrix::Zero(d.global_dofs, dimension());
  for (int j = 0; j < subdomain_count(); ++j) {
    const Subdomain &s = d.at(j);
    const DenseMatrix &z = blocks_[static_cast<std::size_t>(j)];
    for (int k = 0; k < s.size(); ++k)
      for (Eigen::Index c = 0; c < z.cols(); ++c)
        r0t(s.overlapping_dofs[static_cast<std::size_t>(k)], offset(j) + c) = z(k, c);
  }
  return r0t;
}

// ---------------------------------------------------------------------------------------------

int midline_sign_changes(const MeshGrid &mesh, const Decomposition &d, int j, const Vector &local)
{
  const Subdomain &s = d.at(j);
  if (local.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch, "local vector does not match subdomain size");
  const double vmax = local.cwiseAbs().maxCoeff();
  if (vmax == 0.0)
    return 0;
  const int row = (s.cell_begin[1] + s.cell_end[1]) / 2;
  int changes = 0;
  int last_sign = 0;
  for (int i = s.cell_begin[0] - 1; i <= s.cell_end[0] + 1; ++i) {
    if (i < 0 || i >= mesh.n_glob())
      continue;
    const int dof = mesh.node_to_dof(mesh.node_id(i, row));
    const int loc = dof < 0 ? -1 : s.local_index(dof);
    if (loc < 0)
      continue;
    const double v = local[loc];
    if (std::abs(v) < 1e-2 * vmax)
      continue;
    const int sign = v > 0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign)
      ++changes;
    last_sign = sign;
  }
  return changes;
}

void export_eigenfunction(const CoarseSpace &cs, const Decomposition &d, const MeshGrid &mesh, int j, int l,
                          const std::filesystem::path &path)
{
  const DenseMatrix &vecs = cs.eigenvectors(j);
  if (l < 0 || l >= cs.mode_count(j) || vecs.cols() != cs.mode_count(j))
    throw Error(ErrorCode::IndexOutOfRange, "eigenfunction " + std::to_string(l) + " of subdomain " +
                                                std::to_string(j) + " not available (" +
                                                std::to_string(vecs.cols()) + " stored)");
  write_local_grid(mesh, d, j, vecs.col(l), path);
}

void write_local_grid(const MeshGrid &mesh, const Decomposition &d, int j, const Vector &local,
                      const std::filesystem::path &path)
{
  const Subdomain &s = d.at(j);
  if (local.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch, "local vector does not match subdomain size");
  const int n = mesh.n_glob();
  const int i0 = std::max(0, s.cell_begin[0] - 1);
  const int i1 = std::min(n - 1, s.cell_end[0] + 1);
  const int j0 = std::max(0, s.cell_begin[1] - 1);
  const int j1 = std::min(n - 1, s.cell_end[1] + 1);

  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  out << std::setprecision(12);
  for (int y = j1; y >= j0; --y) {
    for (int x = i0; x <= i1; ++x) {
      const int dof = mesh.node_to_dof(mesh.node_id(x, y));
      const int loc = dof < 0 ? -1 : s.local_index(dof);
      out << (x > i0 ? " " : "") << (loc < 0 ? 0.0 : local[loc]);
    }
    out << '\n';
  }
  if (!out)
    throw Error(ErrorCode::IOError, "write to " + path.string() + " failed");
}

void write_coarse_summary(const CoarseSpace &cs, const std::filesystem::path &path)
{
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  out << "subdomain,modes,eigenvalues\n" << std::setprecision(12);
  for (int j = 0; j < cs.subdomain_count(); ++j) {
    out << j << ',' << cs.mode_count(j) << ',';
    const auto &ev = cs.selected_eigenvalues(j);
    for (std::size_t i = 0; i < ev.size(); ++i)
      out << (i ? ";" : "") << ev[i];
    out << '\n';
  }
}

} // namespace geneo
