#include "geneo/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "geneo/error.hpp"
#include "geneo/factorization.hpp"

namespace geneo {

void Pencil::validate() const
{
  if (lhs.rows() != lhs.cols() || rhs.rows() != rhs.cols() || lhs.rows() != rhs.rows())
    throw Error(ErrorCode::DimensionMismatch, "pencil matrices must be square with identical dimension (got " +
                                                  std::to_string(lhs.rows()) + "x" + std::to_string(lhs.cols()) +
                                                  " and " + std::to_string(rhs.rows()) + "x" +
                                                  std::to_string(rhs.cols()) + ")");
}

double eigen_residual(const Pencil &p, double lambda, const Vector &x)
{
  const Vector r = p.lhs * x - lambda * (p.rhs * x);
  const double scale = (p.lhs.frobenius_norm() + std::abs(lambda) * p.rhs.frobenius_norm()) * x.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

// ---------------------------------------------------------------------------------------------
// Dense reference path
// ---------------------------------------------------------------------------------------------

EigenPairSet solve_pencil_dense(const Pencil &p, int limit)
{
  p.validate();
  const int n = p.dimension();
  if (n > limit)
    throw Error(ErrorCode::DimensionTooLarge, "dense pencil solve limited to " + std::to_string(limit) +
                                                  " unknowns, got " + std::to_string(n));
  EigenPairSet out;
  out.vectors.resize(n, 0);
  if (n == 0)
    return out;

  DenseMatrix k = p.lhs.to_dense();
  DenseMatrix m = p.rhs.to_dense();
  k = 0.5 * (k + k.transpose()).eval();
  m = 0.5 * (m + m.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<DenseMatrix> meig(m);
  const Vector mvals = meig.eigenvalues();
  const double mnorm = mvals.cwiseAbs().maxCoeff();
  if (mnorm == 0.0)
    return out;

  std::vector<int> range_idx;
  std::vector<int> null_idx;
  for (int i = 0; i < n; ++i)
    (mvals[i] > 1e-12 * mnorm ? range_idx : null_idx).push_back(i);

  const auto nr = static_cast<Eigen::Index>(range_idx.size());
  const auto n0 = static_cast<Eigen::Index>(null_idx.size());
  DenseMatrix ur(n, nr);
  DenseMatrix u0(n, n0);
  Vector lam_r(nr);
  for (Eigen::Index c = 0; c < nr; ++c) {
    ur.col(c) = meig.eigenvectors().col(range_idx[c]);
    lam_r[c] = mvals[range_idx[c]];
  }
  for (Eigen::Index c = 0; c < n0; ++c)
    u0.col(c) = meig.eigenvectors().col(null_idx[c]);

  DenseMatrix schur = ur.transpose() * k * ur;
  DenseMatrix back_sub; // maps range coordinates to null-space coordinates
  if (n0 > 0) {
    const DenseMatrix k00 = u0.transpose() * k * u0;
    const DenseMatrix k0r = u0.transpose() * k * ur;
    Eigen::FullPivLU<DenseMatrix> lu(k00);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
      throw Error(ErrorCode::SingularPencil, "lhs matrix is singular on the null space of the rhs matrix");
    back_sub = -lu.solve(k0r);
    schur += k0r.transpose() * back_sub;
  }

  const Vector inv_sqrt = lam_r.cwiseSqrt().cwiseInverse();
  DenseMatrix c = inv_sqrt.asDiagonal() * schur * inv_sqrt.asDiagonal();
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> ceig(c);

  const DenseMatrix y = inv_sqrt.asDiagonal() * ceig.eigenvectors();
  out.vectors = ur * y;
  if (n0 > 0)
    out.vectors += u0 * (back_sub * y);
  out.values.assign(ceig.eigenvalues().data(), ceig.eigenvalues().data() + nr);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Shift-invert path
// ---------------------------------------------------------------------------------------------

namespace {

struct Pair {
  double value;
  Vector x;   // full vector
  Vector xi;  // free part
  Vector mxi; // M_II * free part
};

class ShiftInvertSolver {
public:
  ShiftInvertSolver(const Pencil &p, const ShiftInvertOptions &opts) : p_(p), opts_(opts)
  {
    p.validate();
    const int n = p.dimension();
    const auto offsets = p.rhs.row_offsets();
    const auto vals = p.rhs.values();
    for (int i = 0; i < n; ++i) {
      bool nonzero = false;
      for (int k = offsets[i]; k < offsets[i + 1]; ++k)
        nonzero = nonzero || vals[k] != 0.0;
      (nonzero ? free_ : fixed_).push_back(i);
    }
    m_free_ = p.rhs.submatrix(free_, free_);

    if (!fixed_.empty()) {
      const SparseMatrix kff = p.lhs.submatrix(fixed_, fixed_);
      std::optional<Factorization> f;
      try {
        f.emplace(Factorization::factorize(kff, true, "lhs block on null(M)"));
      }
      catch (const Error &e) {
        throw Error(ErrorCode::SingularPencil, std::string("lhs is singular on null(M): ") + e.what());
      }
      bump_factorizations();
      if (!f->inertia() || f->near_singular())
        throw Error(ErrorCode::SingularPencil, "lhs block on null(M) is numerically singular");
      fixed_negative_ = f->inertia()->negative;
    }
  }

  int free_dim() const { return static_cast<int>(free_.size()); }

  struct Shifted {
    double sigma;
    int count_below; // finite eigenvalues < sigma
    std::optional<Factorization> fact;
  };

  /// Factorizes K - sigma M, nudging sigma in @p direction when the matrix is (nearly) singular.
  Shifted shifted(double sigma, double direction, bool keep_factor)
  {
    // Nudges grow tenfold per attempt so an exact eigenvalue at sigma is always escaped.
    double step = 1e-7 * std::max(1.0, std::abs(sigma));
    for (int attempt = 0; attempt <= opts_.shift_retries; ++attempt, step *= 10.0) {
      const double s = attempt == 0 ? sigma : sigma + direction * step;
      const SparseMatrix shifted_matrix = SparseMatrix::linear_combination(1.0, p_.lhs, -s, p_.rhs);
      try {
        Factorization f = Factorization::factorize(shifted_matrix, true, "shifted pencil");
        bump_factorizations();
        if (!f.inertia() || f.near_singular())
          continue;
        Shifted out{s, f.inertia()->negative - fixed_negative_, std::nullopt};
        if (keep_factor)
          out.fact.emplace(std::move(f));
        return out;
      }
      catch (const Error &e) {
        bump_factorizations();
        if (e.code() != ErrorCode::NumericallySingular && e.code() != ErrorCode::StructurallySingular)
          throw;
      }
    }
    throw Error(ErrorCode::ShiftSingular, "K - sigma M singular near sigma = " + std::to_string(sigma) + " after " +
                                              std::to_string(opts_.shift_retries) + " retries");
  }

  /// Finds eigenpairs in [lo, hi) until @p needed of them are known (locked ones included).
  void solve_window(const Shifted &center, double lo, double hi, int needed, std::vector<Pair> &locked)
  {
    int kmax_extra = 0;
    int stalled = 0;
    // Each round recovers at least one vector of a repeated eigenvalue, so allow one per target.
    for (int round = 0; round < 12 + needed; ++round) {
      const int have = static_cast<int>(
          std::count_if(locked.begin(), locked.end(), [&](const Pair &q) { return q.value >= lo && q.value < hi; }));
      const int missing = needed - have;
      if (missing <= 0)
        return;
      const int kmax = std::min(free_dim() - static_cast<int>(locked.size()), std::max(3 * missing + 30, 60) + kmax_extra);
      if (kmax <= 0)
        break;
      const int accepted = lanczos_round(center, lo, hi, missing, kmax, locked, round);
      if (opts_.stats)
        ++opts_.stats->rounds;
      if (accepted == 0) {
        kmax_extra = kmax_extra == 0 ? 60 : 2 * kmax_extra;
        if (++stalled > 4)
          break;
      }
    }
    const int have = static_cast<int>(
        std::count_if(locked.begin(), locked.end(), [&](const Pair &q) { return q.value >= lo && q.value < hi; }));
    if (have < needed)
      throw Error(ErrorCode::NoConvergence, "shift-invert Lanczos found " + std::to_string(have) + " of " +
                                                std::to_string(needed) + " eigenvalues in [" + std::to_string(lo) +
                                                ", " + std::to_string(hi) + ") (free dimension " +
                                                std::to_string(free_dim()) + ")");
  }

  EigenPairSet assemble(std::vector<Pair> pairs) const
  {
    std::sort(pairs.begin(), pairs.end(), [](const Pair &a, const Pair &b) { return a.value < b.value; });
    EigenPairSet out;
    out.vectors.resize(p_.dimension(), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t c = 0; c < pairs.size(); ++c) {
      out.values.push_back(pairs[c].value);
      out.vectors.col(static_cast<Eigen::Index>(c)) = pairs[c].x;
    }
    return out;
  }

private:
  Vector gather(const Vector &full) const
  {
    Vector v(free_dim());
    for (int i = 0; i < free_dim(); ++i)
      v[i] = full[free_[i]];
    return v;
  }

  Vector scatter_rhs(const Vector &y) const
  {
    const Vector my = m_free_ * y;
    Vector full = Vector::Zero(p_.dimension());
    for (int i = 0; i < free_dim(); ++i)
      full[free_[i]] = my[i];
    return full;
  }

  void bump_factorizations() const
  {
    if (opts_.stats)
      ++opts_.stats->factorizations;
  }

  /// Removes M-components along locked vectors (and the given basis columns).
  void orthogonalize(Vector &w, const std::vector<Pair> &locked, const DenseMatrix &basis, int cols) const
  {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto &q : locked)
        w -= q.mxi.dot(w) * q.xi;
      if (cols > 0) {
        const Vector mw = m_free_ * w;
        const Vector coeff = basis.leftCols(cols).transpose() * mw;
        w -= basis.leftCols(cols) * coeff;
      }
    }
  }

  int lanczos_round(const Shifted &center, double lo, double hi, int missing, int kmax, std::vector<Pair> &locked,
                    int round)
  {
    const Factorization &fact = *center.fact;
    const double sigma = center.sigma;
    const int r = free_dim();

    std::mt19937_64 rng(opts_.seed + 7919ULL * static_cast<std::uint64_t>(round) +
                        static_cast<std::uint64_t>(locked.size()));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(r);
    for (int i = 0; i < r; ++i)
      v[i] = dist(rng);

    DenseMatrix basis(r, kmax);
    std::vector<double> alpha;
    std::vector<double> beta;
    const DenseMatrix empty;
    orthogonalize(v, locked, empty, 0);
    double vnorm = std::sqrt(std::max(0.0, v.dot(m_free_ * v)));
    if (!(vnorm > 0.0))
      throw Error(ErrorCode::SingularPencil, "rhs matrix is not definite on its nonzero rows");
    basis.col(0) = v / vnorm;

    bool exhausted = false;
    int steps = 0;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> tri;
    double last_beta = 0.0;
    for (int k = 0; k < kmax; ++k) {
      const Vector vk = basis.col(k);
      Vector w = gather(fact.solve(scatter_rhs(vk)));
      const double a = (m_free_ * vk).dot(w);
      w -= a * vk;
      if (k > 0)
        w -= beta[k - 1] * basis.col(k - 1);
      orthogonalize(w, locked, basis, k + 1);
      const double b = std::sqrt(std::max(0.0, w.dot(m_free_ * w)));
      alpha.push_back(a);
      beta.push_back(b);
      steps = k + 1;
      last_beta = b;

      double tnorm = 0.0;
      for (int i = 0; i <= k; ++i)
        tnorm = std::max(tnorm, std::abs(alpha[i]) + (i > 0 ? beta[i - 1] : 0.0) + beta[i]);
      exhausted = b <= 1e-13 * tnorm || k + 1 == r - static_cast<int>(locked.size());

      const bool check = exhausted || k + 1 == kmax || (k + 1 >= std::min(missing, 10) && (k + 1) % 5 == 0);
      if (check) {
        compute_tridiagonal(tri, alpha, beta, steps);
        if (exhausted || k + 1 == kmax)
          break;
        if (count_converged(tri, sigma, lo, hi, b, steps) >= missing)
          break;
      }
      basis.col(k + 1) = w / b;
    }
    if (opts_.stats) {
      opts_.stats->lanczos_steps += steps;
      opts_.stats->max_subspace = std::max(opts_.stats->max_subspace, steps);
    }

    const double end_beta = exhausted ? 0.0 : last_beta;
    const DenseMatrix &s = tri.eigenvectors();
    int accepted = 0;
    for (int i = 0; i < steps; ++i) {
      const double theta = tri.eigenvalues()[i];
      if (theta == 0.0)
        continue;
      const double lambda = sigma + 1.0 / theta;
      if (!(lambda >= lo && lambda < hi))
        continue;
      const double est = std::abs(end_beta * s(steps - 1, i));
      if (est > 1e-6 * std::abs(theta))
        continue;

      const Vector y = basis.leftCols(steps) * s.col(i);
      // One inverse-iteration step purifies the null(M) components of the full vector.
      Vector x = fact.solve(scatter_rhs(y)) / theta;
      Pair cand{0.0, x, gather(x), Vector()};
      // M-orthogonalize against everything already known.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto &q : locked) {
          const double c = q.mxi.dot(cand.xi);
          cand.xi -= c * q.xi;
          cand.x -= c * q.x;
        }
      }
      cand.mxi = m_free_ * cand.xi;
      const double mnorm2 = cand.xi.dot(cand.mxi);
      const double mnorm2_before = gather(x).dot(m_free_ * gather(x));
      if (!(mnorm2 > 0.25 * mnorm2_before))
        continue; // duplicate of a locked vector
      const double inv = 1.0 / std::sqrt(mnorm2);
      cand.x *= inv;
      cand.xi *= inv;
      cand.mxi *= inv;
      cand.value = cand.x.dot(p_.lhs * cand.x); // Rayleigh quotient, x^T M x = 1
      if (!(cand.value >= lo && cand.value < hi))
        continue;
      if (eigen_residual(p_, cand.value, cand.x) > opts_.residual_tolerance)
        continue;
      locked.push_back(std::move(cand));
      ++accepted;
    }
    return accepted;
  }

  static void compute_tridiagonal(Eigen::SelfAdjointEigenSolver<DenseMatrix> &tri, const std::vector<double> &alpha,
                                  const std::vector<double> &beta, int steps)
  {
    Vector d(steps);
    Vector e(std::max(steps - 1, 0));
    for (int i = 0; i < steps; ++i)
      d[i] = alpha[i];
    for (int i = 0; i + 1 < steps; ++i)
      e[i] = beta[i];
    tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  }

  int count_converged(const Eigen::SelfAdjointEigenSolver<DenseMatrix> &tri, double sigma, double lo, double hi,
                      double b, int steps) const
  {
    int n = 0;
    for (int i = 0; i < steps; ++i) {
      const double theta = tri.eigenvalues()[i];
      if (theta == 0.0)
        continue;
      const double lambda = sigma + 1.0 / theta;
      if (lambda >= lo && lambda < hi && std::abs(b * tri.eigenvectors()(steps - 1, i)) <= opts_.ritz_tolerance * std::abs(theta))
        ++n;
    }
    return n;
  }

  const Pencil &p_;
  const ShiftInvertOptions &opts_;
  std::vector<int> free_;
  std::vector<int> fixed_;
  SparseMatrix m_free_;
  int fixed_negative_ = 0;
};

} // namespace

namespace {

/// All eigenpairs in [bottom.sigma, top.sigma), bisecting until every window holds a bounded count.
std::vector<Pair> slice_spectrum(ShiftInvertSolver &solver, const ShiftInvertSolver::Shifted &bottom,
                                 const ShiftInvertSolver::Shifted &top, const ShiftInvertOptions &opts)
{
  struct Window {
    double lo;
    int count_lo;
    double hi;
    int count_hi;
  };
  std::vector<Pair> all;
  std::vector<Window> stack{{bottom.sigma, bottom.count_below, top.sigma, top.count_below}};
  while (!stack.empty()) {
    const Window w = stack.back();
    stack.pop_back();
    const int count = w.count_hi - w.count_lo;
    if (count <= 0)
      continue;
    const double width = w.hi - w.lo;
    if (count > opts.max_window_count && width > 1e-8 * std::max(1.0, std::abs(w.hi))) {
      const auto mid = solver.shifted(w.lo + 0.5 * width, 1.0, false);
      if (mid.sigma > w.lo && mid.sigma < w.hi) {
        stack.push_back({mid.sigma, mid.count_below, w.hi, w.count_hi});
        stack.push_back({w.lo, w.count_lo, mid.sigma, mid.count_below});
        continue;
      }
    }
    auto center = solver.shifted(w.lo + 0.45 * width, 1.0, true);
    if (!(center.sigma > w.lo && center.sigma < w.hi))
      center = solver.shifted(w.lo + 0.45 * width, -1.0, true);
    std::vector<Pair> local;
    solver.solve_window(center, w.lo, w.hi, count, local);
    for (auto &q : local)
      if (q.value >= w.lo && q.value < w.hi)
        all.push_back(std::move(q));
  }
  return all;
}

} // namespace

EigenPairSet solve_pencil_shift_invert(const Pencil &p, int target_count, double shift, const ShiftInvertOptions &opts)
{
  ShiftInvertSolver solver(p, opts);
  if (target_count <= 0 || solver.free_dim() == 0)
    return solver.assemble({});

  const auto base = solver.shifted(shift, -1.0, false);
  target_count = std::min(target_count, solver.free_dim() - base.count_below);
  if (target_count <= 0)
    return solver.assemble({});

  // Grow an upper bound until it encloses target_count eigenvalues.
  double step = std::max(1.0, std::abs(base.sigma));
  auto top = solver.shifted(base.sigma + step, 1.0, false);
  for (int it = 0; top.count_below - base.count_below < target_count; ++it) {
    if (it > 60)
      throw Error(ErrorCode::NoConvergence, "could not enclose " + std::to_string(target_count) + " eigenvalues above " +
                                                std::to_string(base.sigma));
    step *= 4.0;
    top = solver.shifted(base.sigma + step, 1.0, false);
  }
  auto found = slice_spectrum(solver, base, top, opts);
  std::sort(found.begin(), found.end(), [](const Pair &a, const Pair &b) { return a.value < b.value; });
  // Keep the target count, plus any copies of the last kept eigenvalue.
  std::size_t keep = static_cast<std::size_t>(target_count);
  const double last = found[keep - 1].value;
  while (keep < found.size() && found[keep].value - last <= 1e-10 * std::max(1.0, std::abs(last)))
    ++keep;
  found.resize(keep);
  return solver.assemble(std::move(found));
}

EigenPairSet solve_pencil_below(const Pencil &p, double threshold, const ShiftInvertOptions &opts)
{
  ShiftInvertSolver solver(p, opts);
  if (solver.free_dim() == 0)
    return solver.assemble({});

  auto top = solver.shifted(threshold, -1.0, false);
  if (top.count_below == 0)
    return solver.assemble({});

  double step = std::max(1.0, std::abs(threshold));
  auto bottom = solver.shifted(threshold - step, -1.0, false);
  for (int it = 0; bottom.count_below > 0; ++it) {
    if (it > 60)
      throw Error(ErrorCode::NoConvergence, "could not bracket the smallest eigenvalue");
    step *= 4.0;
    bottom = solver.shifted(threshold - step, -1.0, false);
  }
  return solver.assemble(slice_spectrum(solver, bottom, top, opts));
}

} // namespace geneo
