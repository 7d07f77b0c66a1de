#include "geneo/gmres.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "geneo/error.hpp"

namespace geneo {

void GmresConfig::validate() const
{
  if (!(rtol > 0.0 && rtol < 1.0))
    throw Error(ErrorCode::InvalidArgument, "rtol must lie in (0, 1)");
  if (max_iters < 1)
    throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  if (restart && *restart < 1)
    throw Error(ErrorCode::InvalidArgument, "restart length must be at least 1");
  if (norm == GmresNorm::Energy && !energy_matrix)
    throw Error(ErrorCode::InvalidArgument, "energy norm requires the stiffness matrix");
}

double true_residual_check(const SparseMatrix &b, const Vector &f, const Vector &x)
{
  const double fn = f.norm();
  const Vector r = f - b * x;
  return fn > 0.0 ? r.norm() / fn : r.norm();
}

namespace {

class InnerProduct {
public:
  explicit InnerProduct(const SparseMatrix *a) : a_(a) {}
  double dot(const Vector &u, const Vector &v) const { return a_ ? u.dot(*a_ * v) : u.dot(v); }
  double norm(const Vector &u) const { return std::sqrt(std::max(0.0, dot(u, u))); }

private:
  const SparseMatrix *a_;
};

void givens(double a, double b, double &c, double &s)
{
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double r = std::hypot(a, b);
  c = a / r;
  s = b / r;
}

} // namespace

GmresResult gmres(const SparseMatrix &b, const Vector &f, const Preconditioner &p, const GmresConfig &cfg)
{
  cfg.validate();
  const int n = b.rows();
  if (b.cols() != n || f.size() != n || p.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "gmres: operator, right-hand side and preconditioner sizes differ");
  if (cfg.energy_matrix && cfg.energy_matrix->rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "gmres: energy matrix has wrong size");

  const auto t0 = std::chrono::steady_clock::now();
  const InnerProduct ip(cfg.norm == GmresNorm::Energy ? cfg.energy_matrix : nullptr);
  const bool right = cfg.orientation == GmresOrientation::Right;

  GmresResult out;
  out.solution = Vector::Zero(n);
  SolveReport &rep = out.report;
  Vector &x = out.solution;

  auto residual = [&](const Vector &xc) {
    Vector r = f - b * xc;
    return right ? r : p.apply(r);
  };

  Vector r = residual(x);
  const double r0 = ip.norm(r);
  rep.residual_history.push_back(1.0);
  if (r0 == 0.0) {
    rep.converged = true;
  }

  const int m_max = cfg.restart ? *cfg.restart : cfg.max_iters;
  double beta = r0;
  while (!rep.converged && rep.iterations < cfg.max_iters) {
    const int m = std::min(m_max, cfg.max_iters - rep.iterations);
    std::vector<Vector> v;
    v.reserve(static_cast<std::size_t>(m) + 1);
    v.push_back(r / beta);
    DenseMatrix h = DenseMatrix::Zero(m + 1, m);
    Vector g = Vector::Zero(m + 1);
    g[0] = beta;
    std::vector<double> cs(static_cast<std::size_t>(m));
    std::vector<double> sn(static_cast<std::size_t>(m));
    int k = 0;
    bool cycle_done = false;
    for (; k < m && !cycle_done; ++k) {
      Vector w = right ? Vector(b * p.apply(v[k])) : p.apply(b * v[k]);
      const double w_before = ip.norm(w);
      for (int i = 0; i <= k; ++i) {
        const double hij = ip.dot(v[i], w);
        h(i, k) += hij;
        w -= hij * v[i];
      }
      double w_norm = ip.norm(w);
      if (w_norm < w_before / std::sqrt(2.0)) {
        for (int i = 0; i <= k; ++i) {
          const double hij = ip.dot(v[i], w);
          h(i, k) += hij;
          w -= hij * v[i];
        }
        w_norm = ip.norm(w);
      }
      h(k + 1, k) = w_norm;

      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      givens(h(k, k), h(k + 1, k), cs[k], sn[k]);
      h(k, k) = cs[k] * h(k, k) + sn[k] * h(k + 1, k);
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      ++rep.iterations;
      const double rel = std::abs(g[k + 1]) / r0;
      rep.residual_history.push_back(rel);

      const bool invariant = w_norm <= 1e-14 * w_before;
      if (rel <= cfg.rtol || invariant) {
        rep.breakdown = invariant && rel > cfg.rtol;
        cycle_done = true;
      }
      else if (k + 1 < m) {
        v.push_back(w / w_norm);
      }
    }

    // y = H^{-1} g on the leading k x k triangle
    Vector y = g.head(k);
    for (int i = k - 1; i >= 0; --i) {
      for (int j = i + 1; j < k; ++j)
        y[i] -= h(i, j) * y[j];
      y[i] /= h(i, i);
    }
    Vector dx = Vector::Zero(n);
    for (int i = 0; i < k; ++i)
      dx += y[i] * v[static_cast<std::size_t>(i)];
    x += right ? p.apply(dx) : dx;

    r = residual(x);
    beta = ip.norm(r);
    const double rel = beta / r0;
    if (rel <= cfg.rtol) {
      rep.converged = true;
    }
    else if (rep.breakdown) {
      break;
    }
    // otherwise: restart, or continue after a drifted recurrence residual
  }

  rep.true_residual = true_residual_check(b, f, x);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_residual_history(const SolveReport &report, const std::filesystem::path &path)
{
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  out << "iteration,relative_residual\n" << std::setprecision(12);
  for (std::size_t i = 0; i < report.residual_history.size(); ++i)
    out << i << ',' << report.residual_history[i] << '\n';
  if (!out)
    throw Error(ErrorCode::IOError, "write to " + path.string() + " failed");
}

} // namespace geneo
