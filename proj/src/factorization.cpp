#include "geneo/factorization.hpp"

#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "geneo/error.hpp"

namespace geneo {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct Factorization::Impl {
  std::unique_ptr<Eigen::SimplicialLDLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt;
  std::unique_ptr<Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>> lu;

  Vector solve(const Vector &rhs) const { return ldlt ? Vector(ldlt->solve(rhs)) : Vector(lu->solve(rhs)); }
};

namespace {

std::string with_label(const std::string &label, const std::string &msg)
{
  return label.empty() ? msg : label + ": " + msg;
}

double probe(const SparseMatrix &m, const Factorization::Impl &impl)
{
  std::mt19937_64 rng(0x5eed'fac7ULL + static_cast<unsigned>(m.rows()));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(m.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = dist(rng);
  const Vector x = impl.solve(v);
  if (!x.allFinite())
    return std::numeric_limits<double>::infinity();
  return (m * x - v).norm() / v.norm();
}

} // namespace

Factorization::Factorization(Factorization &&) noexcept = default;
Factorization &Factorization::operator=(Factorization &&) noexcept = default;
Factorization::~Factorization() = default;

Factorization Factorization::factorize(const SparseMatrix &m, bool symmetric_indefinite, const std::string &label)
{
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, with_label(label, "cannot factorize a non-square matrix"));

  Factorization f;
  f.size_ = m.rows();
  f.impl_ = std::make_unique<Impl>();
  if (m.rows() == 0)
    return f;
  if (m.has_empty_row_or_column())
    throw Error(ErrorCode::StructurallySingular, with_label(label, "matrix has an empty row or column"));

  const EigenSparse a = m.to_eigen();

  if (symmetric_indefinite) {
    auto ldlt = std::make_unique<Eigen::SimplicialLDLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>>>();
    ldlt->compute(a);
    if (ldlt->info() == Eigen::Success) {
      const Vector d = ldlt->vectorD();
      const double dmax = d.cwiseAbs().maxCoeff();
      const double dmin = d.cwiseAbs().minCoeff();
      Inertia in;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0)
          ++in.negative;
        else if (d[i] > 0.0)
          ++in.positive;
        else
          ++in.zero;
      }
      f.impl_->ldlt = std::move(ldlt);
      f.probe_residual_ = probe(m, *f.impl_);
      if (d.allFinite() && dmin > pivot_tolerance * dmax && f.probe_residual_ <= residual_tolerance) {
        f.method_ = Method::LDLT;
        f.symmetric_ = true;
        f.inertia_ = in;
        return f;
      }
      f.near_singular_ = !(dmin > pivot_tolerance * dmax);
      f.impl_->ldlt.reset();
    }
    else {
      f.near_singular_ = true;
    }
  }

  auto lu = std::make_unique<Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>>>();
  lu->analyzePattern(a);
  lu->factorize(a);
  if (lu->info() != Eigen::Success)
    throw Error(ErrorCode::NumericallySingular, with_label(label, "pivot breakdown in sparse LU: " + lu->lastErrorMessage()));
  f.impl_->lu = std::move(lu);
  f.method_ = Method::LU;
  f.symmetric_ = symmetric_indefinite;
  f.probe_residual_ = probe(m, *f.impl_);
  if (!(f.probe_residual_ <= residual_tolerance))
    throw Error(ErrorCode::NumericallySingular,
                with_label(label, "residual probe failed after LU fallback (relative residual " +
                                      std::to_string(f.probe_residual_) + ")"));
  return f;
}

Vector Factorization::solve(const Vector &rhs) const
{
  if (rhs.size() != size_)
    throw Error(ErrorCode::DimensionMismatch, "solve: right-hand side has " + std::to_string(rhs.size()) +
                                                  " entries, factorization has size " + std::to_string(size_));
  if (size_ == 0)
    return rhs;
  return impl_->solve(rhs);
}

DenseMatrix Factorization::solve(const DenseMatrix &rhs) const
{
  DenseMatrix x(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c)
    x.col(c) = solve(Vector(rhs.col(c)));
  return x;
}

} // namespace geneo
