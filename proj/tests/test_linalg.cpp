#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "geneo/error.hpp"
#include "geneo/factorization.hpp"
#include "geneo/sparse_matrix.hpp"

using namespace geneo;

namespace {

DenseMatrix random_dense(int rows, int cols, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = u(rng);
  return m;
}

Vector random_vector(int n, std::mt19937_64 &rng)
{
  return random_dense(n, 1, rng).col(0);
}

// Textbook Gaussian elimination with partial pivoting.
Vector gauss_solve(DenseMatrix a, Vector b)
{
  const int n = static_cast<int>(a.rows());
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k)))
        p = i;
    a.row(k).swap(a.row(p));
    std::swap(b[k], b[p]);
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j)
        a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j)
      s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

SparseMatrix random_sparse_symmetric(int n, double density, bool dominant, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<Triplet> t;
  std::vector<double> rowsum(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (keep(rng)) {
        const double v = u(rng);
        t.push_back({i, j, v});
        t.push_back({j, i, v});
        rowsum[i] += std::abs(v);
        rowsum[j] += std::abs(v);
      }
  for (int i = 0; i < n; ++i)
    t.push_back({i, i, dominant ? rowsum[i] + 1.0 : u(rng)});
  return SparseMatrix::from_triplets(n, n, t);
}

} // namespace

TEST_CASE("csr invariants after triplet assembly")
{
  const std::vector<Triplet> t{{1, 2, 1.0}, {0, 0, 2.0}, {1, 0, 3.0}, {1, 2, 4.0}, {0, 1, -1.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 3, t);
  CHECK(m.nnz() == 4);
  CHECK(m.coeff(1, 2) == 5.0);
  CHECK(m.coeff(1, 1) == 0.0);
  const auto off = m.row_offsets();
  const auto col = m.col_indices();
  REQUIRE(off.size() == 3);
  CHECK(off.back() == 4);
  for (int i = 0; i < 2; ++i)
    for (int k = off[i] + 1; k < off[i + 1]; ++k)
      CHECK(col[k - 1] < col[k]);
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, std::vector<Triplet>{{2, 0, 1.0}}), Error);
}

TEST_CASE("from_csr rejects unsorted columns")
{
  CHECK_THROWS_AS(SparseMatrix::from_csr(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), Error);
  CHECK_NOTHROW(SparseMatrix::from_csr(1, 3, {0, 2}, {1, 2}, {1.0, 1.0}));
}

TEST_CASE("spmv")
{
  const Vector v = (Vector(2) << 3, 4).finished();
  CHECK((spmv(SparseMatrix::identity(2), v) - v).norm() == 0.0);
  const std::vector<double> d{1, 2};
  const Vector y = spmv(SparseMatrix::diagonal(d), Vector::Ones(2));
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 2.0);

  std::mt19937_64 rng(7);
  const DenseMatrix dense = random_dense(20, 20, rng);
  const SparseMatrix s = SparseMatrix::from_dense(dense);
  const Vector x = random_vector(20, rng);
  Vector oracle = Vector::Zero(20);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j)
      oracle[i] += dense(i, j) * x[j];
  CHECK((spmv(s, x) - oracle).norm() <= 1e-14 * oracle.norm());

  try {
    (void)spmv(s, Vector::Ones(3));
    FAIL("expected DimensionMismatch");
  }
  catch (const Error &e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("transpose, submatrix, scaling, linear combination")
{
  std::mt19937_64 rng(11);
  const DenseMatrix a = random_dense(6, 5, rng);
  const SparseMatrix s = SparseMatrix::from_dense(a);
  CHECK((s.transpose().to_dense() - a.transpose()).norm() == 0.0);

  const std::vector<int> rows{1, 3, 4};
  const std::vector<int> cols{0, 4};
  const DenseMatrix sub = s.submatrix(rows, cols).to_dense();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(sub(i, j) == a(rows[i], cols[j]));

  const std::vector<double> l{1, 2, 3, 4, 5, 6};
  const std::vector<double> r{-1, 0, 1, 2, 0.5};
  const DenseMatrix sc = s.scaled(l, r).to_dense();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(sc(i, j) == doctest::Approx(l[i] * a(i, j) * r[j]).epsilon(1e-15));

  const DenseMatrix b = random_dense(6, 5, rng);
  const DenseMatrix lc = SparseMatrix::linear_combination(2.0, s, -3.0, SparseMatrix::from_dense(b)).to_dense();
  CHECK((lc - (2.0 * a - 3.0 * b)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("symmetry check")
{
  std::mt19937_64 rng(3);
  const SparseMatrix s = random_sparse_symmetric(30, 0.2, false, rng);
  CHECK(s.is_symmetric());
  CHECK(s.symmetry_defect() == 0.0);
  const SparseMatrix t = SparseMatrix::from_triplets(2, 2, std::vector<Triplet>{{0, 1, 1.0}, {1, 0, 2.0}});
  CHECK_FALSE(t.is_symmetric());
}

TEST_CASE("galerkin triple product")
{
  std::mt19937_64 rng(5);
  SUBCASE("identity basis reproduces the matrix")
  {
    const DenseMatrix b = random_dense(4, 4, rng);
    const DenseMatrix out = galerkin_triple_product(DenseMatrix::Identity(4, 4), SparseMatrix::from_dense(b));
    CHECK((out - b).norm() <= 1e-15);
  }
  SUBCASE("single unit column")
  {
    const std::vector<double> d{5, 7};
    const DenseMatrix out = galerkin_triple_product(DenseMatrix::Identity(2, 1), SparseMatrix::diagonal(d));
    REQUIRE(out.rows() == 1);
    CHECK(out(0, 0) == 5.0);
  }
  SUBCASE("triple-loop oracle")
  {
    const DenseMatrix r = random_dense(10, 3, rng);
    DenseMatrix b = random_dense(10, 10, rng);
    b = (b + b.transpose()).eval();
    const DenseMatrix out = galerkin_triple_product(r, SparseMatrix::from_dense(b));
    DenseMatrix oracle = DenseMatrix::Zero(3, 3);
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        for (int i = 0; i < 10; ++i)
          for (int j = 0; j < 10; ++j)
            oracle(p, q) += r(i, p) * b(i, j) * r(j, q);
    CHECK((out - oracle).cwiseAbs().maxCoeff() <= 1e-13 * oracle.cwiseAbs().maxCoeff());
    CHECK((out - out.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * out.cwiseAbs().maxCoeff());
  }
  CHECK_THROWS_AS(galerkin_triple_product(DenseMatrix::Identity(3, 1), SparseMatrix::identity(2)), Error);
}

TEST_CASE("factorization of small matrices")
{
  const Vector v = (Vector(3) << 1, 2, 3).finished();
  const auto id = Factorization::factorize(SparseMatrix::identity(3), true);
  CHECK((id.solve(v) - v).norm() <= 1e-15);

  const std::vector<double> d{2, 4};
  const auto diag = Factorization::factorize(SparseMatrix::diagonal(d), true);
  const Vector x = diag.solve(Vector((Vector(2) << 2, 4).finished()));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("factorization against Gaussian elimination")
{
  std::mt19937_64 rng(17);
  const SparseMatrix m = random_sparse_symmetric(50, 0.3, true, rng);
  const Vector v = random_vector(50, rng);
  const auto f = Factorization::factorize(m, true);
  const Vector x = f.solve(v);
  CHECK((m * x - v).norm() / v.norm() <= 1e-10);
  CHECK((x - gauss_solve(m.to_dense(), v)).norm() <= 1e-10 * x.norm());
  CHECK(f.probe_residual() <= Factorization::residual_tolerance);
  REQUIRE(f.inertia().has_value());
  CHECK(f.inertia()->positive == 50);
}

TEST_CASE("symmetric indefinite factorization and inertia")
{
  // Zero diagonal forces 2x2 pivoting in a Bunch-Kaufman setting.
  const DenseMatrix a = (DenseMatrix(3, 3) << 0, 1, 0, 1, 0, 2, 0, 2, 1).finished();
  const auto f = Factorization::factorize(SparseMatrix::from_dense(a), true);
  const Vector v = (Vector(3) << 1, -2, 0.5).finished();
  CHECK((a * f.solve(v) - v).norm() <= 1e-12);

  std::mt19937_64 rng(23);
  const SparseMatrix m = random_sparse_symmetric(40, 0.3, false, rng);
  const auto g = Factorization::factorize(m, true);
  const Vector w = random_vector(40, rng);
  CHECK((m * g.solve(w) - w).norm() / w.norm() <= 1e-10);
  if (g.inertia()) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m.to_dense());
    const int neg = static_cast<int>((es.eigenvalues().array() < 0).count());
    CHECK(g.inertia()->negative == neg);
  }
}

TEST_CASE("factorization errors")
{
  const SparseMatrix empty_row = SparseMatrix::from_triplets(2, 2, std::vector<Triplet>{{0, 0, 1.0}, {0, 1, 1.0}});
  try {
    (void)Factorization::factorize(empty_row, false, "probe");
    FAIL("expected StructurallySingular");
  }
  catch (const Error &e) {
    CHECK(e.code() == ErrorCode::StructurallySingular);
  }
  const DenseMatrix singular = (DenseMatrix(2, 2) << 1, 2, 2, 4).finished();
  try {
    (void)Factorization::factorize(SparseMatrix::from_dense(singular), true);
    FAIL("expected NumericallySingular");
  }
  catch (const Error &e) {
    CHECK(e.code() == ErrorCode::NumericallySingular);
  }
}
