#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "geneo/error.hpp"
#include "geneo/gmres.hpp"

using namespace geneo;

namespace {

void check_monotone(const SolveReport &r)
{
  REQUIRE(!r.residual_history.empty());
  CHECK(r.residual_history.front() == 1.0);
  for (std::size_t i = 1; i < r.residual_history.size(); ++i)
    CHECK(r.residual_history[i] <= r.residual_history[i - 1] + 1e-12);
}

struct Problem {
  MeshGrid mesh;
  DiscreteSystem sys;
  Decomposition d;
  Problem(int n, int nsub, CoefficientField f) : mesh(n), sys(assemble(mesh, f)), d(build_decomposition(mesh, nsub)) {}
};

} // namespace

TEST_CASE("identity system")
{
  const SparseMatrix id = SparseMatrix::identity(5);
  const Vector f = (Vector(5) << 1, 2, 3, 4, 5).finished();
  const auto res = gmres(id, f, IdentityPreconditioner(5));
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 1);
  CHECK((res.solution - f).norm() <= 1e-14);
}

TEST_CASE("exact preconditioner")
{
  const Problem p(20, 1, {LayerProfile::AlternatingLayers, 10.0, 100.0});
  GmresConfig cfg;
  cfg.rtol = 1e-12;
  const auto res = gmres(p.sys.operator_matrix, p.sys.load, ExactPreconditioner(p.sys.operator_matrix), cfg);
  CHECK(res.report.converged);
  CHECK(res.report.iterations <= 2);
  CHECK(true_residual_check(p.sys.operator_matrix, p.sys.load, res.solution) <= 1e-12);
}

TEST_CASE("true residual check")
{
  const Problem p(15, 1, {LayerProfile::Homogeneous, 1.0, 5.0});
  const Vector x = ExactPreconditioner(p.sys.operator_matrix).apply(p.sys.load);
  CHECK(true_residual_check(p.sys.operator_matrix, p.sys.load, x) <= 1e-12);
  CHECK(true_residual_check(p.sys.operator_matrix, p.sys.load, Vector::Zero(x.size())) == 1.0);
}

TEST_CASE("unpreconditioned indefinite problem: monotone history and agreement of orientations")
{
  const Problem p(21, 4, {LayerProfile::IncreasingLayers, 10.0, 200.0});
  const SchwarzPreconditioner m(p.sys.operator_matrix, p.d, {LocalVariant::AS, CoarseVariant::None, {}});
  GmresConfig right;
  right.rtol = 1e-10;
  GmresConfig left = right;
  left.orientation = GmresOrientation::Left;
  const auto a = gmres(p.sys.operator_matrix, p.sys.load, m, right);
  const auto b = gmres(p.sys.operator_matrix, p.sys.load, m, left);
  REQUIRE(a.report.converged);
  REQUIRE(b.report.converged);
  check_monotone(a.report);
  check_monotone(b.report);
  CHECK((a.solution - b.solution).norm() <= 1e-8 * a.solution.norm());
  CHECK(a.report.true_residual <= 1e-10);

  const auto plain = gmres(p.sys.operator_matrix, p.sys.load, IdentityPreconditioner(p.mesh.dof_count()));
  CHECK(plain.report.converged);
  check_monotone(plain.report);
  CHECK(plain.report.iterations > a.report.iterations);
}

TEST_CASE("restarted GMRES converges and reports progress")
{
  const Problem p(21, 4, {LayerProfile::Homogeneous, 1.0, 0.0});
  GmresConfig cfg;
  cfg.restart = 5;
  const auto res = gmres(p.sys.operator_matrix, p.sys.load, IdentityPreconditioner(p.mesh.dof_count()), cfg);
  CHECK(res.report.converged);
  check_monotone(res.report);
  CHECK(res.report.true_residual <= 1e-6);
}

TEST_CASE("iteration limit")
{
  const Problem p(21, 1, {LayerProfile::Homogeneous, 1.0, 0.0});
  GmresConfig cfg;
  cfg.max_iters = 3;
  const auto res = gmres(p.sys.operator_matrix, p.sys.load, IdentityPreconditioner(p.mesh.dof_count()), cfg);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.iterations == 3);
  CHECK(res.report.residual_history.size() == 4u);
  CHECK(res.report.true_residual < 1.0);
}

TEST_CASE("energy inner product")
{
  const Problem p(25, 9, {LayerProfile::AlternatingLayers, 5.0, 50.0});
  const auto cs = std::make_shared<const CoarseSpace>(
      build_coarse_space(p.mesh, {LayerProfile::AlternatingLayers, 5.0, 50.0}, p.d, CoarseKind::DeltaGenEO,
                         p.sys.operator_matrix));
  const SchwarzPreconditioner m(p.sys.operator_matrix, p.d, {LocalVariant::AS, CoarseVariant::Additive, cs});
  GmresConfig cfg;
  cfg.norm = GmresNorm::Energy;
  cfg.orientation = GmresOrientation::Left;
  cfg.energy_matrix = &p.sys.stiffness;
  cfg.rtol = 1e-8;
  const auto res = gmres(p.sys.operator_matrix, p.sys.load, m, cfg);
  CHECK(res.report.converged);
  check_monotone(res.report);
  // recompute the final preconditioned energy residual
  const Vector r = m.apply(p.sys.load - p.sys.operator_matrix * res.solution);
  const Vector r0 = m.apply(p.sys.load);
  const double rel = std::sqrt(r.dot(p.sys.stiffness * r) / r0.dot(p.sys.stiffness * r0));
  CHECK(rel == doctest::Approx(res.report.residual_history.back()).epsilon(1e-4));

  GmresConfig bad = cfg;
  bad.energy_matrix = nullptr;
  CHECK_THROWS_AS(gmres(p.sys.operator_matrix, p.sys.load, m, bad), Error);
}

TEST_CASE("zero right-hand side")
{
  const auto res = gmres(SparseMatrix::identity(4), Vector::Zero(4), IdentityPreconditioner(4));
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 0);
  CHECK(res.solution.norm() == 0.0);
}

TEST_CASE("residual history file")
{
  SolveReport r;
  r.residual_history = {1.0, 0.5, 0.01};
  const auto path = std::filesystem::temp_directory_path() / "geneo_residual_test.csv";
  write_residual_history(r, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line))
    ++lines;
  CHECK(lines == 4);
  std::filesystem::remove(path);
}

TEST_CASE("configuration validation")
{
  GmresConfig cfg;
  cfg.rtol = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.rtol = 1e-6;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
