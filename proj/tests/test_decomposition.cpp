#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "geneo/decomposition.hpp"
#include "geneo/error.hpp"

using namespace geneo;

namespace {

Vector random_vector(int n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (auto &x : v)
    x = u(rng);
  return v;
}

} // namespace

TEST_CASE("single subdomain")
{
  const MeshGrid mesh(7);
  const auto d = build_decomposition(mesh, 1);
  REQUIRE(d.count() == 1);
  const auto &s = d.at(0);
  CHECK(s.size() == mesh.dof_count());
  CHECK(static_cast<int>(s.internal_local.size()) == mesh.dof_count());
  for (double w : s.pou_weights)
    CHECK(w == 1.0);
  const Vector v = random_vector(mesh.dof_count(), 1);
  CHECK((restrict_to(d, 0, v) - v).norm() == 0.0);
  CHECK((apply_pou(d, 0, v) - v).norm() == 0.0);
}

TEST_CASE("four subdomains on a 9-point grid")
{
  const MeshGrid mesh(9);
  const auto d = build_decomposition(mesh, 4);
  REQUIRE(d.count() == 4);
  std::set<double> weights;
  for (const auto &s : d.subdomains)
    for (int loc : s.internal_local)
      weights.insert(s.pou_weights[loc]);
  CHECK(weights.count(1.0) == 1);
  CHECK(weights.count(0.5) == 1);

  // Explicit sum of R_j^T D_j R_j is the identity.
  DenseMatrix sum = DenseMatrix::Zero(mesh.dof_count(), mesh.dof_count());
  for (const auto &s : d.subdomains)
    for (int k = 0; k < s.size(); ++k)
      sum(s.overlapping_dofs[k], s.overlapping_dofs[k]) += s.pou_weights[k];
  CHECK((sum - DenseMatrix::Identity(mesh.dof_count(), mesh.dof_count())).cwiseAbs().maxCoeff() == 0.0);

  // Block of subdomain 0 is cells [0,4)^2; dof at node (4,4) is shared by the
  // extended subdomains but internal only where all six triangles are present.
  const int corner_dof = mesh.node_to_dof(mesh.node_id(4, 4));
  CHECK(d.multiplicity[corner_dof] >= 1);
  for (const auto &s : d.subdomains)
    CHECK(s.local_index(corner_dof) >= 0);
}

TEST_CASE("partition of unity identity on random vectors")
{
  for (auto [n, nsub] : {std::pair{9, 4}, std::pair{30, 9}, std::pair{41, 16}, std::pair{23, 25}}) {
    const MeshGrid mesh(n);
    const auto d = build_decomposition(mesh, nsub);
    for (int t = 0; t < 20; ++t) {
      const Vector v = random_vector(mesh.dof_count(), 100 + t);
      CHECK((pou_sum(d, v) - v).cwiseAbs().maxCoeff() <= 1e-15);
    }
    for (int m : d.multiplicity)
      CHECK(m >= 1);
  }
}

TEST_CASE("internal dofs have every incident triangle inside the subdomain")
{
  const MeshGrid mesh(17);
  const auto d = build_decomposition(mesh, 9);
  for (const auto &s : d.subdomains) {
    const std::set<int> elems(s.elements.begin(), s.elements.end());
    std::vector<char> internal(s.size(), 0);
    for (int loc : s.internal_local)
      internal[loc] = 1;
    for (int k = 0; k < s.size(); ++k) {
      const int node = mesh.dof_to_node(s.overlapping_dofs[k]);
      bool all_in = true;
      for (int e = 0; e < mesh.element_count(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        if (std::find(nodes.begin(), nodes.end(), node) != nodes.end() && !elems.count(e))
          all_in = false;
      }
      CHECK(static_cast<bool>(internal[k]) == all_in);
    }
  }
}

TEST_CASE("subdomain sizes")
{
  const MeshGrid mesh(200);
  const auto d = build_decomposition(mesh, 25);
  REQUIRE(d.count() == 25);
  // 199 cells split as 40,40,40,40,39. The central block spans 41 node columns, the ring adds
  // one on each side, and the two corners touched by no ring triangle drop out.
  const auto &center = d.at(12);
  CHECK(center.size() == 43 * 43 - 2);
  CHECK(center.internal_local.size() == 41u * 41u);
  for (const auto &s : d.subdomains)
    CHECK(s.size() <= center.size() + 2 * 43);
  CHECK(d.at(0).size() < center.size());
}

TEST_CASE("identical interior subdomains on divisible grids")
{
  const MeshGrid mesh(31); // 30 cells, 3 blocks of 10
  const auto d = build_decomposition(mesh, 9);
  CHECK(d.at(4).size() == 13 * 13 - 2);
  CHECK(d.at(4).internal_local.size() == 11u * 11u);
  CHECK(d.at(1).size() == 13 * 11 - 1); // bottom row of nodes is Dirichlet
}

TEST_CASE("restrict and extend")
{
  const MeshGrid mesh(21);
  const auto d = build_decomposition(mesh, 4);
  const Vector v = random_vector(mesh.dof_count(), 5);
  for (int j = 0; j < d.count(); ++j) {
    const Vector local = restrict_to(d, j, v);
    CHECK((restrict_to(d, j, extend_from(d, j, local)) - local).norm() == 0.0);
    const Vector ext = extend_from(d, j, local);
    int support = 0;
    for (int i = 0; i < ext.size(); ++i)
      support += ext[i] != 0.0;
    CHECK(support == d.at(j).size());
    CHECK(extend_from(d, j, Vector::Zero(d.at(j).size())).norm() == 0.0);
  }
  // indicator of a dof outside subdomain 0
  Vector e = Vector::Zero(mesh.dof_count());
  e[mesh.dof_count() - 1] = 1.0;
  CHECK(restrict_to(d, 0, e).norm() == 0.0);

  CHECK_THROWS_AS(restrict_to(d, 4, v), Error);
  CHECK_THROWS_AS(extend_from(d, 0, Vector::Zero(3)), Error);
}

TEST_CASE("weights of shared dofs")
{
  const MeshGrid mesh(9);
  const auto d = build_decomposition(mesh, 4);
  for (const auto &s : d.subdomains)
    for (int loc : s.internal_local)
      if (d.multiplicity[s.overlapping_dofs[loc]] == 2) {
        Vector v = Vector::Zero(s.size());
        v[loc] = 3.0;
        CHECK(apply_pou(d, s.id, v)[loc] == 1.5);
        return;
      }
  FAIL("no dof with multiplicity 2");
}

TEST_CASE("construction errors")
{
  const MeshGrid mesh(9);
  auto code_of = [&](int n) {
    try {
      (void)build_decomposition(mesh, n);
    }
    catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of(5) == ErrorCode::NotPerfectSquare);
  CHECK(code_of(0) == ErrorCode::NotPerfectSquare);
  CHECK(code_of(81) == ErrorCode::SubdomainTooSmall);
}

TEST_CASE("mask export")
{
  const MeshGrid mesh(9);
  const auto d = build_decomposition(mesh, 4);
  const auto path = std::filesystem::temp_directory_path() / "geneo_mask_test.txt";
  write_subdomain_mask(mesh, d, 0, MaskKind::Weight, path);
  std::ifstream in(path);
  double x;
  int count = 0;
  double total = 0.0;
  while (in >> x) {
    ++count;
    total += x;
  }
  CHECK(count == 81);
  double expected = 0.0;
  for (double w : d.at(0).pou_weights)
    expected += w;
  CHECK(total == doctest::Approx(expected));
  std::filesystem::remove(path);
}
