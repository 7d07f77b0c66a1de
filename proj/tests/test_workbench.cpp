#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "geneo/error.hpp"
#include "geneo/workbench.hpp"

using namespace geneo;

namespace {

ErrorCode code_of(auto &&fn)
{
  try {
    fn();
  }
  catch (const Error &e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

std::string csv(const ResultTable &t, bool timing = false)
{
  std::ostringstream s;
  emit_table(t, TableFormat::CSV, s, timing);
  return s.str();
}

int line_count(const std::string &s)
{
  int n = 0;
  for (char c : s)
    n += c == '\n';
  return n;
}

} // namespace

TEST_CASE("defaults after parsing the required keys")
{
  const auto spec = parse_spec("profile = increasing\nn_glob = 50\nN = 4\n");
  spec.validate();
  CHECK(spec.lambda_max == std::vector<double>{0.5});
  CHECK(spec.kappa == std::vector<double>{0.0});
  CHECK(spec.rtol == 1e-6);
  CHECK(spec.max_iters == 1000);
  CHECK(spec.variant == VariantChoice{LocalVariant::RAS, CoarseVariant::Deflation});
  CHECK(spec.orientation == GmresOrientation::Right);
  CHECK(spec.coarse.size() == 2u);
  CHECK_FALSE(spec.out.has_value());
}

TEST_CASE("missing required keys")
{
  const auto spec = parse_spec("");
  CHECK(code_of([&] { spec.validate(); }) == ErrorCode::ParseError);
  try {
    spec.validate();
  }
  catch (const Error &e) {
    const std::string msg = e.what();
    CHECK(msg.find("profile") != std::string::npos);
    CHECK(msg.find("n_glob") != std::string::npos);
  }
}

TEST_CASE("parse errors")
{
  CHECK(code_of([] { parse_spec("profile = increasing\ncolour = blue\n"); }) == ErrorCode::UnknownKey);
  try {
    parse_spec("# comment\nprofile = increasing\nn_glob = abc\n");
    FAIL("expected ParseError");
  }
  catch (const Error &e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { parse_spec("just words\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_spec("variant = bogus\n"); }) == ErrorCode::ParseError);
  auto bad = parse_spec("profile = homogeneous\nn_glob = 20\nN = 5\n");
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ParseError);
  bad = parse_spec("profile = homogeneous\nn_glob = 20\nN = 4\nrtol = 2\n");
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::ParseError);
}

TEST_CASE("serialization round trip")
{
  const std::string text = "profile = diagonal   # layered\n"
                           "n_glob = 100, 200\n"
                           "N = 4, 9\n"
                           "kappa = 10, 1000\n"
                           "a_max = 5\n"
                           "lambda_max = 0.25\n"
                           "coarse = h\n"
                           "variant = as+additive\n"
                           "rtol = 1e-8\n"
                           "restart = 30\n"
                           "orientation = left\n"
                           "norm = energy\n"
                           "eigensolver = dense\n"
                           "out = /tmp/run\n";
  const auto spec = parse_spec(text);
  const std::string canonical = serialize(spec);
  CHECK(serialize(parse_spec(canonical)) == canonical);
  const auto again = parse_spec(canonical);
  CHECK(again.n_glob == spec.n_glob);
  CHECK(again.kappa == spec.kappa);
  CHECK(again.rtol == spec.rtol);
  CHECK(again.variant == spec.variant);
  CHECK(again.norm == GmresNorm::Energy);
  CHECK(again.out == spec.out);

  ExperimentSpec odd = spec;
  odd.kappa = {0.1, 1.0 / 3.0};
  CHECK(parse_spec(serialize(odd)).kappa == odd.kappa);
}

TEST_CASE("variant names")
{
  for (auto l : {LocalVariant::AS, LocalVariant::RAS})
    for (auto c : {CoarseVariant::None, CoarseVariant::Additive, CoarseVariant::Deflation}) {
      const VariantChoice v{l, c};
      CHECK(parse_variant(to_string(v)) == v);
    }
  CHECK(parse_variant("RAS") == VariantChoice{LocalVariant::RAS, CoarseVariant::None});
}

TEST_CASE("expansion order")
{
  auto spec = parse_spec("profile = increasing\nn_glob = 20, 30\nN = 4, 9\nkappa = 0, 5\ncoarse = none\n");
  const auto points = expand(spec);
  REQUIRE(points.size() == 8u);
  CHECK(points[0].subdomains == 4);
  CHECK(points[1].subdomains == 9);
  CHECK(points[2].kappa == 5.0);
  CHECK(points[4].n_glob == 30);
  CHECK(points[0].label() != points[1].label());
}

TEST_CASE("single sweep cell matches a single run")
{
  auto spec = parse_spec("profile = alternating\nn_glob = 30\nN = 9\nkappa = 50\na_max = 10\ncoarse = h\n");
  const auto table = run_sweep(spec);
  REQUIRE(table.cells.size() == 1u);
  const auto report = run_single(expand(spec).front());
  const auto &cell = table.cells.front();
  CHECK(cell.error.empty());
  CHECK(cell.iterations == report.solve.iterations);
  CHECK(cell.coarse_size == report.solve.coarse_size);
  CHECK(cell.converged == report.solve.converged);
  CHECK(cell.coarse_size > 0);
  CHECK(line_count(csv(table)) == 2);
}

TEST_CASE("sweeps are deterministic")
{
  auto spec = parse_spec("profile = diagonal\nn_glob = 25\nN = 4, 9\nkappa = 0, 100\na_max = 20\n");
  const auto a = run_sweep(spec);
  const auto b = run_sweep(spec);
  CHECK(csv(a) == csv(b));
  std::ostringstream ma;
  std::ostringstream mb;
  emit_table(a, TableFormat::Markdown, ma, false);
  emit_table(b, TableFormat::Markdown, mb, false);
  CHECK(ma.str() == mb.str());
  CHECK(ma.str().find("### Iteration count") != std::string::npos);
  CHECK(ma.str().find("### Coarse space size") != std::string::npos);
}

TEST_CASE("empty table")
{
  const std::string out = csv(ResultTable{});
  CHECK(line_count(out) == 1);
  CHECK(out.starts_with("coarse,"));
}

TEST_CASE("one-level homogeneous run")
{
  auto spec = parse_spec("profile = homogeneous\nn_glob = 21\nN = 4\ncoarse = none\nvariant = ras\n");
  const auto t = run_sweep(spec);
  REQUIRE(t.cells.size() == 1u);
  CHECK(t.cells[0].converged);
  CHECK(t.cells[0].coarse_size == 0);
  CHECK(t.cells[0].true_residual <= 1e-5);
}

TEST_CASE("a failing cell does not stop the sweep")
{
  // 36 blocks do not fit on a 4-cell grid
  auto spec = parse_spec("profile = homogeneous\nn_glob = 5, 21\nN = 36, 4\ncoarse = none\nvariant = ras\n");
  const auto t = run_sweep(spec);
  REQUIRE(t.cells.size() == 4u);
  CHECK(t.failures() >= 1);
  CHECK_FALSE(t.cells[0].error.empty());
  CHECK(t.cells[0].error.find(t.cells[0].point.label()) != std::string::npos);
  CHECK(t.cells[3].error.empty());
  CHECK(t.cells[3].converged);
  std::ostringstream md;
  emit_table(t, TableFormat::Markdown, md, false);
  CHECK(md.str().find("error") != std::string::npos);
}

TEST_CASE("artifacts are written to the output directory")
{
  const auto dir = std::filesystem::temp_directory_path() / "geneo_workbench_test";
  std::filesystem::remove_all(dir);
  auto spec = parse_spec("profile = increasing\nn_glob = 21\nN = 4\ncoarse = delta\na_max = 5\n");
  spec.out = dir;
  const auto p = expand(spec).front();
  run_single(p);
  CHECK(std::filesystem::exists(dir / ("residual_" + p.label() + ".csv")));
  CHECK(std::filesystem::exists(dir / ("coarse_" + p.label() + ".csv")));
  std::filesystem::remove_all(dir);
}
