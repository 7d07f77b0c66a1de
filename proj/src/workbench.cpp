#include "geneo/workbench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "geneo/decomposition.hpp"
#include "geneo/error.hpp"

namespace geneo {

namespace {

std::string lower(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s)
{
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(',');
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos)
      break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::string fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T> T parse_number(std::string_view key, std::string_view s)
{
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, "invalid value '" + std::string(s) + "' for key '" + std::string(key) + "'");
  return v;
}

template <class T> std::vector<T> parse_number_list(std::string_view key, std::string_view s)
{
  std::vector<T> out;
  for (auto item : split_list(s))
    out.push_back(parse_number<T>(key, item));
  return out;
}

template <class T, class F> std::string join(const std::vector<T> &v, F f)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out += (i ? ", " : "") + f(v[i]);
  return out;
}

} // namespace

std::string_view to_string(CoarseChoice c)
{
  switch (c) {
  case CoarseChoice::None: return "none";
  case CoarseChoice::Delta: return "delta";
  case CoarseChoice::H: return "h";
  }
  return "unknown";
}

CoarseChoice parse_coarse_choice(std::string_view s)
{
  const std::string v = lower(trim(s));
  if (v == "none")
    return CoarseChoice::None;
  if (v == "delta" || v == "delta-geneo")
    return CoarseChoice::Delta;
  if (v == "h" || v == "h-geneo")
    return CoarseChoice::H;
  throw Error(ErrorCode::ParseError, "unknown coarse space '" + std::string(s) + "'");
}

std::string to_string(VariantChoice v)
{
  std::string out(to_string(v.local));
  if (v.coarse != CoarseVariant::None)
    out += "+" + std::string(to_string(v.coarse));
  return out;
}

VariantChoice parse_variant(std::string_view s)
{
  const std::string v = lower(trim(s));
  const auto plus = v.find('+');
  const std::string local = std::string(trim(std::string_view(v).substr(0, plus)));
  VariantChoice out;
  if (local == "as")
    out.local = LocalVariant::AS;
  else if (local == "ras")
    out.local = LocalVariant::RAS;
  else
    throw Error(ErrorCode::ParseError, "unknown preconditioner variant '" + std::string(s) + "'");
  out.coarse = CoarseVariant::None;
  if (plus != std::string::npos) {
    const std::string coarse = std::string(trim(std::string_view(v).substr(plus + 1)));
    if (coarse == "additive")
      out.coarse = CoarseVariant::Additive;
    else if (coarse == "deflation")
      out.coarse = CoarseVariant::Deflation;
    else if (coarse != "none")
      throw Error(ErrorCode::ParseError, "unknown coarse variant in '" + std::string(s) + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------------------------

void set_spec_value(ExperimentSpec &spec, std::string_view key_in, std::string_view value_in)
{
  const std::string key = lower(trim(key_in));
  const std::string_view value = trim(value_in);
  if (value.empty())
    throw Error(ErrorCode::ParseError, "empty value for key '" + key + "'");

  if (key == "profile")
    try {
      spec.profile = parse_layer_profile(value);
    }
    catch (const Error &e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  else if (key == "n_glob")
    spec.n_glob = parse_number_list<int>(key, value);
  else if (key == "n")
    spec.subdomains = parse_number_list<int>(key, value);
  else if (key == "kappa")
    spec.kappa = parse_number_list<double>(key, value);
  else if (key == "a_max")
    spec.a_max = parse_number_list<double>(key, value);
  else if (key == "lambda_max")
    spec.lambda_max = parse_number_list<double>(key, value);
  else if (key == "coarse") {
    spec.coarse.clear();
    for (auto item : split_list(value))
      spec.coarse.push_back(parse_coarse_choice(item));
  }
  else if (key == "variant")
    spec.variant = parse_variant(value);
  else if (key == "rtol")
    spec.rtol = parse_number<double>(key, value);
  else if (key == "max_iters")
    spec.max_iters = parse_number<int>(key, value);
  else if (key == "restart")
    spec.restart = parse_number<int>(key, value);
  else if (key == "orientation") {
    const std::string v = lower(value);
    if (v == "left")
      spec.orientation = GmresOrientation::Left;
    else if (v == "right")
      spec.orientation = GmresOrientation::Right;
    else
      throw Error(ErrorCode::ParseError, "orientation must be left or right");
  }
  else if (key == "norm") {
    const std::string v = lower(value);
    if (v == "euclidean")
      spec.norm = GmresNorm::Euclidean;
    else if (v == "energy")
      spec.norm = GmresNorm::Energy;
    else
      throw Error(ErrorCode::ParseError, "norm must be euclidean or energy");
  }
  else if (key == "eigensolver") {
    const std::string v = lower(value);
    if (v == "shift-invert")
      spec.eigensolver = EigenSolverChoice::ShiftInvert;
    else if (v == "dense")
      spec.eigensolver = EigenSolverChoice::Dense;
    else
      throw Error(ErrorCode::ParseError, "eigensolver must be shift-invert or dense");
  }
  else if (key == "out")
    spec.out = std::filesystem::path(std::string(value));
  else
    throw Error(ErrorCode::UnknownKey, "unknown key '" + std::string(trim(key_in)) + "'");
}

ExperimentSpec parse_spec(std::string_view text)
{
  ExperimentSpec spec;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos)
      l = l.substr(0, hash);
    l = trim(l);
    if (l.empty())
      continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      set_spec_value(spec, l.substr(0, eq), l.substr(eq + 1));
    }
    catch (const Error &e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IOError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentSpec spec = parse_spec(buf.str());
  spec.validate();
  return spec;
}

void ExperimentSpec::validate() const
{
  std::vector<std::string> missing;
  if (!profile)
    missing.push_back("profile");
  if (n_glob.empty())
    missing.push_back("n_glob");
  if (subdomains.empty())
    missing.push_back("N");
  if (!missing.empty())
    throw Error(ErrorCode::ParseError, "missing required key(s): " + join(missing, [](const std::string &s) { return s; }));
  auto fail = [](const std::string &msg) { throw Error(ErrorCode::ParseError, msg); };
  for (int n : n_glob)
    if (n < 3)
      fail("n_glob must be at least 3");
  for (int n : subdomains) {
    const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(n, 0)))));
    if (n < 1 || r * r != n)
      fail("N must be a perfect square, got " + std::to_string(n));
  }
  if (kappa.empty() || a_max.empty() || lambda_max.empty() || coarse.empty())
    fail("sweep lists must not be empty");
  for (double a : a_max)
    if (!(a >= 1.0))
      fail("a_max must be at least 1");
  if (!(rtol > 0.0 && rtol < 1.0))
    fail("rtol must lie in (0, 1)");
  if (max_iters < 1)
    fail("max_iters must be positive");
  if (restart < 0)
    fail("restart must be non-negative");
}

std::string serialize(const ExperimentSpec &spec)
{
  std::ostringstream out;
  auto ints = [](int v) { return std::to_string(v); };
  out << "profile = " << (spec.profile ? std::string(to_string(*spec.profile)) : std::string()) << '\n';
  out << "n_glob = " << join(spec.n_glob, ints) << '\n';
  out << "N = " << join(spec.subdomains, ints) << '\n';
  out << "kappa = " << join(spec.kappa, fmt) << '\n';
  out << "a_max = " << join(spec.a_max, fmt) << '\n';
  out << "lambda_max = " << join(spec.lambda_max, fmt) << '\n';
  out << "coarse = " << join(spec.coarse, [](CoarseChoice c) { return std::string(to_string(c)); }) << '\n';
  out << "variant = " << to_string(spec.variant) << '\n';
  out << "rtol = " << fmt(spec.rtol) << '\n';
  out << "max_iters = " << spec.max_iters << '\n';
  out << "restart = " << spec.restart << '\n';
  out << "orientation = " << (spec.orientation == GmresOrientation::Left ? "left" : "right") << '\n';
  out << "norm = " << (spec.norm == GmresNorm::Energy ? "energy" : "euclidean") << '\n';
  out << "eigensolver = " << (spec.eigensolver == EigenSolverChoice::Dense ? "dense" : "shift-invert") << '\n';
  if (spec.out)
    out << "out = " << spec.out->string() << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------------------------

std::string RunPoint::label() const
{
  std::ostringstream s;
  s << to_string(profile) << "_n" << n_glob << "_a" << fmt(a_max) << "_k" << fmt(kappa) << "_l" << fmt(lambda_max)
    << "_" << to_string(coarse) << "_N" << subdomains;
  return s.str();
}

std::vector<RunPoint> expand(const ExperimentSpec &spec)
{
  spec.validate();
  std::vector<RunPoint> points;
  for (CoarseChoice c : spec.coarse)
    for (int n : spec.n_glob)
      for (double a : spec.a_max)
        for (double k : spec.kappa)
          for (double l : spec.lambda_max)
            for (int nsub : spec.subdomains) {
              RunPoint p;
              p.profile = *spec.profile;
              p.n_glob = n;
              p.subdomains = nsub;
              p.kappa = k;
              p.a_max = a;
              p.lambda_max = l;
              p.coarse = c;
              p.variant = spec.variant;
              p.gmres.rtol = spec.rtol;
              p.gmres.max_iters = spec.max_iters;
              if (spec.restart > 0)
                p.gmres.restart = spec.restart;
              p.gmres.orientation = spec.orientation;
              p.gmres.norm = spec.norm;
              p.eigensolver = spec.eigensolver;
              p.out = spec.out;
              points.push_back(p);
            }
  return points;
}

RunReport run_single(const RunPoint &point)
{
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const MeshGrid mesh(point.n_glob);
    const CoefficientField field{point.profile, point.a_max, point.kappa};
    const DiscreteSystem sys = assemble(mesh, field);
    const Decomposition d = build_decomposition(mesh, point.subdomains);

    PrecondConfig cfg;
    cfg.local = point.variant.local;
    cfg.coarse = point.coarse == CoarseChoice::None ? CoarseVariant::None : point.variant.coarse;
    if (cfg.coarse != CoarseVariant::None) {
      CoarseSpaceOptions opts;
      opts.lambda_max = point.lambda_max;
      opts.solver = point.eigensolver;
      const CoarseKind kind = point.coarse == CoarseChoice::Delta ? CoarseKind::DeltaGenEO : CoarseKind::HGenEO;
      cfg.coarse_space =
          std::make_shared<const CoarseSpace>(build_coarse_space(mesh, field, d, kind, sys.operator_matrix, opts));
    }
    const SchwarzPreconditioner precond(sys.operator_matrix, d, cfg);
    const double setup = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    GmresConfig gcfg = point.gmres;
    if (gcfg.norm == GmresNorm::Energy)
      gcfg.energy_matrix = &sys.stiffness;
    GmresResult res = gmres(sys.operator_matrix, sys.load, precond, gcfg);
    res.report.coarse_size = precond.coarse_size();

    if (point.out) {
      std::filesystem::create_directories(*point.out);
      write_residual_history(res.report, *point.out / ("residual_" + point.label() + ".csv"));
      if (cfg.coarse_space)
        write_coarse_summary(*cfg.coarse_space, *point.out / ("coarse_" + point.label() + ".csv"));
    }
    return RunReport{std::move(res.report), setup};
  }
  catch (const Error &e) {
    throw Error(e.code(), point.label() + ": " + e.what());
  }
  catch (const std::filesystem::filesystem_error &e) {
    throw Error(ErrorCode::IOError, point.label() + ": " + e.what());
  }
}

int ResultTable::failures() const
{
  return static_cast<int>(
      std::count_if(cells.begin(), cells.end(), [](const ResultCell &c) { return !c.error.empty() || !c.converged; }));
}

ResultTable run_sweep(const ExperimentSpec &spec)
{
  ResultTable table;
  for (const RunPoint &p : expand(spec)) {
    ResultCell cell;
    cell.point = p;
    try {
      const RunReport r = run_single(p);
      cell.iterations = r.solve.iterations;
      cell.coarse_size = r.solve.coarse_size;
      cell.converged = r.solve.converged;
      cell.true_residual = r.solve.true_residual;
      cell.setup_time = r.setup_time;
      cell.solve_time = r.solve.wall_time;
    }
    catch (const std::exception &e) {
      cell.error = e.what();
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

// ---------------------------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string &s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s)
    out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void emit_csv(const ResultTable &t, std::ostream &out, bool timing)
{
  out << "coarse,n_glob,a_max,kappa,lambda_max,N,iterations,coarse_size,converged,true_residual";
  if (timing)
    out << ",setup_time,solve_time";
  out << ",error\n";
  for (const auto &c : t.cells) {
    const RunPoint &p = c.point;
    out << to_string(p.coarse) << ',' << p.n_glob << ',' << fmt(p.a_max) << ',' << fmt(p.kappa) << ','
        << fmt(p.lambda_max) << ',' << p.subdomains << ',' << c.iterations << ',' << c.coarse_size << ','
        << (c.converged ? 1 : 0) << ',' << fmt(c.true_residual);
    if (timing)
      out << ',' << fmt(c.setup_time) << ',' << fmt(c.solve_time);
    out << ',' << csv_field(c.error) << '\n';
  }
}

void emit_markdown(const ResultTable &t, std::ostream &out, bool timing)
{
  using RowKey = std::tuple<int, int, double, double, double>; // coarse, n_glob, a_max, kappa, lambda_max
  std::vector<RowKey> rows;
  std::set<int> columns;
  std::map<std::pair<RowKey, int>, const ResultCell *> lookup;
  for (const auto &c : t.cells) {
    const RunPoint &p = c.point;
    const RowKey key{static_cast<int>(p.coarse), p.n_glob, p.a_max, p.kappa, p.lambda_max};
    if (std::find(rows.begin(), rows.end(), key) == rows.end())
      rows.push_back(key);
    columns.insert(p.subdomains);
    lookup[{key, p.subdomains}] = &c;
  }

  auto header = [&](const std::string &title) {
    out << "### " << title << "\n\n| coarse | n_glob | a_max | kappa | lambda_max |";
    for (int n : columns)
      out << " N=" << n << " |";
    out << "\n|---|---|---|---|---|";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << "---|";
    out << '\n';
  };
  auto block = [&](const std::string &title, auto value) {
    header(title);
    for (const auto &key : rows) {
      out << "| " << to_string(static_cast<CoarseChoice>(std::get<0>(key))) << " | " << std::get<1>(key) << " | "
          << fmt(std::get<2>(key)) << " | " << fmt(std::get<3>(key)) << " | " << fmt(std::get<4>(key)) << " |";
      for (int n : columns) {
        const auto it = lookup.find({key, n});
        out << ' ' << (it == lookup.end() ? std::string() : value(*it->second)) << " |";
      }
      out << '\n';
    }
    out << '\n';
  };

  block("Iteration count", [](const ResultCell &c) {
    if (!c.error.empty())
      return std::string("error");
    return std::to_string(c.iterations) + (c.converged ? "" : "*");
  });
  block("Coarse space size", [](const ResultCell &c) {
    return c.error.empty() ? std::to_string(c.coarse_size) : std::string("error");
  });
  if (timing)
    block("Wall time (s, setup + solve)", [](const ResultCell &c) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(2) << c.setup_time + c.solve_time;
      return c.error.empty() ? s.str() : std::string("error");
    });
  for (const auto &c : t.cells)
    if (!c.error.empty())
      out << "- " << c.point.label() << ": " << c.error << '\n';
}

} // namespace

void emit_table(const ResultTable &table, TableFormat format, std::ostream &out, bool include_timing)
{
  if (format == TableFormat::CSV)
    emit_csv(table, out, include_timing);
  else
    emit_markdown(table, out, include_timing);
}

void emit_table(const ResultTable &table, TableFormat format, const std::filesystem::path &path, bool include_timing)
{
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::IOError, "cannot open " + path.string() + " for writing");
  emit_table(table, format, out, include_timing);
  if (!out)
    throw Error(ErrorCode::IOError, "write to " + path.string() + " failed");
}

} // namespace geneo
