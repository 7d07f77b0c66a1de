// Command-line driver: solve, sweep, export-eigs, preview-coefficient.

#include <CLI11.hpp>

#include <algorithm>
#include <sstream>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "geneo/coarse_space.hpp"
#include "geneo/decomposition.hpp"
#include "geneo/error.hpp"
#include "geneo/workbench.hpp"

using namespace geneo;

namespace {

const std::vector<std::pair<std::string, std::string>> spec_keys = {
    {"profile", "coefficient profile: homogeneous, increasing, alternating, diagonal"},
    {"n_glob", "grid points per direction (list)"},
    {"N", "number of subdomains, perfect squares (list)"},
    {"kappa", "reaction coefficient (list)"},
    {"a_max", "largest diffusion coefficient (list)"},
    {"lambda_max", "eigenvalue threshold (list)"},
    {"coarse", "coarse spaces: none, delta, h (list)"},
    {"variant", "preconditioner, e.g. ras+deflation, as+additive, ras"},
    {"rtol", "relative residual tolerance"},
    {"max_iters", "iteration limit"},
    {"restart", "GMRES restart length, 0 for full GMRES"},
    {"orientation", "left or right preconditioning"},
    {"norm", "euclidean or energy"},
    {"eigensolver", "shift-invert or dense"},
    {"out", "artifact directory"},
};

struct SpecOptions {
  std::string config;
  std::map<std::string, std::string> values;
};

void add_spec_options(CLI::App *app, SpecOptions &opts)
{
  app->add_option("--config", opts.config, "key = value configuration file");
  for (const auto &[key, help] : spec_keys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (key == "N")
      flag = "-N,--subdomains";
    app->add_option(flag, opts.values[key], help);
  }
}

ExperimentSpec gather_spec(const SpecOptions &opts)
{
  ExperimentSpec spec;
  if (!opts.config.empty()) {
    std::ifstream in(opts.config);
    if (!in)
      throw Error(ErrorCode::IOError, "cannot read " + opts.config);
    std::stringstream buf;
    buf << in.rdbuf();
    spec = parse_spec(buf.str());
  }
  for (const auto &[key, value] : opts.values)
    if (!value.empty())
      set_spec_value(spec, key, value);
  spec.validate();
  return spec;
}

int cmd_solve(const SpecOptions &opts)
{
  const ExperimentSpec spec = gather_spec(opts);
  const auto points = expand(spec);
  if (points.size() != 1)
    throw Error(ErrorCode::InvalidArgument, "solve expects a single parameter point, got " +
                                                std::to_string(points.size()) + " (use sweep)");
  const RunReport r = run_single(points.front());
  std::cout << "run            " << points.front().label() << '\n'
            << "iterations     " << r.solve.iterations << '\n'
            << "converged      " << (r.solve.converged ? "yes" : "no") << '\n'
            << "coarse size    " << r.solve.coarse_size << '\n'
            << "true residual  " << r.solve.true_residual << '\n'
            << "setup time     " << r.setup_time << " s\n"
            << "solve time     " << r.solve.wall_time << " s\n";
  return r.solve.converged ? 0 : 2;
}

int cmd_sweep(const SpecOptions &opts, const std::string &format)
{
  const ExperimentSpec spec = gather_spec(opts);
  const ResultTable table = run_sweep(spec);
  emit_table(table, format == "csv" ? TableFormat::CSV : TableFormat::Markdown, std::cout);
  if (spec.out) {
    std::filesystem::create_directories(*spec.out);
    emit_table(table, TableFormat::CSV, *spec.out / "results.csv");
    emit_table(table, TableFormat::Markdown, *spec.out / "results.md");
  }
  return table.failures() == 0 ? 0 : 2;
}

int cmd_export_eigs(const SpecOptions &opts, int subdomain, int modes)
{
  const ExperimentSpec spec = gather_spec(opts);
  if (!spec.out)
    throw Error(ErrorCode::InvalidArgument, "export-eigs needs --out");
  const auto points = expand(spec);
  std::filesystem::create_directories(*spec.out);
  std::ofstream summary(*spec.out / "eigs_summary.csv");
  summary << "coarse,n_glob,a_max,kappa,lambda_max,N,subdomain,index,eigenvalue,midline_sign_changes,file\n";
  for (const RunPoint &p : points) {
    if (p.coarse == CoarseChoice::None)
      continue;
    const MeshGrid mesh(p.n_glob);
    const CoefficientField field{p.profile, p.a_max, p.kappa};
    const Decomposition d = build_decomposition(mesh, p.subdomains);
    const int side = d.blocks_per_side;
    const int j = subdomain >= 0 ? subdomain : (side / 2) * side + side / 2;
    CoarseSpaceOptions copts;
    copts.lambda_max = p.lambda_max;
    copts.solver = p.eigensolver;
    const CoarseKind kind = p.coarse == CoarseChoice::Delta ? CoarseKind::DeltaGenEO : CoarseKind::HGenEO;
    const EigenPairSet pairs = solve_local_modes(mesh, field, d, j, kind, copts);
    const int count = modes < 0 ? static_cast<int>(pairs.size()) : std::min<int>(modes, static_cast<int>(pairs.size()));
    for (int l = 0; l < count; ++l) {
      const std::string file = "eig_" + p.label() + "_j" + std::to_string(j) + "_l" + std::to_string(l) + ".txt";
      const Vector x = pairs.vectors.col(l);
      write_local_grid(mesh, d, j, x, *spec.out / file);
      summary << to_string(p.coarse) << ',' << p.n_glob << ',' << p.a_max << ',' << p.kappa << ',' << p.lambda_max
              << ',' << p.subdomains << ',' << j << ',' << l << ',' << pairs.values[l] << ','
              << midline_sign_changes(mesh, d, j, x) << ',' << file << '\n';
    }
    std::cout << p.label() << ": subdomain " << j << ", " << pairs.size() << " modes below " << p.lambda_max
              << ", exported " << count << '\n';
  }
  return 0;
}

int cmd_preview(const std::string &profile, int n_glob, double a_max, int subdomains, const std::string &out)
{
  const MeshGrid mesh(n_glob);
  const CoefficientField field{parse_layer_profile(profile), a_max, 0.0};
  const std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  const auto file = dir / ("coefficient_" + std::string(to_string(field.profile)) + ".txt");
  write_coefficient_grid(mesh, field, file);
  std::cout << "wrote " << file.string() << '\n';
  if (subdomains > 0) {
    const Decomposition d = build_decomposition(mesh, subdomains);
    for (int j = 0; j < d.count(); ++j) {
      write_subdomain_mask(mesh, d, j, MaskKind::Weight, dir / ("pou_weights_j" + std::to_string(j) + ".txt"));
      write_subdomain_mask(mesh, d, j, MaskKind::Membership, dir / ("membership_j" + std::to_string(j) + ".txt"));
    }
    std::cout << "wrote masks for " << d.count() << " subdomains\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Two-level Schwarz workbench with GenEO coarse spaces"};
  app.require_subcommand(1);

  SpecOptions solve_opts;
  auto *solve = app.add_subcommand("solve", "single run");
  add_spec_options(solve, solve_opts);

  SpecOptions sweep_opts;
  std::string format = "markdown";
  auto *sweep = app.add_subcommand("sweep", "parameter sweep, prints a result table");
  add_spec_options(sweep, sweep_opts);
  sweep->add_option("--format", format, "stdout table format")->check(CLI::IsMember({"csv", "markdown"}));

  SpecOptions eig_opts;
  int subdomain = -1;
  int modes = -1;
  auto *eigs = app.add_subcommand("export-eigs", "write selected local eigenfunctions as grid files");
  add_spec_options(eigs, eig_opts);
  eigs->add_option("--subdomain", subdomain, "subdomain index (default: central)");
  eigs->add_option("--modes", modes, "number of modes to export (default: all selected)");

  std::string profile = "homogeneous";
  int preview_n = 101;
  double preview_amax = 10.0;
  int preview_sub = 0;
  std::string preview_out = ".";
  auto *preview = app.add_subcommand("preview-coefficient", "write the coefficient field (and PoU masks) as grids");
  preview->add_option("--profile", profile, "coefficient profile")->required();
  preview->add_option("--n-glob", preview_n, "grid points per direction");
  preview->add_option("--a-max", preview_amax, "largest coefficient");
  preview->add_option("-N,--subdomains", preview_sub, "also write partition-of-unity masks");
  preview->add_option("--out", preview_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve)
      return cmd_solve(solve_opts);
    if (*sweep)
      return cmd_sweep(sweep_opts, format);
    if (*eigs)
      return cmd_export_eigs(eig_opts, subdomain, modes);
    if (*preview)
      return cmd_preview(profile, preview_n, preview_amax, preview_sub, preview_out);
  }
  catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
