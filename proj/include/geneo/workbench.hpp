#pragma once

/** @file workbench.hpp
    @brief Experiment configuration, single runs, parameter sweeps and result tables.

    Configuration is plain text, one `key = value` per line, lists comma-separated, `#` starts a
    comment. Keys:

      profile      homogeneous | increasing | alternating | diagonal   (required)
      n_glob       list of grid sizes                                  (required)
      N            list of subdomain counts (perfect squares)          (required)
      kappa        list, default 0
      a_max        list, default 1
      lambda_max   list, default 0.5
      coarse       list of none | delta | h, default delta, h
      variant      as | ras [+ additive | + deflation], default ras+deflation
      rtol         default 1e-6
      max_iters    default 1000
      restart      0 (full GMRES) or restart length, default 0
      orientation  left | right, default right
      norm         euclidean | energy, default euclidean
      eigensolver  shift-invert | dense, default shift-invert
      out          artifact directory, default none
*/

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geneo/coarse_space.hpp"
#include "geneo/gmres.hpp"
#include "geneo/model_problem.hpp"
#include "geneo/schwarz.hpp"

namespace geneo {

enum class CoarseChoice { None, Delta, H };

std::string_view to_string(CoarseChoice c);
CoarseChoice parse_coarse_choice(std::string_view s);

struct VariantChoice {
  LocalVariant local = LocalVariant::RAS;
  CoarseVariant coarse = CoarseVariant::Deflation;
  bool operator==(const VariantChoice &) const = default;
};

std::string to_string(VariantChoice v);
VariantChoice parse_variant(std::string_view s);

struct ExperimentSpec {
  std::optional<LayerProfile> profile;
  std::vector<int> n_glob;
  std::vector<int> subdomains;
  std::vector<double> kappa{0.0};
  std::vector<double> a_max{1.0};
  std::vector<double> lambda_max{0.5};
  std::vector<CoarseChoice> coarse{CoarseChoice::Delta, CoarseChoice::H};
  VariantChoice variant{};
  double rtol = 1e-6;
  int max_iters = 1000;
  int restart = 0;
  GmresOrientation orientation = GmresOrientation::Right;
  GmresNorm norm = GmresNorm::Euclidean;
  EigenSolverChoice eigensolver = EigenSolverChoice::ShiftInvert;
  std::optional<std::filesystem::path> out;

  /// Throws ParseError for missing required keys or invalid values.
  void validate() const;
};

/// Parses configuration text; required keys are not checked here.
ExperimentSpec parse_spec(std::string_view text);
/// Reads, parses and validates a configuration file.
ExperimentSpec load_spec(const std::filesystem::path &path);
/// Canonical text form (fixed key order, every key written).
std::string serialize(const ExperimentSpec &spec);
/// Applies a single `key = value` assignment (used by the parser and for command-line overrides).
void set_spec_value(ExperimentSpec &spec, std::string_view key, std::string_view value);

/// One point of the sweep.
struct RunPoint {
  LayerProfile profile = LayerProfile::Homogeneous;
  int n_glob = 0;
  int subdomains = 1;
  double kappa = 0.0;
  double a_max = 1.0;
  double lambda_max = 0.5;
  CoarseChoice coarse = CoarseChoice::None;
  VariantChoice variant{};
  GmresConfig gmres{};
  EigenSolverChoice eigensolver = EigenSolverChoice::ShiftInvert;
  std::optional<std::filesystem::path> out;

  /// Short identifier used in error messages and artifact file names.
  std::string label() const;
};

/// Cartesian product in the order coarse, n_glob, a_max, kappa, lambda_max, N.
std::vector<RunPoint> expand(const ExperimentSpec &spec);

struct RunReport {
  SolveReport solve;
  double setup_time = 0.0;
};

/**
 * @brief Assemble, decompose, build the coarse space and preconditioner, then run GMRES.
 *
 * Errors are rethrown with the run label prepended. With an output directory, the residual
 * history and the coarse-space summary are written there.
 */
RunReport run_single(const RunPoint &point);

struct ResultCell {
  RunPoint point;
  int iterations = 0;
  int coarse_size = 0;
  bool converged = false;
  double true_residual = 0.0;
  double setup_time = 0.0;
  double solve_time = 0.0;
  std::string error;
};

struct ResultTable {
  std::vector<ResultCell> cells;
  int failures() const;
};

/// Runs every point; a failing point is recorded in its cell and the sweep continues.
ResultTable run_sweep(const ExperimentSpec &spec);

enum class TableFormat { CSV, Markdown };

/// Writes the table; timings are omitted when include_timing is false.
void emit_table(const ResultTable &table, TableFormat format, std::ostream &out, bool include_timing = true);
void emit_table(const ResultTable &table, TableFormat format, const std::filesystem::path &path,
                bool include_timing = true);

} // namespace geneo
