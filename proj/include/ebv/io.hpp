#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ebv/burnvel.hpp"
#include "ebv/cell_solver.hpp"
#include "ebv/flow.hpp"
#include "ebv/front.hpp"
#include "ebv/level_curve.hpp"
#include "ebv/perturb.hpp"

namespace ebv {

using json = nlohmann::ordered_json;

// ---- run configuration ------------------------------------------------------

struct ExperimentSpec {
  std::vector<Vec2> p_list;
  std::vector<double> eps_list;
  std::vector<double> a_list;
  std::vector<double> t_list{0.0, 1.0};
  int n_angles = 64;
  /// Level c of an Hbar level curve; absent means the alpha level curve.
  std::optional<double> level;
  std::optional<double> kappa_tol;
  std::string model = "ell1";  // front: euclidean | ell1 | sampled
  double model_scale = 1.0;
  /// Random momenta appended to p_list (uniform angle, uniform radius).
  int random_p = 0;
  double random_r_min = 0.25;
  double random_r_max = 2.0;
  /// Window scan of Hbar(1, p2) for the cellular experiment.
  double p2_step = 0.01;
  double p2_max = 0.2;
};

struct OutputSpec {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
  bool svg = true;
};

struct RunConfig {
  FlowField flow = make_zero();
  SolverConfig solver;
  ExperimentSpec experiment;
  OutputSpec output;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
FlowField parse_flow(const json& j);
SolverConfig parse_solver(const json& j);
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Appends `random_p` momenta drawn from a seeded generator.
std::vector<Vec2> momenta(const ExperimentSpec& e, std::uint64_t seed);

// ---- tables -------------------------------------------------------------------

/// Column-ordered table rendered to CSV with fixed formatting (%.12g), so
/// identical inputs give identical bytes.
class Table {
 public:
  using Cell = std::variant<double, long, std::string>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row);
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }

  std::string to_csv() const;
  json to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double v);

json to_json(const HbarResult& r);
json to_json(const BurningVelocityResult& r);
json to_json(const LevelCurve& c);
json to_json(const ResonantDirection& d);
json to_json(const PerturbationResult& r);
json to_json(const FrontConsistency& c);

/// theta, x, y, value, value_err, lambda.
Table level_curve_table(const LevelCurve& c);

// ---- SVG ----------------------------------------------------------------------

struct SvgCurve {
  std::vector<Vec2> points;
  std::string stroke = "#000000";
  double stroke_width = 1.0;  // in pixels
  bool closed = true;
  std::string dash;  // stroke-dasharray, empty for solid
};

struct SvgOptions {
  int pixels = 480;
  std::string title;
};

/// Deterministic SVG: polylines in input order, coordinates with 6 decimals,
/// y axis pointing up, viewBox = data bounds padded by 20% of the half
/// extent (or [-1, 1]^2 when there is no data).
std::string render_svg(const std::vector<SvgCurve>& curves, const SvgOptions& opt = {});

/// Writes `text` to `path` via a temporary file and rename.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ebv
