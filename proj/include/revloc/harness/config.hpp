#pragma once

#include "revloc/dictionaries.hpp"
#include "revloc/solvers.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revloc::harness {

enum class Method { Proposed, NdOmp, DIrls };

std::string to_string(Method m);
Method parse_method(std::string_view name);
/// Comma-separated list, e.g. "proposed,nd-omp".
std::vector<Method> parse_method_list(std::string_view list);

enum class Placement { Fixed, Random };

struct SourceConfig {
  int count = 4;
  Placement placement = Placement::Random;
  /// Used when placement is Fixed; also the fixed-scene layout.
  std::vector<Position<double>> fixed;
  /// Move fixed sources onto their nearest grid node.
  bool snap_to_grid = true;
  std::array<double, 2> region_x{0.3, 3.8};
  std::array<double, 2> region_y{0.3, 5.9};
  std::array<double, 2> region_z{1.55, 1.65};
  double min_wall_distance_m = 0.3;
  /// Minimum pairwise separation, in units of the coarser grid pitch.
  double min_separation_grid_spacings = 2;
  std::array<double, 2> magnitude_range{1, 1};
};

struct ReflectionCase {
  std::string name;
  std::array<double, 6> coeffs{};
};

struct ArrayConfig {
  int count = 106;
  /// When set, overrides count with round(perimeter / spacing).
  std::optional<double> spacing_m;
  double height_m = 1.6;
  double inset_m = 0.01;
};

/// Everything needed to reproduce a fixed-scene run or a sweep.
struct ExperimentConfig {
  double frequency_hz = 1000;
  double speed_of_sound_mps = 340;

  Position<double> room_dims{4.1, 6.2, 3.9};
  int max_image_order = 30;

  ArrayConfig array;
  GridSpec<double> grid{1.6, 40, 40, 0.05};
  DirectionSpec<double> directions{720, DirectionMode::InPlaneCircle};

  std::vector<Method> methods{Method::Proposed, Method::NdOmp, Method::DIrls};
  IrlsConfig<double> irls;
  OmpConfig<double> omp;

  double snr_db = 30;
  SourceConfig sources;

  std::vector<ReflectionCase> cases;
  std::vector<double> t60_values{0.5, 1.0, 1.5};
  int trials = 20;

  std::uint64_t master_seed = 1;
  int threads = 1;

  /// Desk-scale defaults.
  static ExperimentConfig defaults();
  /// Full-size planewave set and trial count.
  void apply_paper_scale();
  void validate() const;
};

ExperimentConfig parse_config(std::string_view yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace revloc::harness
