#include "revloc/harness/config.hpp"

#include "revloc/simulator.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace revloc::harness {

std::string to_string(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::NdOmp: return "nd-omp";
    case Method::DIrls: return "d-irls";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "proposed") return Method::Proposed;
  if (name == "nd-omp") return Method::NdOmp;
  if (name == "d-irls") return Method::DIrls;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected proposed, nd-omp, d-irls)");
}

std::vector<Method> parse_method_list(std::string_view list) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    pos = comma + 1;
  }
  return out;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  // Four seats around a central table; nodes (14,14), (26,14), (14,26),
  // (26,26) of the 40 x 40 grid.
  cfg.sources.fixed = {{1.4859, 2.2397, 1.6}, {2.7167, 2.2397, 1.6},
                       {1.4859, 4.1167, 1.6}, {2.7167, 4.1167, 1.6}};
  cfg.cases = {{"t60_0.75", {0.9, 0.93, 0.94, 0.94, 0, 0}},
               {"t60_1.5", {0.99, 0.98, 0.98, 0.99, 0, 0}}};
  return cfg;
}

void ExperimentConfig::apply_paper_scale() {
  array.count = 106;
  array.spacing_m.reset();
  grid.nx = grid.ny = 40;
  directions.count = 3000;
  trials = 100;
}

void ExperimentConfig::validate() const {
  if (!(frequency_hz > 0) || !(speed_of_sound_mps > 0)) {
    throw ConfigError("wave: frequency and speed of sound must be positive");
  }
  if (!(room_dims.array() > 0).all()) throw ConfigError("room: dimensions must be positive");
  if (max_image_order < 0) throw ConfigError("room: max_image_order must be >= 0");
  if (methods.empty()) throw ConfigError("methods: at least one method is required");
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (array.count < 1) throw ConfigError("array: count must be >= 1");
  irls.validate();
  if (omp.n_sources != sources.count) throw ConfigError("omp/sources: source count mismatch");
  if (sources.count < 1) throw ConfigError("sources: count must be >= 1");
  if (sources.placement == Placement::Fixed &&
      static_cast<int>(sources.fixed.size()) != sources.count) {
    throw ConfigError("sources: fixed list length must equal sources.count");
  }
  const auto& mr = sources.magnitude_range;
  if (!(mr[0] > 0 && mr[0] <= mr[1])) throw ConfigError("sources: magnitude_range must be 0 < lo <= hi");
  for (const auto* r : {&sources.region_x, &sources.region_y, &sources.region_z}) {
    if (!((*r)[0] <= (*r)[1])) throw ConfigError("sources: region bounds must be ordered");
  }
  for (const auto& c : cases) {
    for (double r : c.coeffs) {
      if (!(r >= 0 && r <= 1)) throw ConfigError("cases: reflection coefficients must lie in [0, 1]");
    }
  }
  for (double t : t60_values) {
    if (!(t > 0)) throw ConfigError("sweep: t60 values must be positive");
  }
}

// ---------------------------------------------------------------------------
// YAML

namespace {

void check_keys(const YAML::Node& node, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(section + ": expected a mapping");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!keys.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + (section.empty() ? "<root>" : section));
    }
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(where + ": " + e.msg);
  }
}

double get_real(const YAML::Node& node, const std::string& where) {
  if (node.IsScalar()) {
    const auto text = node.Scalar();
    if (text == "inf" || text == "off" || text == "none") return std::numeric_limits<double>::infinity();
  }
  return get<double>(node, where);
}

template <std::size_t N>
std::array<double, N> get_array(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() != N) {
    throw ConfigError(where + ": expected a list of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = get_real(node[i], where);
  return out;
}

Position<double> get_position(const YAML::Node& node, const std::string& where) {
  const auto a = get_array<3>(node, where);
  return {a[0], a[1], a[2]};
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg = ExperimentConfig::defaults();
  if (root.IsNull()) return cfg;
  check_keys(root, "", {"wave", "room", "array", "grid", "directions", "methods", "irls", "omp",
                        "noise", "sources", "cases", "sweep", "seed", "threads"});

  if (auto n = root["wave"]) {
    check_keys(n, "wave", {"frequency_hz", "speed_of_sound_mps"});
    if (n["frequency_hz"]) cfg.frequency_hz = get_real(n["frequency_hz"], "wave.frequency_hz");
    if (n["speed_of_sound_mps"]) cfg.speed_of_sound_mps = get_real(n["speed_of_sound_mps"], "wave.speed_of_sound_mps");
  }
  if (auto n = root["room"]) {
    check_keys(n, "room", {"dims", "max_image_order"});
    if (n["dims"]) cfg.room_dims = get_position(n["dims"], "room.dims");
    if (n["max_image_order"]) cfg.max_image_order = get<int>(n["max_image_order"], "room.max_image_order");
  }
  if (auto n = root["array"]) {
    check_keys(n, "array", {"count", "spacing_m", "height_m", "inset_m"});
    if (n["count"]) cfg.array.count = get<int>(n["count"], "array.count");
    if (n["spacing_m"] && !n["spacing_m"].IsNull()) cfg.array.spacing_m = get_real(n["spacing_m"], "array.spacing_m");
    if (n["height_m"]) cfg.array.height_m = get_real(n["height_m"], "array.height_m");
    if (n["inset_m"]) cfg.array.inset_m = get_real(n["inset_m"], "array.inset_m");
  }
  if (auto n = root["grid"]) {
    check_keys(n, "grid", {"nx", "ny", "height_m", "margin_m"});
    if (n["nx"]) cfg.grid.nx = get<int>(n["nx"], "grid.nx");
    if (n["ny"]) cfg.grid.ny = get<int>(n["ny"], "grid.ny");
    if (n["height_m"]) cfg.grid.plane_height_z = get_real(n["height_m"], "grid.height_m");
    if (n["margin_m"]) cfg.grid.margin_m = get_real(n["margin_m"], "grid.margin_m");
  }
  if (auto n = root["directions"]) {
    check_keys(n, "directions", {"count", "mode"});
    if (n["count"]) cfg.directions.count = get<int>(n["count"], "directions.count");
    if (n["mode"]) {
      const auto mode = get<std::string>(n["mode"], "directions.mode");
      if (mode == "circle") cfg.directions.mode = DirectionMode::InPlaneCircle;
      else if (mode == "fibonacci") cfg.directions.mode = DirectionMode::FibonacciSphere;
      else throw ConfigError("directions.mode must be 'circle' or 'fibonacci'");
    }
  }
  if (auto n = root["methods"]) {
    if (!n.IsSequence()) throw ConfigError("methods: expected a list");
    cfg.methods.clear();
    for (const auto& m : n) {
      const Method method = parse_method(get<std::string>(m, "methods"));
      if (std::find(cfg.methods.begin(), cfg.methods.end(), method) == cfg.methods.end()) {
        cfg.methods.push_back(method);
      }
    }
  }
  if (auto n = root["irls"]) {
    check_keys(n, "irls", {"p", "max_iters", "epsilon_initial", "epsilon_decay", "epsilon_min",
                           "epsilon_decay_threshold", "convergence_tol", "ridge",
                           "planewave_weight", "column_norm_costs"});
    auto& c = cfg.irls;
    if (n["p"]) c.p = get_real(n["p"], "irls.p");
    if (n["max_iters"]) c.max_iters = get<int>(n["max_iters"], "irls.max_iters");
    if (n["epsilon_initial"]) c.epsilon_initial = get_real(n["epsilon_initial"], "irls.epsilon_initial");
    if (n["epsilon_decay"]) c.epsilon_decay = get_real(n["epsilon_decay"], "irls.epsilon_decay");
    if (n["epsilon_min"]) c.epsilon_min = get_real(n["epsilon_min"], "irls.epsilon_min");
    if (n["epsilon_decay_threshold"]) c.epsilon_decay_threshold = get_real(n["epsilon_decay_threshold"], "irls.epsilon_decay_threshold");
    if (n["convergence_tol"]) c.convergence_tol = get_real(n["convergence_tol"], "irls.convergence_tol");
    if (n["ridge"]) c.ridge = get_real(n["ridge"], "irls.ridge");
    if (n["planewave_weight"]) c.planewave_weight = get_real(n["planewave_weight"], "irls.planewave_weight");
    if (n["column_norm_costs"]) c.column_norm_costs = get<bool>(n["column_norm_costs"], "irls.column_norm_costs");
  }
  if (auto n = root["omp"]) {
    check_keys(n, "omp", {"normalize_columns"});
    if (n["normalize_columns"]) cfg.omp.normalize_columns = get<bool>(n["normalize_columns"], "omp.normalize_columns");
  }
  if (auto n = root["noise"]) {
    check_keys(n, "noise", {"snr_db"});
    if (n["snr_db"]) cfg.snr_db = get_real(n["snr_db"], "noise.snr_db");
  }
  if (auto n = root["sources"]) {
    check_keys(n, "sources", {"count", "placement", "fixed", "snap_to_grid", "region",
                              "min_wall_distance_m", "min_separation_grid_spacings",
                              "magnitude_range"});
    auto& s = cfg.sources;
    if (n["count"]) s.count = get<int>(n["count"], "sources.count");
    if (n["placement"]) {
      const auto p = get<std::string>(n["placement"], "sources.placement");
      if (p == "fixed") s.placement = Placement::Fixed;
      else if (p == "random") s.placement = Placement::Random;
      else throw ConfigError("sources.placement must be 'fixed' or 'random'");
    }
    if (n["fixed"]) {
      if (!n["fixed"].IsSequence()) throw ConfigError("sources.fixed: expected a list of [x, y, z]");
      s.fixed.clear();
      for (const auto& p : n["fixed"]) s.fixed.push_back(get_position(p, "sources.fixed"));
    }
    if (n["snap_to_grid"]) s.snap_to_grid = get<bool>(n["snap_to_grid"], "sources.snap_to_grid");
    if (auto r = n["region"]) {
      check_keys(r, "sources.region", {"x", "y", "z"});
      if (r["x"]) s.region_x = get_array<2>(r["x"], "sources.region.x");
      if (r["y"]) s.region_y = get_array<2>(r["y"], "sources.region.y");
      if (r["z"]) s.region_z = get_array<2>(r["z"], "sources.region.z");
    }
    if (n["min_wall_distance_m"]) s.min_wall_distance_m = get_real(n["min_wall_distance_m"], "sources.min_wall_distance_m");
    if (n["min_separation_grid_spacings"]) s.min_separation_grid_spacings = get_real(n["min_separation_grid_spacings"], "sources.min_separation_grid_spacings");
    if (n["magnitude_range"]) s.magnitude_range = get_array<2>(n["magnitude_range"], "sources.magnitude_range");
  }
  cfg.omp.n_sources = cfg.sources.count;
  if (auto n = root["cases"]) {
    if (!n.IsSequence()) throw ConfigError("cases: expected a list");
    cfg.cases.clear();
    for (const auto& c : n) {
      check_keys(c, "cases[]", {"name", "reflection_coeffs", "t60_s"});
      ReflectionCase rc;
      rc.name = get<std::string>(c["name"], "cases[].name");
      if (c["reflection_coeffs"] && c["t60_s"]) {
        throw ConfigError("cases[]: give either reflection_coeffs or t60_s, not both");
      }
      if (c["reflection_coeffs"]) {
        rc.coeffs = get_array<6>(c["reflection_coeffs"], "cases[].reflection_coeffs");
      } else if (c["t60_s"]) {
        rc.coeffs = t60_to_reflection(get_real(c["t60_s"], "cases[].t60_s"), cfg.room_dims,
                                      cfg.speed_of_sound_mps);
      } else {
        throw ConfigError("cases[]: reflection_coeffs or t60_s is required");
      }
      cfg.cases.push_back(rc);
    }
  }
  if (auto n = root["sweep"]) {
    check_keys(n, "sweep", {"t60_values", "trials"});
    if (n["t60_values"]) {
      if (!n["t60_values"].IsSequence()) throw ConfigError("sweep.t60_values: expected a list");
      cfg.t60_values.clear();
      for (const auto& t : n["t60_values"]) cfg.t60_values.push_back(get_real(t, "sweep.t60_values"));
    }
    if (n["trials"]) cfg.trials = get<int>(n["trials"], "sweep.trials");
  }
  if (root["seed"]) cfg.master_seed = get<std::uint64_t>(root["seed"], "seed");
  if (root["threads"]) cfg.threads = get<int>(root["threads"], "threads");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  auto pos = [](const Position<double>& p) { return json::array({p.x(), p.y(), p.z()}); };
  auto real = [](double v) -> json { return std::isfinite(v) ? json(v) : json("inf"); };

  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  json fixed = json::array();
  for (const auto& p : cfg.sources.fixed) fixed.push_back(pos(p));
  json cases = json::array();
  for (const auto& c : cfg.cases) cases.push_back({{"name", c.name}, {"reflection_coeffs", c.coeffs}});

  json array = {{"count", cfg.array.count}, {"height_m", cfg.array.height_m}, {"inset_m", cfg.array.inset_m}};
  if (cfg.array.spacing_m) array["spacing_m"] = *cfg.array.spacing_m;

  return {
      {"wave", {{"frequency_hz", cfg.frequency_hz}, {"speed_of_sound_mps", cfg.speed_of_sound_mps}}},
      {"room", {{"dims", pos(cfg.room_dims)}, {"max_image_order", cfg.max_image_order}}},
      {"array", array},
      {"grid", {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"height_m", cfg.grid.plane_height_z},
                {"margin_m", cfg.grid.margin_m}}},
      {"directions", {{"count", cfg.directions.count},
                      {"mode", cfg.directions.mode == DirectionMode::InPlaneCircle ? "circle" : "fibonacci"}}},
      {"methods", methods},
      {"irls", {{"p", cfg.irls.p}, {"max_iters", cfg.irls.max_iters},
                {"epsilon_initial", cfg.irls.epsilon_initial}, {"epsilon_decay", cfg.irls.epsilon_decay},
                {"epsilon_min", cfg.irls.epsilon_min},
                {"epsilon_decay_threshold", cfg.irls.epsilon_decay_threshold},
                {"convergence_tol", cfg.irls.convergence_tol}, {"ridge", cfg.irls.ridge},
                {"planewave_weight", cfg.irls.planewave_weight},
                {"column_norm_costs", cfg.irls.column_norm_costs}}},
      {"omp", {{"normalize_columns", cfg.omp.normalize_columns}}},
      {"noise", {{"snr_db", real(cfg.snr_db)}}},
      {"sources", {{"count", cfg.sources.count},
                   {"placement", cfg.sources.placement == Placement::Fixed ? "fixed" : "random"},
                   {"fixed", fixed},
                   {"snap_to_grid", cfg.sources.snap_to_grid},
                   {"region", {{"x", cfg.sources.region_x}, {"y", cfg.sources.region_y},
                               {"z", cfg.sources.region_z}}},
                   {"min_wall_distance_m", cfg.sources.min_wall_distance_m},
                   {"min_separation_grid_spacings", cfg.sources.min_separation_grid_spacings},
                   {"magnitude_range", cfg.sources.magnitude_range}}},
      {"cases", cases},
      {"sweep", {{"t60_values", cfg.t60_values}, {"trials", cfg.trials}}},
      {"seed", cfg.master_seed},
      {"threads", cfg.threads},
  };
}

}  // namespace revloc::harness
