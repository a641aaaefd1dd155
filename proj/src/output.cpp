#include "revloc/harness/output.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace revloc::harness {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << "t60_s,method,trial,le_m,beta_energy_fraction,seed\n";
  for (const auto& r : result.rows) {
    os << format_number(r.t60_s) << ',' << to_string(r.method) << ',' << r.trial << ','
       << format_number(r.le_m) << ',' << format_number(r.beta_energy_fraction) << ',' << r.seed
       << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& os, const SweepResult& result) {
  os << "t60_s,method,mean_le_m,std_le_m,n_ok,n_failed\n";
  for (const auto& s : result.summary) {
    os << format_number(s.t60_s) << ',' << to_string(s.method) << ',' << format_number(s.mean_le_m)
       << ',' << format_number(s.std_le_m) << ',' << s.n_ok << ',' << s.n_failed << '\n';
  }
}

void write_weights_csv(std::ostream& os, const std::vector<Position<double>>& grid,
                       const ComplexVector<double>& weights) {
  if (static_cast<Eigen::Index>(grid.size()) != weights.size()) {
    throw ContractError("write_weights_csv: grid and weight lengths differ");
  }
  os << "x,y,abs_alpha,phase\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto w = weights(static_cast<Eigen::Index>(j));
    os << format_number(grid[j].x()) << ',' << format_number(grid[j].y()) << ','
       << format_number(std::abs(w)) << ',' << format_number(std::arg(w)) << '\n';
  }
}

void write_fixed_scene_csv(std::ostream& os, const std::vector<FixedSceneCase>& cases) {
  os << "case,method,le_m,support_exact,beta_energy_fraction,irls_iterations,error\n";
  for (const auto& c : cases) {
    for (const auto& o : c.outcomes) {
      os << c.reflection.name << ',' << to_string(o.method) << ',';
      if (o.ok()) {
        os << format_number(o.report.le_m) << ',' << (o.report.support_exact ? 1 : 0) << ','
           << format_number(o.report.beta_energy_fraction) << ','
           << o.result.diagnostics.irls_iterations << ",\n";
      } else {
        std::string msg = o.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        os << "nan,0,nan,0," << msg << '\n';
      }
    }
  }
}

void write_measurements_csv(std::ostream& os, const std::vector<Position<double>>& mics,
                            const ComplexField<double>& s) {
  if (static_cast<Eigen::Index>(mics.size()) != s.size()) {
    throw ContractError("write_measurements_csv: microphone and measurement lengths differ");
  }
  os << "mic,x,y,z,re,im\n";
  for (std::size_t m = 0; m < mics.size(); ++m) {
    const auto v = s(static_cast<Eigen::Index>(m));
    os << m << ',' << format_number(mics[m].x()) << ',' << format_number(mics[m].y()) << ','
       << format_number(mics[m].z()) << ',' << format_number(v.real()) << ','
       << format_number(v.imag()) << '\n';
  }
}

Measurements read_measurements_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open measurement file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "mic,x,y,z,re,im") {
    throw ConfigError(path.string() + ": expected header 'mic,x,y,z,re,im'");
  }
  Measurements out;
  std::vector<Complex<double>> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<double, 6> f{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::size_t end = i + 1 < f.size() ? line.find(',', pos) : line.size();
      if (end == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": too few fields");
      const std::string field = line.substr(pos, end - pos);
      try {
        std::size_t used = 0;
        f[i] = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
      pos = end + 1;
    }
    out.mics.emplace_back(f[1], f[2], f[3]);
    values.emplace_back(f[4], f[5]);
  }
  if (values.empty()) throw ConfigError(path.string() + ": no measurements");
  out.values = Eigen::Map<const ComplexField<double>>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

nlohmann::json scene_to_json(const Scene<double>& scene, const WaveContext<double>& ctx) {
  using nlohmann::json;
  json sources = json::array();
  for (const auto& s : scene.sources) {
    sources.push_back({{"position", {s.position.x(), s.position.y(), s.position.z()}},
                       {"amplitude", {s.amplitude.real(), s.amplitude.imag()}}});
  }
  json mics = json::array();
  for (const auto& m : scene.mics) mics.push_back({m.x(), m.y(), m.z()});
  return {{"frequency_hz", ctx.frequency_hz()},
          {"speed_of_sound_mps", ctx.speed_of_sound_mps()},
          {"room_dims", {scene.room_dims.x(), scene.room_dims.y(), scene.room_dims.z()}},
          {"reflection_coeffs", scene.reflection_coeffs},
          {"max_image_order", scene.max_image_order},
          {"sources", sources},
          {"mics", mics}};
}

Scene<double> scene_from_json(const nlohmann::json& j) {
  try {
    Scene<double> scene;
    const auto dims = j.at("room_dims").get<std::array<double, 3>>();
    scene.room_dims = {dims[0], dims[1], dims[2]};
    scene.reflection_coeffs = j.at("reflection_coeffs").get<std::array<double, 6>>();
    scene.max_image_order = j.at("max_image_order").get<int>();
    for (const auto& s : j.at("sources")) {
      const auto p = s.at("position").get<std::array<double, 3>>();
      const auto a = s.at("amplitude").get<std::array<double, 2>>();
      scene.sources.push_back({{p[0], p[1], p[2]}, {a[0], a[1]}});
    }
    for (const auto& m : j.at("mics")) {
      const auto p = m.get<std::array<double, 3>>();
      scene.mics.emplace_back(p[0], p[1], p[2]);
    }
    scene.validate();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scene file: ") + e.what());
  }
}

ComplexVector<double> truth_weights(const Setup& setup, const std::vector<SourceSpec<double>>& sources) {
  ComplexVector<double> w = ComplexVector<double>::Zero(static_cast<Eigen::Index>(setup.grid.size()));
  for (const auto& s : sources) w(setup.nearest_grid_index(s.position)) += s.amplitude;
  return w;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

nlohmann::json base_manifest(const ExperimentConfig& cfg, std::string_view command) {
  return {{"tool", "revloc"},
          {"version", kVersion},
          {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"command", command},
          {"config", to_json(cfg)}};
}

void write_fixed_scene_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                               const Setup& setup, const std::vector<FixedSceneCase>& cases) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream os;
    write_fixed_scene_csv(os, cases);
    write_text(dir / "fixed_scene.csv", os.str());
  }
  nlohmann::json manifest = base_manifest(cfg, "fixed-scene");
  nlohmann::json case_list = nlohmann::json::array();
  for (const auto& c : cases) {
    std::ostringstream truth;
    write_weights_csv(truth, setup.grid, truth_weights(setup, c.sources));
    write_text(dir / ("weights_truth_" + c.reflection.name + ".csv"), truth.str());

    nlohmann::json outcomes = nlohmann::json::array();
    for (const auto& o : c.outcomes) {
      if (o.ok()) {
        std::ostringstream os;
        write_weights_csv(os, setup.grid, o.result.grid_weights);
        write_text(dir / ("weights_" + to_string(o.method) + "_" + c.reflection.name + ".csv"), os.str());
      }
      nlohmann::json est = nlohmann::json::array();
      for (const auto& p : o.result.estimated_positions) est.push_back({p.x(), p.y(), p.z()});
      outcomes.push_back({{"method", to_string(o.method)},
                          {"error", o.error},
                          {"le_m", o.ok() ? o.report.le_m : -1.0},
                          {"estimated_positions", est}});
    }
    const Scene<double> scene = make_scene(cfg, setup, c.reflection.coeffs, c.sources);
    nlohmann::json scene_json = scene_to_json(scene, setup.ctx);
    scene_json.erase("mics");
    case_list.push_back({{"name", c.reflection.name},
                         {"reflection_coeffs", c.reflection.coeffs},
                         {"eyring_t60_s", eyring_t60(c.reflection.coeffs, cfg.room_dims, cfg.speed_of_sound_mps)},
                         {"noise_seed", c.noise_seed},
                         {"scene", scene_json},
                         {"outcomes", outcomes}});
  }
  manifest["cases"] = case_list;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_sweep_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                         const SweepResult& result) {
  std::filesystem::create_directories(dir);
  std::ostringstream rows, summary;
  write_sweep_csv(rows, result);
  write_sweep_summary_csv(summary, result);
  write_text(dir / "sweep.csv", rows.str());
  write_text(dir / "sweep_summary.csv", summary.str());

  nlohmann::json manifest = base_manifest(cfg, "sweep");
  nlohmann::json coeffs = nlohmann::json::array();
  for (double t : cfg.t60_values) {
    coeffs.push_back({{"t60_s", t}, {"reflection_coeffs", t60_to_reflection(t, cfg.room_dims, cfg.speed_of_sound_mps)}});
  }
  manifest["t60_reflection_coeffs"] = coeffs;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : result.rows) {
    if (!r.error.empty()) {
      failures.push_back({{"t60_s", r.t60_s}, {"method", to_string(r.method)}, {"trial", r.trial}, {"error", r.error}});
    }
  }
  manifest["failures"] = failures;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace revloc::harness
