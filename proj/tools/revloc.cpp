// revloc: narrowband source localization experiments in simulated rooms.
//
//   revloc simulate    --config c.yaml --out dir      measurements per reflection case
//   revloc localize    --config c.yaml --in m.csv     run methods on a measurement file
//   revloc fixed-scene --config c.yaml --out dir      weight maps for the fixed layout
//   revloc sweep       --config c.yaml --out dir      Monte Carlo T60 sweep

#include "revloc/harness/output.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace revloc;
using namespace revloc::harness;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool paper_scale = false;
  std::string methods;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "YAML experiment config (defaults used when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_flag("--paper-scale", o.paper_scale, "Full-size planewave set and 100 trials");
  cmd->add_option("--methods", o.methods, "Comma-separated subset of proposed,nd-omp,d-irls");
  cmd->add_option("--threads", o.threads, "Worker threads for trials");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig::defaults() : load_config(o.config);
  if (o.paper_scale) cfg.apply_paper_scale();
  if (o.seed) cfg.master_seed = *o.seed;
  if (!o.methods.empty()) cfg.methods = parse_method_list(o.methods);
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  if (cfg.cases.empty()) throw ConfigError("simulate: no reflection cases configured");
  const Setup setup = Setup::build(cfg);
  const std::uint64_t layout_seed = derive_seed(cfg.master_seed, {0});
  const auto sources = cfg.sources.placement == Placement::Fixed ? fixed_sources(cfg, setup, layout_seed)
                                                                 : random_sources(cfg, setup, layout_seed);
  nlohmann::json manifest = base_manifest(cfg, "simulate");
  manifest["cases"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
    const auto& c = cfg.cases[i];
    const std::uint64_t noise_seed = derive_seed(cfg.master_seed, {1, i});
    const Scene<double> scene = make_scene(cfg, setup, c.coeffs, sources);
    const auto s = synthesize_measurements(setup.ctx, scene, NoiseSpec<double>{cfg.snr_db, noise_seed});

    std::ostringstream csv;
    write_measurements_csv(csv, setup.mics, s);
    const std::filesystem::path dir(o.out);
    write_text(dir / ("measurements_" + c.name + ".csv"), csv.str());
    write_text(dir / ("scene_" + c.name + ".json"), scene_to_json(scene, setup.ctx).dump(2) + "\n");
    manifest["cases"].push_back({{"name", c.name}, {"noise_seed", noise_seed}});
    std::cout << "wrote " << (dir / ("measurements_" + c.name + ".csv")).string() << '\n';
  }
  write_text(std::filesystem::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_localize(const CommonOptions& o, const std::string& input, const std::string& scene_path) {
  const ExperimentConfig cfg = resolve(o);
  Measurements meas = read_measurements_csv(input);
  const Setup setup = Setup::build(cfg, meas.mics);

  std::vector<Position<double>> truth;
  if (!scene_path.empty()) {
    std::ifstream in(scene_path);
    if (!in) throw ConfigError("cannot open scene file " + scene_path);
    truth = positions_of(scene_from_json(nlohmann::json::parse(in)).sources);
    if (static_cast<int>(truth.size()) != cfg.omp.n_sources) {
      throw ConfigError("localize: scene source count differs from sources.count");
    }
  }
  const auto outcomes = run_methods(cfg, setup, meas.values, truth);

  const std::filesystem::path dir(o.out);
  std::ostringstream csv;
  csv << "method,source,x,y,z,le_m\n";
  int status = 0;
  for (const auto& oc : outcomes) {
    if (!oc.ok()) {
      std::cerr << to_string(oc.method) << ": " << oc.error << '\n';
      status = 1;
      continue;
    }
    for (std::size_t n = 0; n < oc.result.estimated_positions.size(); ++n) {
      const auto& p = oc.result.estimated_positions[n];
      csv << to_string(oc.method) << ',' << n << ',' << format_number(p.x()) << ',' << format_number(p.y())
          << ',' << format_number(p.z()) << ',' << (truth.empty() ? "nan" : format_number(oc.report.le_m)) << '\n';
    }
    std::ostringstream w;
    write_weights_csv(w, setup.grid, oc.result.grid_weights);
    write_text(dir / ("weights_" + to_string(oc.method) + ".csv"), w.str());
    std::cout << to_string(oc.method);
    if (!truth.empty()) std::cout << "  LE = " << format_number(oc.report.le_m) << " m";
    std::cout << '\n';
  }
  write_text(dir / "localize.csv", csv.str());
  nlohmann::json manifest = base_manifest(cfg, "localize");
  manifest["input"] = input;
  manifest["scene"] = scene_path;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return status;
}

int cmd_fixed_scene(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const Setup setup = Setup::build(cfg);
  const auto cases = run_fixed_scene(cfg, setup);
  write_fixed_scene_outputs(o.out, cfg, setup, cases);
  for (const auto& c : cases) {
    for (const auto& oc : c.outcomes) {
      std::cout << c.reflection.name << "  " << to_string(oc.method) << "  ";
      if (oc.ok()) std::cout << "LE = " << format_number(oc.report.le_m) << " m\n";
      else std::cout << "error: " << oc.error << '\n';
    }
  }
  return 0;
}

int cmd_sweep(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const Setup setup = Setup::build(cfg);
  const SweepResult result = run_sweep(cfg, setup);
  write_sweep_outputs(o.out, cfg, result);
  for (const auto& s : result.summary) {
    std::cout << "t60 " << format_number(s.t60_s) << " s  " << to_string(s.method) << "  mean LE "
              << format_number(s.mean_le_m) << " m  (std " << format_number(s.std_le_m) << ", "
              << s.n_ok << " ok, " << s.n_failed << " failed)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step sparse sound-source localization in reverberant rooms"};
  app.require_subcommand(1);

  CommonOptions sim_opts, loc_opts, fixed_opts, sweep_opts;
  std::string input, scene_path;

  auto* sim = app.add_subcommand("simulate", "Synthesize microphone measurements for each reflection case");
  add_common(sim, sim_opts);
  auto* loc = app.add_subcommand("localize", "Run localization methods on a measurement file");
  add_common(loc, loc_opts);
  loc->add_option("--in", input, "Measurement CSV (mic,x,y,z,re,im)")->required()->check(CLI::ExistingFile);
  loc->add_option("--scene", scene_path, "Scene JSON with ground truth, for scoring")->check(CLI::ExistingFile);
  auto* fixed = app.add_subcommand("fixed-scene", "Weight maps for the fixed source layout");
  add_common(fixed, fixed_opts);
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo localization error versus T60");
  add_common(sweep, sweep_opts);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return cmd_simulate(sim_opts);
    if (*loc) return cmd_localize(loc_opts, input, scene_path);
    if (*fixed) return cmd_fixed_scene(fixed_opts);
    if (*sweep) return cmd_sweep(sweep_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
