#include "revloc/harness/experiment.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace revloc::harness {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(master),
                                   static_cast<std::uint32_t>(master >> 32)};
  for (std::uint64_t t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

// ---------------------------------------------------------------------------
// Setup

Setup Setup::build(const ExperimentConfig& cfg) {
  const auto& a = cfg.array;
  auto mics = a.spacing_m
                  ? build_perimeter_array_spaced(cfg.room_dims, *a.spacing_m, a.height_m, a.inset_m)
                  : build_perimeter_array(cfg.room_dims, a.count, a.height_m, a.inset_m);
  return build(cfg, std::move(mics));
}

Setup Setup::build(const ExperimentConfig& cfg, std::vector<Position<double>> mics) {
  Setup s;
  s.ctx = WaveContext<double>(cfg.frequency_hz, cfg.speed_of_sound_mps);
  s.mics = std::move(mics);
  s.grid = build_grid(cfg.room_dims, cfg.grid);
  const auto dirs = build_directions(cfg.directions);
  s.point_sources = build_point_source_dictionary<double>(s.ctx, s.mics, s.grid);
  s.planewaves = build_planewave_dictionary<double>(s.ctx, s.mics, dirs);
  s.point_sources.validate();
  s.planewaves.validate();
  return s;
}

double Setup::grid_pitch(const ExperimentConfig& cfg) const {
  auto pitch = [&](double length, int n) {
    return n > 1 ? (length - 2 * cfg.grid.margin_m) / (n - 1) : length - 2 * cfg.grid.margin_m;
  };
  return std::max(pitch(cfg.room_dims.x(), cfg.grid.nx), pitch(cfg.room_dims.y(), cfg.grid.ny));
}

Eigen::Index Setup::nearest_grid_index(const Position<double>& p) const {
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double d = (grid[j] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<Eigen::Index>(j);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Source layouts

namespace {

Complex<double> draw_amplitude(const SourceConfig& sc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(sc.magnitude_range[0], sc.magnitude_range[1]);
  std::uniform_real_distribution<double> phase(0, 2 * std::numbers::pi);
  const double m = sc.magnitude_range[0] == sc.magnitude_range[1] ? sc.magnitude_range[0] : mag(rng);
  return std::polar(m, phase(rng));
}

}  // namespace

std::vector<SourceSpec<double>> fixed_sources(const ExperimentConfig& cfg, const Setup& setup,
                                              std::uint64_t seed) {
  if (static_cast<int>(cfg.sources.fixed.size()) != cfg.sources.count) {
    throw ConfigError("fixed_sources: fixed layout must list sources.count positions");
  }
  std::mt19937_64 rng(seed);
  std::vector<SourceSpec<double>> out;
  for (const auto& p : cfg.sources.fixed) {
    const Position<double> pos =
        cfg.sources.snap_to_grid ? setup.grid[static_cast<std::size_t>(setup.nearest_grid_index(p))] : p;
    out.push_back({pos, draw_amplitude(cfg.sources, rng)});
  }
  return out;
}

std::vector<SourceSpec<double>> random_sources(const ExperimentConfig& cfg, const Setup& setup,
                                               std::uint64_t seed) {
  const auto& sc = cfg.sources;
  const double wall = sc.min_wall_distance_m;
  const double x0 = std::max(sc.region_x[0], wall), x1 = std::min(sc.region_x[1], cfg.room_dims.x() - wall);
  const double y0 = std::max(sc.region_y[0], wall), y1 = std::min(sc.region_y[1], cfg.room_dims.y() - wall);
  const double z0 = std::max(sc.region_z[0], 0.0), z1 = std::min(sc.region_z[1], cfg.room_dims.z());
  if (!(x0 <= x1 && y0 <= y1 && z0 <= z1)) throw ConfigError("random_sources: empty placement region");
  const double min_sep = sc.min_separation_grid_spacings * setup.grid_pitch(cfg);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1), uz(z0, z1);
  std::vector<Position<double>> placed;
  constexpr int kMaxDraws = 100000;
  for (int draw = 0; static_cast<int>(placed.size()) < sc.count; ++draw) {
    if (draw == kMaxDraws) throw ConfigError("random_sources: cannot satisfy the separation constraint");
    const double x = ux(rng), y = uy(rng), z = uz(rng);
    const Position<double> p(x, y, z);
    const bool clear = std::all_of(placed.begin(), placed.end(),
                                   [&](const auto& q) { return (p - q).norm() >= min_sep; });
    if (clear) placed.push_back(p);
  }
  std::vector<SourceSpec<double>> out;
  for (const auto& p : placed) out.push_back({p, draw_amplitude(sc, rng)});
  return out;
}

Scene<double> make_scene(const ExperimentConfig& cfg, const Setup& setup,
                         const std::array<double, 6>& coeffs, std::vector<SourceSpec<double>> sources) {
  Scene<double> scene;
  scene.room_dims = cfg.room_dims;
  scene.reflection_coeffs = coeffs;
  scene.sources = std::move(sources);
  scene.mics = setup.mics;
  scene.max_image_order = cfg.max_image_order;
  scene.validate();
  return scene;
}

std::vector<Position<double>> positions_of(const std::vector<SourceSpec<double>>& sources) {
  std::vector<Position<double>> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(s.position);
  return out;
}

// ---------------------------------------------------------------------------
// Methods

std::vector<MethodOutcome> run_methods(const ExperimentConfig& cfg, const Setup& setup,
                                       const ComplexField<double>& s,
                                       const std::vector<Position<double>>& truth) {
  std::vector<MethodOutcome> out;
  for (Method m : cfg.methods) {
    MethodOutcome o;
    o.method = m;
    try {
      switch (m) {
        case Method::Proposed:
          o.result = proposed_pipeline(s, setup.point_sources, setup.planewaves, cfg.irls, cfg.omp);
          break;
        case Method::NdOmp:
          o.result = baseline_nd_omp(s, setup.point_sources, cfg.omp);
          break;
        case Method::DIrls:
          o.result = baseline_d_irls(s, setup.point_sources, setup.planewaves, cfg.irls, cfg.omp.n_sources);
          break;
      }
      if (!truth.empty()) o.report = score(o.result, truth);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixed scene

std::vector<FixedSceneCase> run_fixed_scene(const ExperimentConfig& cfg, const Setup& setup) {
  cfg.validate();
  if (cfg.cases.empty()) throw ConfigError("fixed-scene: no reflection cases configured");
  const auto sources = fixed_sources(cfg, setup, derive_seed(cfg.master_seed, {0}));
  const auto truth = positions_of(sources);

  std::vector<FixedSceneCase> cases(cfg.cases.size());
  parallel_for(static_cast<int>(cases.size()), cfg.threads, [&](int i) {
    auto& c = cases[static_cast<std::size_t>(i)];
    c.reflection = cfg.cases[static_cast<std::size_t>(i)];
    c.sources = sources;
    c.noise_seed = derive_seed(cfg.master_seed, {1, static_cast<std::uint64_t>(i)});
    const Scene<double> scene = make_scene(cfg, setup, c.reflection.coeffs, sources);
    const auto s = synthesize_measurements(setup.ctx, scene, NoiseSpec<double>{cfg.snr_db, c.noise_seed});
    c.outcomes = run_methods(cfg, setup, s, truth);
  });
  return cases;
}

// ---------------------------------------------------------------------------
// Sweep

const SweepSummary& SweepResult::at(double t60_s, Method m) const {
  for (const auto& row : summary) {
    if (row.t60_s == t60_s && row.method == m) return row;
  }
  throw ContractError("SweepResult: no summary row for t60 " + std::to_string(t60_s) + " / " + to_string(m));
}

SweepResult run_sweep(const ExperimentConfig& cfg, const Setup& setup) {
  cfg.validate();
  if (cfg.t60_values.empty()) throw ConfigError("sweep: t60_values is empty");
  const int n_t60 = static_cast<int>(cfg.t60_values.size());
  const int n_jobs = n_t60 * cfg.trials;
  const std::size_t n_methods = cfg.methods.size();

  // rows[job * n_methods + method]
  std::vector<SweepRow> rows(static_cast<std::size_t>(n_jobs) * n_methods);
  parallel_for(n_jobs, cfg.threads, [&](int job) {
    const int a = job / cfg.trials;
    const int t = job % cfg.trials;
    const double t60 = cfg.t60_values[static_cast<std::size_t>(a)];
    const std::uint64_t scene_seed = derive_seed(cfg.master_seed, {2, static_cast<std::uint64_t>(t)});
    const std::uint64_t noise_seed = derive_seed(scene_seed, {static_cast<std::uint64_t>(a)});

    std::vector<MethodOutcome> outcomes;
    std::string failure;
    try {
      const auto coeffs = t60_to_reflection(t60, cfg.room_dims, cfg.speed_of_sound_mps);
      auto sources = cfg.sources.placement == Placement::Fixed ? fixed_sources(cfg, setup, scene_seed)
                                                               : random_sources(cfg, setup, scene_seed);
      const auto truth = positions_of(sources);
      const Scene<double> scene = make_scene(cfg, setup, coeffs, std::move(sources));
      const auto s = synthesize_measurements(setup.ctx, scene, NoiseSpec<double>{cfg.snr_db, noise_seed});
      outcomes = run_methods(cfg, setup, s, truth);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (std::size_t k = 0; k < n_methods; ++k) {
      SweepRow& row = rows[static_cast<std::size_t>(job) * n_methods + k];
      row.t60_s = t60;
      row.method = cfg.methods[k];
      row.trial = t;
      row.seed = scene_seed;
      if (!failure.empty()) {
        row.error = failure;
      } else if (!outcomes[k].ok()) {
        row.error = outcomes[k].error;
      } else {
        row.le_m = outcomes[k].report.le_m;
        row.beta_energy_fraction = outcomes[k].report.beta_energy_fraction;
      }
      if (!row.error.empty()) row.le_m = std::numeric_limits<double>::quiet_NaN();
    }
  });

  SweepResult result;
  // Output order: t60, then method, then trial.
  for (int a = 0; a < n_t60; ++a) {
    for (std::size_t k = 0; k < n_methods; ++k) {
      SweepSummary sum;
      sum.t60_s = cfg.t60_values[static_cast<std::size_t>(a)];
      sum.method = cfg.methods[k];
      double acc = 0, acc2 = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const SweepRow& row = rows[static_cast<std::size_t>(a * cfg.trials + t) * n_methods + k];
        result.rows.push_back(row);
        if (row.error.empty()) {
          ++sum.n_ok;
          acc += row.le_m;
        } else {
          ++sum.n_failed;
        }
      }
      sum.mean_le_m = sum.n_ok > 0 ? acc / sum.n_ok : std::numeric_limits<double>::quiet_NaN();
      for (int t = 0; t < cfg.trials; ++t) {
        const SweepRow& row = rows[static_cast<std::size_t>(a * cfg.trials + t) * n_methods + k];
        if (row.error.empty()) acc2 += (row.le_m - sum.mean_le_m) * (row.le_m - sum.mean_le_m);
      }
      sum.std_le_m = sum.n_ok > 1 ? std::sqrt(acc2 / (sum.n_ok - 1)) : 0.0;
      result.summary.push_back(sum);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace revloc::harness
