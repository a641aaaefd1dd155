#pragma once

#include "revloc/harness/config.hpp"
#include "revloc/metrics.hpp"
#include "revloc/simulator.hpp"

#include <functional>

namespace revloc::harness {

/// Deterministic child seed for a (master, tags...) tuple.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

/// Geometry and dictionaries shared by every trial of an experiment.
struct Setup {
  WaveContext<double> ctx{1000, 340};
  std::vector<Position<double>> mics;
  std::vector<Position<double>> grid;
  Dictionary<double> point_sources;  // G0
  Dictionary<double> planewaves;     // W

  static Setup build(const ExperimentConfig& cfg);
  /// Same dictionaries but measured at an explicit microphone list.
  static Setup build(const ExperimentConfig& cfg, std::vector<Position<double>> mics);

  /// Larger of the two grid pitches.
  double grid_pitch(const ExperimentConfig& cfg) const;
  Eigen::Index nearest_grid_index(const Position<double>& p) const;
};

/// Fixed layout from the config (snapped to the grid if requested) with
/// random phases and magnitudes drawn from `seed`.
std::vector<SourceSpec<double>> fixed_sources(const ExperimentConfig& cfg, const Setup& setup,
                                              std::uint64_t seed);

/// Rejection-sampled random layout honouring wall distance and separation.
std::vector<SourceSpec<double>> random_sources(const ExperimentConfig& cfg, const Setup& setup,
                                               std::uint64_t seed);

Scene<double> make_scene(const ExperimentConfig& cfg, const Setup& setup,
                         const std::array<double, 6>& coeffs, std::vector<SourceSpec<double>> sources);

std::vector<Position<double>> positions_of(const std::vector<SourceSpec<double>>& sources);

struct MethodOutcome {
  Method method = Method::Proposed;
  LocalizationResult<double> result;
  TrialReport<double> report;
  /// Non-empty when the method threw; result/report are then meaningless.
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Runs every configured method on the same measurement vector.
std::vector<MethodOutcome> run_methods(const ExperimentConfig& cfg, const Setup& setup,
                                       const ComplexField<double>& s,
                                       const std::vector<Position<double>>& truth);

struct FixedSceneCase {
  ReflectionCase reflection;
  std::uint64_t noise_seed = 0;
  std::vector<SourceSpec<double>> sources;
  std::vector<MethodOutcome> outcomes;
};

std::vector<FixedSceneCase> run_fixed_scene(const ExperimentConfig& cfg, const Setup& setup);

struct SweepRow {
  double t60_s = 0;
  Method method = Method::Proposed;
  int trial = 0;
  double le_m = 0;
  double beta_energy_fraction = 0;
  std::uint64_t seed = 0;
  std::string error;
};

struct SweepSummary {
  double t60_s = 0;
  Method method = Method::Proposed;
  double mean_le_m = 0;
  double std_le_m = 0;
  int n_ok = 0;
  int n_failed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summary;

  const SweepSummary& at(double t60_s, Method m) const;
};

/// Trial t uses the same source layout at every T60 so that methods and
/// reverberation levels are compared on paired scenes; noise is drawn
/// independently per (T60, trial).
SweepResult run_sweep(const ExperimentConfig& cfg, const Setup& setup);

/// Calls job(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

}  // namespace revloc::harness
