#pragma once

#include "revloc/harness/experiment.hpp"

#include <filesystem>
#include <ostream>

namespace revloc::harness {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_sweep_summary_csv(std::ostream& os, const SweepResult& result);
/// Grid weight map: x, y, |alpha|, phase.
void write_weights_csv(std::ostream& os, const std::vector<Position<double>>& grid,
                       const ComplexVector<double>& weights);
void write_fixed_scene_csv(std::ostream& os, const std::vector<FixedSceneCase>& cases);

/// Microphone table: mic, x, y, z, re, im.
void write_measurements_csv(std::ostream& os, const std::vector<Position<double>>& mics,
                            const ComplexField<double>& s);
struct Measurements {
  std::vector<Position<double>> mics;
  ComplexField<double> values;
};
Measurements read_measurements_csv(const std::filesystem::path& path);

nlohmann::json scene_to_json(const Scene<double>& scene, const WaveContext<double>& ctx);
/// Inverse of scene_to_json; used to recover ground truth for `localize`.
Scene<double> scene_from_json(const nlohmann::json& j);

/// Ground-truth weight map: source amplitudes on their nearest grid nodes.
ComplexVector<double> truth_weights(const Setup& setup, const std::vector<SourceSpec<double>>& sources);

void write_text(const std::filesystem::path& path, const std::string& text);

/// fixed_scene.csv, weights_<method>_<case>.csv, weights_truth_<case>.csv
/// and manifest.json under `dir`.
void write_fixed_scene_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                               const Setup& setup, const std::vector<FixedSceneCase>& cases);
/// sweep.csv, sweep_summary.csv and manifest.json under `dir`.
void write_sweep_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                         const SweepResult& result);

nlohmann::json base_manifest(const ExperimentConfig& cfg, std::string_view command);

}  // namespace revloc::harness
