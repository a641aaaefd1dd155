// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "oracles.hpp"
#include "revloc/harness/output.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

using namespace revloc;
using namespace revloc::harness;
using P = Position<double>;
using CV = ComplexVector<double>;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kFreeFieldSeconds = 5.0;
constexpr double kMinNormRelErr = 1e-8;
constexpr int kPlantedMin = 95;
constexpr int kBruteForceMin = 95;
constexpr double kBruteForceSeconds = 10.0;
constexpr int kDereverbSeeds = 100;
constexpr int kDereverbWinsMin = 90;
constexpr double kDereverbSeconds = 600.0;
constexpr double kFlatRatioMax = 2.0;
constexpr double kNdOmpGrowthMin = 1.5;
constexpr double kSimulatorRelTol = 1e-13;
constexpr double kSnrTarget = 30.0, kSnrTol = 0.5;

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

template <typename... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Dictionary<double> as_dictionary(const ComplexMatrix<double>& A) {
  Dictionary<double> d;
  d.matrix = A;
  for (Eigen::Index c = 0; c < A.cols(); ++c) d.column_meta.emplace_back(P(double(c), 0, 0));
  return d;
}

void free_field_exactness() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.cases = {{"free", {0, 0, 0, 0, 0, 0}}};
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.methods = {Method::NdOmp, Method::Proposed};
  const Setup setup = Setup::build(cfg);
  const auto cases = run_fixed_scene(cfg, setup);
  const double elapsed = seconds_since(t0);

  bool exact = true;
  std::string le;
  for (const auto& o : cases[0].outcomes) {
    exact = exact && o.ok() && o.report.le_m == 0.0 && o.report.support_exact;
    le += to_string(o.method) + " LE=" + (o.ok() ? format_number(o.report.le_m) : o.error) + " ";
  }
  report(exact && elapsed < kFreeFieldSeconds, "free-field exactness",
         le + fmt("time=%.2fs (need LE=0, <%.0fs)", elapsed, kFreeFieldSeconds));
}

void irls_oracle() {
  std::mt19937_64 rng(0x1815);
  IrlsConfig<double> l2;
  l2.p = 2;
  l2.column_norm_costs = false;
  l2.planewave_weight = 1;
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const auto A = oracle::random_complex(20, 60, rng);
    const CV s = oracle::random_complex(20, 1, rng);
    const CV ref = oracle::min_norm(A, s);
    worst = std::max(worst, (irls_solve(as_dictionary(A), s, l2).weights.values - ref).norm() / ref.norm());
  }

  std::uniform_int_distribution<int> pick(0, 59);
  std::uniform_real_distribution<double> phase(0, 2 * M_PI), mag(0.5, 2.0);
  int recovered = 0;
  for (int t = 0; t < 100; ++t) {
    const auto A = oracle::random_complex(20, 60, rng);
    std::set<Eigen::Index> sup;
    while (sup.size() < 3) sup.insert(pick(rng));
    CV g = CV::Zero(60);
    for (auto j : sup) g(j) = std::polar(mag(rng), phase(rng));
    const CV gh = irls_solve(as_dictionary(A), CV(A * g), IrlsConfig<double>{}).weights.values;
    std::vector<Eigen::Index> idx(60);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::partial_sort(idx.begin(), idx.begin() + 3, idx.end(),
                      [&](auto a, auto b) { return std::abs(gh(a)) > std::abs(gh(b)); });
    idx.resize(3);
    recovered += oracle::sorted(idx) == std::vector<Eigen::Index>(sup.begin(), sup.end());
  }
  report(worst < kMinNormRelErr && recovered >= kPlantedMin, "IRLS oracle equivalence",
         fmt("p=2 worst rel err=%.2e (<%.0e); planted 3-sparse %d/100 (>=%d)", worst, kMinNormRelErr,
             recovered, kPlantedMin));
}

void omp_brute_force() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(0xB0F);
  std::uniform_int_distribution<int> pickJ(4, 12);
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    const int J = pickJ(rng);
    const int N = 1 + t % 2;
    const auto A = oracle::random_complex(8, J, rng);
    std::uniform_int_distribution<int> pick(0, J - 1);
    std::set<Eigen::Index> sup;
    while (static_cast<int>(sup.size()) < N) sup.insert(pick(rng));
    CV g = CV::Zero(J);
    for (auto j : sup) g(j) = oracle::random_complex(1, 1, rng)(0, 0);
    const CV s = A * g;
    const auto res = omp_localize(s, as_dictionary(A), OmpConfig<double>{N});
    agree += oracle::sorted(res.support) == oracle::best_subset(A, s, N);
  }
  const double elapsed = seconds_since(t0);
  report(agree >= kBruteForceMin && elapsed < kBruteForceSeconds, "OMP brute-force equivalence",
         fmt("%d/100 match (>=%d), time=%.2fs (<%.0fs)", agree, kBruteForceMin, elapsed, kBruteForceSeconds));
}

void dereverberation_efficacy() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.cases = {{"t60_1.5", {0.99, 0.98, 0.98, 0.99, 0, 0}}};
  cfg.snr_db = 30;
  cfg.methods = {Method::Proposed, Method::NdOmp};
  const Setup setup = Setup::build(cfg);

  int wins = 0, ties = 0, valid = 0;
  double sum_p = 0, sum_n = 0;
  for (int seed = 1; seed <= kDereverbSeeds; ++seed) {
    cfg.master_seed = static_cast<std::uint64_t>(seed);
    const auto c = run_fixed_scene(cfg, setup)[0];
    const auto& pr = c.outcomes[0];
    const auto& nd = c.outcomes[1];
    if (!pr.ok() || !nd.ok()) continue;
    ++valid;
    sum_p += pr.report.le_m;
    sum_n += nd.report.le_m;
    wins += pr.report.le_m < nd.report.le_m;
    ties += pr.report.le_m == nd.report.le_m;
  }
  const double elapsed = seconds_since(t0);
  const double mp = sum_p / valid, mn = sum_n / valid;
  report(valid == kDereverbSeeds && mp < mn && wins >= kDereverbWinsMin && elapsed < kDereverbSeconds,
         "dereverberation efficacy",
         fmt("mean LE proposed=%.4f nd-omp=%.4f m; strict wins %d/%d (>=%d), ties %d; time=%.0fs", mp, mn, wins,
             valid, kDereverbWinsMin, ties, elapsed));
}

void sweep_trend() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.t60_values = {0.5, 1.0, 1.5};
  cfg.trials = 20;
  const Setup setup = Setup::build(cfg);
  const SweepResult res = run_sweep(cfg, setup);

  std::string table;
  for (Method m : cfg.methods) {
    table += to_string(m) + "=";
    for (double t : cfg.t60_values) table += fmt("%.3f/", res.at(t, m).mean_le_m);
    table.back() = ' ';
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double t : cfg.t60_values) {
    lo = std::min(lo, res.at(t, Method::Proposed).mean_le_m);
    hi = std::max(hi, res.at(t, Method::Proposed).mean_le_m);
  }
  const double ratio = hi / lo;
  const double growth = res.at(1.5, Method::NdOmp).mean_le_m / res.at(0.5, Method::NdOmp).mean_le_m;
  int failed = 0;
  for (const auto& s : res.summary) failed += s.n_failed;
  report(ratio < kFlatRatioMax && growth >= kNdOmpGrowthMin && failed == 0, "sweep trend",
         fmt("proposed max/min=%.3f (<%.1f); nd-omp LE(1.5)/LE(0.5)=%.3f (>=%.1f); ", ratio, kFlatRatioMax, growth,
             kNdOmpGrowthMin) +
             "means " + table + fmt("failed=%d time=%.0fs", failed, seconds_since(t0)));
}

void simulator_invariants() {
  const WaveContext<double> ctx(1000, 340);
  const ExperimentConfig cfg = ExperimentConfig::defaults();
  const Setup setup = Setup::build(cfg);
  const auto sources = random_sources(cfg, setup, 77);

  Scene<double> dry = make_scene(cfg, setup, {0, 0, 0, 0, 0, 0}, sources);
  const CV s_dry = synthesize_clean(ctx, dry);
  double reduction = 0;
  for (std::size_t m = 0; m < dry.mics.size(); ++m) {
    std::complex<double> ref = 0;
    for (const auto& src : sources) ref += src.amplitude * oracle::green(ctx.wavenumber(), dry.mics[m], src.position);
    reduction = std::max(reduction, std::abs(s_dry(static_cast<Eigen::Index>(m)) - ref) / std::abs(ref));
  }

  const Scene<double> wet = make_scene(cfg, setup, {0.99, 0.98, 0.98, 0.99, 0, 0}, sources);
  const CV s_wet = synthesize_clean(ctx, wet);
  CV sum = CV::Zero(s_wet.size());
  for (const auto& src : sources) {
    Scene<double> one = wet;
    one.sources = {src};
    sum += synthesize_clean(ctx, one);
  }
  const double superposition = (s_wet - sum).norm() / s_wet.norm();

  double snr = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    snr += oracle::snr_db(s_wet, synthesize_measurements(ctx, wet, NoiseSpec<double>{kSnrTarget, seed}));
  }
  snr /= 100;
  report(reduction < kSimulatorRelTol && superposition < kSimulatorRelTol && std::abs(snr - kSnrTarget) < kSnrTol,
         "simulator invariants",
         fmt("free-field rel err=%.1e, superposition rel err=%.1e (<%.0e); mean SNR=%.3f dB (30+-0.5)", reduction,
             superposition, kSimulatorRelTol, snr));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  ExperimentConfig cfg = ExperimentConfig::defaults();
  cfg.trials = 2;
  cfg.master_seed = 2024;
  const Setup setup = Setup::build(cfg);
  const auto root = std::filesystem::temp_directory_path() / "revloc_acceptance";
  std::filesystem::remove_all(root);
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / std::to_string(run);
    write_fixed_scene_outputs(dir / "fixed", cfg, setup, run_fixed_scene(cfg, setup));
    write_sweep_outputs(dir / "sweep", cfg, run_sweep(cfg, setup));
  }
  int compared = 0, differing = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root / "0")) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const auto other = root / "1" / std::filesystem::relative(e.path(), root / "0");
    ++compared;
    differing += !std::filesystem::exists(other) || slurp(e.path()) != slurp(other);
  }
  report(compared > 0 && differing == 0, "determinism",
         fmt("%d CSV files compared across two runs, %d differ", compared, differing));
  std::filesystem::remove_all(root);
}

}  // namespace

int main() {
  free_field_exactness();
  irls_oracle();
  omp_brute_force();
  dereverberation_efficacy();
  sweep_trend();
  simulator_invariants();
  determinism();
  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
