#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robreg/pipeline.hpp"
#include "robreg/synthetic.hpp"

namespace robreg {

struct BenchConfig {
  std::vector<double> rates{0.0, 0.5, 0.9};
  int n_points = 100;
  int trials = 40;
  double sigma = 0.01;
  bool known_scale = false;
  bool certify = false;
  bool ransac = false;
  int ransac_iters = 1000;
  std::uint64_t seed = 0;
  SourceKind source = SourceKind::unit_cube;
  double success_rotation_deg = 3.0;
  int threads = 0;  // 0: hardware concurrency, further capped by REG_THREADS
};

struct BenchRecord {
  std::uint64_t seed = 0;
  double outlier_rate = 0.0;
  bool failed = false;  // registration threw (insufficient inliers)
  double rotation_error_rad = 0.0;
  double translation_error = 0.0;
  double scale_error = 0.0;
  bool certified = false;
  StageTimings timings;
  int clique_size = 0;
  double clique_outlier_fraction = 0.0;
  std::optional<double> ransac_rotation_error_rad, ransac_translation_error, ransac_scale_error;
};

struct Quantiles {
  double q25 = 0, median = 0, q75 = 0, max = 0;
};

struct BenchAggregate {
  double outlier_rate = 0.0;
  int runs = 0, failures = 0, successes = 0, certified = 0;
  Quantiles rotation_error_rad, translation_error, scale_error, total_ms;
  std::optional<Quantiles> ransac_rotation_error_rad;
  std::optional<int> ransac_successes;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchRecord> records;
  std::vector<BenchAggregate> aggregates;
};

inline constexpr const char* kBenchSchemaVersion = "1.0";

// Trial t at rate index r uses seed config.seed + 1000 * r + t.
std::uint64_t trial_seed(const BenchConfig& cfg, std::size_t rate_index, int trial);
BenchRecord run_trial(const BenchConfig& cfg, double rate, std::uint64_t seed);
BenchReport run_bench(const BenchConfig& cfg);

// Linear interpolation between order statistics; infinities sort last.
Quantiles quantiles(std::vector<double> v);
int worker_count(int requested);

std::string to_json(const BenchReport& report, int indent = 2);
std::string format_table(const BenchReport& report);

}  // namespace robreg
