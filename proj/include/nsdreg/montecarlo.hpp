#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsdreg/regression.hpp"
#include "nsdreg/time_models.hpp"

namespace nsdreg {

enum class NoiseKind { Fbm, Zero };

struct ExperimentConfig {
  int N = 100;
  double hurst = 0.5;
  double a = 1.0;
  int M = 1000;  // replications
  TimeModelSpec time_model;
  std::uint64_t seed = 0;
  EstimatorKind estimator = EstimatorKind::Stopped;
  NoiseKind noise = NoiseKind::Fbm;
  double sigma2 = 1.0;
};

struct RepRecord {
  int k = 0;
  int n1 = 0;
  double a_hat = 0.0;
  double scaled_error = 0.0;
  double ratio = 0.0;  // n1 / N
};

struct McSummary {
  double abs_mean_bias = 0.0;
  double l1_risk = 0.0;
  double est_variance = 0.0;   // mean of scaled_error^2, denominator M
  double theo_variance = 0.0;  // 9/(2H+2)
  double ks_distance = 0.0;    // scaled errors vs Normal(0, theo_variance)
  double ratio_mean = 0.0;
  double ratio_sd = 0.0;
  ExperimentConfig config;
};

struct ExperimentResult {
  McSummary summary;
  std::vector<RepRecord> reps;
};

// M independent replications: fresh time sequence, fresh noise sampled at
// the realized tau grid, LSE. Per-replication streams are derived from the
// root seed by replication index, so worker count never changes the output.
// Parallel over replications (OpenMP, capped by NSDREG_THREADS).
ExperimentResult run_experiment(const ExperimentConfig& config);
// Serial reference; bit-identical to run_experiment.
ExperimentResult run_experiment_serial(const ExperimentConfig& config);

// Sup-distance between the empirical CDF and Normal(0, variance).
double ks_distance(std::vector<double> samples, double variance);

struct Histogram {
  std::vector<double> edges;        // bins + 1 entries
  std::vector<std::size_t> counts;  // sums to the sample count
};

Histogram histogram(std::span<const double> samples, int bins,
                    std::optional<std::pair<double, double>> range = std::nullopt);

// Worker cap: min(omp max threads, NSDREG_THREADS when set).
int worker_count();

}  // namespace nsdreg
