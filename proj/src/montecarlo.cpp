#include "nsdreg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nsdreg/gaussian.hpp"
#include "nsdreg/rng.hpp"

namespace nsdreg {

int worker_count() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("NSDREG_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

namespace {

RepRecord run_replication(const ExperimentConfig& config, int k) {
  Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(k));
  TimeModelSpec model = config.time_model;
  model.N = config.N;
  TimeSequence times = generate_times(model, rng);
  if (times.n1 == 0 && config.estimator == EstimatorKind::Stopped)
    throw std::runtime_error("replication " + std::to_string(k) +
                             ": no observations before the horizon");
  const std::size_t len = config.estimator == EstimatorKind::Stopped
                              ? static_cast<std::size_t>(times.n1)
                              : static_cast<std::size_t>(times.N);
  NoisePath w = NoisePath::zero(times.tau[len - 1] + 1.0);
  if (config.noise == NoiseKind::Fbm) {
    std::vector<double> grid(times.tau.begin(),
                             times.tau.begin() + static_cast<std::ptrdiff_t>(len));
    w = sample_fbm_at(grid, config.hurst, config.sigma2, rng);
  }
  RegressionSample sample = make_sample(config.a, std::move(times), w, config.estimator);
  EstimateRecord est = lse(sample, config.estimator);
  RepRecord rec;
  rec.k = k;
  rec.n1 = est.n1;
  rec.a_hat = est.a_hat;
  rec.scaled_error = est.scaled_error;
  rec.ratio = static_cast<double>(est.n1) / config.N;
  return rec;
}

// Aggregation is a fixed-order pass over the records, independent of the
// order in which replications completed.
ExperimentResult aggregate(const ExperimentConfig& config, std::vector<RepRecord> reps) {
  const double m = static_cast<double>(config.M);
  double sum_ahat = 0.0, sum_absdev = 0.0, sum_sq = 0.0;
  double sum_ratio = 0.0, sum_ratio_sq = 0.0;
  std::vector<double> scaled;
  scaled.reserve(reps.size());
  for (const RepRecord& r : reps) {
    sum_ahat += r.a_hat;
    sum_absdev += std::abs(r.a_hat - config.a);
    sum_sq += r.scaled_error * r.scaled_error;
    sum_ratio += r.ratio;
    sum_ratio_sq += r.ratio * r.ratio;
    scaled.push_back(r.scaled_error);
  }
  McSummary s;
  s.abs_mean_bias = std::abs(sum_ahat / m - config.a);
  s.l1_risk = sum_absdev / m;
  s.est_variance = sum_sq / m;
  s.theo_variance = theoretical_variance(config.hurst);
  s.ks_distance = ks_distance(std::move(scaled), s.theo_variance);
  s.ratio_mean = sum_ratio / m;
  s.ratio_sd = std::sqrt(std::max(0.0, sum_ratio_sq / m - s.ratio_mean * s.ratio_mean));
  s.config = config;
  return ExperimentResult{std::move(s), std::move(reps)};
}

void validate(const ExperimentConfig& config) {
  if (config.M < 1) throw std::invalid_argument("replication count must be >= 1");
  if (config.noise == NoiseKind::Fbm &&
      (config.hurst <= 0.0 || config.hurst >= 1.0))
    throw std::invalid_argument("hurst must lie in (0,1)");
}

}  // namespace

ExperimentResult run_experiment_serial(const ExperimentConfig& config) {
  validate(config);
  std::vector<RepRecord> reps(static_cast<std::size_t>(config.M));
  for (int k = 0; k < config.M; ++k)
    reps[static_cast<std::size_t>(k)] = run_replication(config, k);
  return aggregate(config, std::move(reps));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::vector<RepRecord> reps(static_cast<std::size_t>(config.M));
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (int k = 0; k < config.M; ++k) {
    try {
      reps[static_cast<std::size_t>(k)] = run_replication(config, k);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(config, std::move(reps));
}

double ks_distance(std::vector<double> samples, double variance) {
  if (samples.size() < 10) throw std::invalid_argument("ks_distance needs >= 10 samples");
  if (variance <= 0.0) throw std::invalid_argument("variance must be positive");
  std::sort(samples.begin(), samples.end());
  const double sd = std::sqrt(variance);
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-samples[i] / (sd * std::numbers::sqrt2));
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  return d;
}

Histogram histogram(std::span<const double> samples, int bins,
                    std::optional<std::pair<double, double>> range) {
  if (samples.empty()) throw std::invalid_argument("histogram of empty sample");
  if (bins < 1) throw std::invalid_argument("histogram needs bins >= 1");
  double lo, hi;
  if (range) {
    lo = range->first;
    hi = range->second;
    if (hi < lo) throw std::invalid_argument("histogram range reversed");
  } else {
    lo = *std::min_element(samples.begin(), samples.end());
    hi = *std::max_element(samples.begin(), samples.end());
  }
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double x : samples) {
    int idx = 0;
    if (width > 0.0) {
      idx = static_cast<int>((x - lo) / width);
      idx = std::clamp(idx, 0, bins - 1);
    }
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

}  // namespace nsdreg
