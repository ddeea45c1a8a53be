// Compares the OpenMP replication engine against the serial reference and
// checks that both produce identical summaries.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "nsdreg/montecarlo.hpp"

using namespace nsdreg;

namespace {

double time_run(ExperimentResult (*fn)(const ExperimentConfig&),
                const ExperimentConfig& cfg, ExperimentResult& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = fn(cfg);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  cfg.N = 500;
  cfg.hurst = 0.1;
  cfg.M = 100;
  cfg.seed = 7;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (!std::strcmp(argv[i], "--n")) cfg.N = std::atoi(argv[i + 1]);
    if (!std::strcmp(argv[i], "--m")) cfg.M = std::atoi(argv[i + 1]);
    if (!std::strcmp(argv[i], "--hurst")) cfg.hurst = std::atof(argv[i + 1]);
  }

  ExperimentResult serial, parallel;
  const double ts = time_run(run_experiment_serial, cfg, serial);
  const double tp = time_run(run_experiment, cfg, parallel);

  const bool identical =
      serial.summary.est_variance == parallel.summary.est_variance &&
      serial.summary.abs_mean_bias == parallel.summary.abs_mean_bias &&
      serial.summary.l1_risk == parallel.summary.l1_risk &&
      serial.summary.ks_distance == parallel.summary.ks_distance;

  std::printf("N=%d M=%d H=%.2f workers=%d\n", cfg.N, cfg.M, cfg.hurst,
              worker_count());
  std::printf("serial   %.3f s\n", ts);
  std::printf("parallel %.3f s  (speedup %.2fx)\n", tp, ts / tp);
  std::printf("summaries bit-identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
