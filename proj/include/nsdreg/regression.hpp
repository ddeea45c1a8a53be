#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "nsdreg/gaussian.hpp"
#include "nsdreg/time_models.hpp"

namespace nsdreg {

enum class EstimatorKind { Stopped, Full };

// Observations Y_{tau_i} = a tau_i + eps_i with eps_i = W(tau_i) - W(tau_{i-1}),
// tau_0 = 0. Populated for i = 1..len where len is n1 (stopped) or N (full).
struct RegressionSample {
  double a = 0.0;
  TimeSequence times;
  std::vector<double> y;
  std::vector<double> eps;
  std::size_t len = 0;

  void write_csv(std::ostream& os) const;  // columns: i, tau_i, y_i, eps_i
};

struct EstimateRecord {
  double a_hat = 0.0;
  int n1 = 0;
  double scaled_error = 0.0;  // n1 (a_hat - a) stopped, N (a_hat - a) full
  EstimatorKind kind = EstimatorKind::Stopped;
};

class NoObservations : public std::runtime_error {
 public:
  NoObservations() : std::runtime_error("no observations before the horizon (n1 = 0)") {}
};

RegressionSample make_sample(double a, TimeSequence times, const NoisePath& w,
                             EstimatorKind kind = EstimatorKind::Stopped);

// a_hat = sum Y_i tau_i / sum tau_i^2 over the first n1 (stopped) or N (full)
// observations.
EstimateRecord lse(const RegressionSample& sample, EstimatorKind kind);

// Composite-trapezoid approximation of 3 * integral_0^1 (W_1 - W_s) ds.
double limit_functional(const NoisePath& w, int quadrature_points = 1 << 14);

// Variance 9/(2H+2) of the limit when W is unit-sigma fBm with Hurst index H.
double theoretical_variance(double hurst);

}  // namespace nsdreg
