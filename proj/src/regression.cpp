#include "nsdreg/regression.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace nsdreg {

RegressionSample make_sample(double a, TimeSequence times, const NoisePath& w,
                             EstimatorKind kind) {
  const std::size_t len = kind == EstimatorKind::Stopped
                              ? static_cast<std::size_t>(times.n1)
                              : static_cast<std::size_t>(times.N);
  if (len > times.tau.size())
    throw std::invalid_argument("time sequence shorter than requested design");
  RegressionSample s;
  s.a = a;
  s.y.resize(len);
  s.eps.resize(len);
  double w_prev = 0.0;  // W(tau_0) with tau_0 = 0; fbm kinds return 0 there
  if (len > 0) w_prev = w(0.0);
  for (std::size_t i = 0; i < len; ++i) {
    const double w_cur = w(times.tau[i]);
    s.eps[i] = w_cur - w_prev;
    s.y[i] = a * times.tau[i] + s.eps[i];
    w_prev = w_cur;
  }
  s.times = std::move(times);
  s.len = len;
  return s;
}

EstimateRecord lse(const RegressionSample& sample, EstimatorKind kind) {
  const std::size_t len = kind == EstimatorKind::Stopped
                              ? static_cast<std::size_t>(sample.times.n1)
                              : static_cast<std::size_t>(sample.times.N);
  if (kind == EstimatorKind::Stopped && sample.times.n1 == 0) throw NoObservations();
  if (len > sample.len)
    throw std::invalid_argument("sample not populated for requested estimator kind");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    num += sample.y[i] * sample.times.tau[i];
    den += sample.times.tau[i] * sample.times.tau[i];
  }
  if (den <= 0.0) throw NoObservations();
  EstimateRecord rec;
  rec.a_hat = num / den;
  rec.n1 = sample.times.n1;
  rec.kind = kind;
  const double scale = kind == EstimatorKind::Stopped
                           ? static_cast<double>(sample.times.n1)
                           : static_cast<double>(sample.times.N);
  rec.scaled_error = scale * (rec.a_hat - sample.a);
  return rec;
}

double limit_functional(const NoisePath& w, int quadrature_points) {
  if (quadrature_points < 2)
    throw std::invalid_argument("quadrature needs at least 2 points");
  if (w.domain_end() < 1.0)
    throw std::invalid_argument("noise path domain does not cover [0, 1]");
  const int n = quadrature_points;
  const double h = 1.0 / (n - 1);
  double integral = 0.5 * (w(0.0) + w(1.0));
  for (int i = 1; i < n - 1; ++i) integral += w(i * h);
  integral *= h;
  return 3.0 * (w(1.0) - integral);
}

double theoretical_variance(double hurst) {
  if (hurst <= 0.0 || hurst >= 1.0)
    throw std::invalid_argument("hurst must lie in (0,1)");
  return 9.0 / (2.0 * hurst + 2.0);
}

void RegressionSample::write_csv(std::ostream& os) const {
  os << "i,tau_i,y_i,eps_i\n";
  char buf[96];
  for (std::size_t i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i + 1, times.tau[i],
                  y[i], eps[i]);
    os << buf;
  }
}

}  // namespace nsdreg
