#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "nsdreg/gaussian.hpp"
#include "nsdreg/regression.hpp"
#include "nsdreg/time_models.hpp"

using namespace nsdreg;

namespace {

TimeSequence nsd_times(int n, Rng& rng) {
  TimeModelSpec spec;
  spec.kind = TimeModelKind::NsdLognormal;
  spec.N = n;
  return gen_nsd_lognormal(spec, rng);
}

}  // namespace

TEST_CASE("make_sample with zero noise") {
  Rng rng(1);
  TimeSequence times = nsd_times(50, rng);
  RegressionSample s = make_sample(2.5, times, NoisePath::zero(10.0));
  REQUIRE(s.len == static_cast<std::size_t>(s.times.n1));
  for (std::size_t i = 0; i < s.len; ++i) {
    CHECK(s.eps[i] == 0.0);
    CHECK(s.y[i] == 2.5 * s.times.tau[i]);
  }
}

TEST_CASE("residuals telescope to W(tau_n1) - W(0)") {
  Rng rng(2);
  TimeSequence times = nsd_times(200, rng);
  std::vector<double> grid(times.tau.begin(), times.tau.begin() + times.n1);
  NoisePath w = sample_fbm_at(grid, 0.3, 1.0, rng);
  RegressionSample s = make_sample(1.0, times, w);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.len; ++i) sum += s.eps[i];
  CHECK(sum == doctest::Approx(w(s.times.tau[s.len - 1])).epsilon(1e-10));
}

TEST_CASE("a = 0 gives y = eps") {
  Rng rng(3);
  TimeSequence times = nsd_times(50, rng);
  std::vector<double> grid(times.tau.begin(), times.tau.begin() + times.n1);
  NoisePath w = sample_fbm_at(grid, 0.6, 1.0, rng);
  RegressionSample s = make_sample(0.0, times, w);
  CHECK(s.y == s.eps);
}

TEST_CASE("lse direct formula arithmetic") {
  TimeSequence times;
  times.t = {0.5, 0.5};
  times.tau = {0.5, 1.0};
  times.n1 = 2;
  times.N = 2;
  RegressionSample s;
  s.a = 1.0;
  s.times = times;
  s.y = {0.6, 1.1};
  s.eps = {0.1, 0.0};
  s.len = 2;
  EstimateRecord rec = lse(s, EstimatorKind::Stopped);
  CHECK(rec.a_hat == doctest::Approx(1.12).epsilon(1e-15));
  CHECK(rec.scaled_error == doctest::Approx(2 * (1.12 - 1.0)).epsilon(1e-12));
}

TEST_CASE("zero noise recovers a exactly") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    TimeSequence times = nsd_times(100, rng);
    RegressionSample s = make_sample(3.7, times, NoisePath::zero(10.0));
    EstimateRecord rec = lse(s, EstimatorKind::Stopped);
    CHECK(std::abs(rec.a_hat - 3.7) < 1e-12);
  }
}

TEST_CASE("estimator-difference identity on random samples") {
  // a_hat - a = sum tau_i (W_i - W_{i-1}) / sum tau_i^2, both estimator kinds
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    TimeSequence times = nsd_times(30, rng);
    const std::size_t len = times.t.size();
    std::vector<double> grid(times.tau.begin(), times.tau.begin() + len);
    NoisePath w = sample_fbm_at(grid, 0.4, 1.0, rng);
    for (EstimatorKind kind : {EstimatorKind::Stopped, EstimatorKind::Full}) {
      RegressionSample s = make_sample(1.3, times, w, kind);
      const std::size_t m = kind == EstimatorKind::Stopped
                                ? static_cast<std::size_t>(s.times.n1)
                                : static_cast<std::size_t>(s.times.N);
      if (m == 0) continue;
      double num = 0.0, den = 0.0, w_prev = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double w_cur = w(s.times.tau[i]);
        num += s.times.tau[i] * (w_cur - w_prev);
        den += s.times.tau[i] * s.times.tau[i];
        w_prev = w_cur;
      }
      EstimateRecord rec = lse(s, kind);
      CHECK(rec.a_hat - s.a == doctest::Approx(num / den).epsilon(1e-10));
    }
  }
}

TEST_CASE("summation by parts identity") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    TimeSequence times = nsd_times(30, rng);
    const std::size_t n = static_cast<std::size_t>(times.n1);
    if (n == 0) continue;
    std::vector<double> grid(times.tau.begin(), times.tau.begin() + n);
    NoisePath w = sample_fbm_at(grid, 0.5, 1.0, rng);
    double lhs = 0.0, rhs_sum = 0.0, w_prev = 0.0, tau_prev = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w_cur = w(times.tau[j]);
      lhs += times.tau[j] * (w_cur - w_prev);
      rhs_sum += w_prev * (times.tau[j] - tau_prev);
      w_prev = w_cur;
      tau_prev = times.tau[j];
    }
    const double rhs = times.tau[n - 1] * w(times.tau[n - 1]) - rhs_sum;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("scale equivariance and shift") {
  Rng rng(7);
  TimeSequence times = nsd_times(100, rng);
  std::vector<double> grid(times.tau.begin(), times.tau.begin() + times.n1);
  NoisePath w = sample_fbm_at(grid, 0.5, 1.0, rng);
  RegressionSample s = make_sample(1.0, times, w);
  EstimateRecord base = lse(s, EstimatorKind::Stopped);

  RegressionSample scaled = s;
  for (double& v : scaled.y) v *= 3.0;
  EstimateRecord rec3 = lse(scaled, EstimatorKind::Stopped);
  CHECK(rec3.a_hat == doctest::Approx(3.0 * base.a_hat).epsilon(1e-12));

  RegressionSample shifted = s;
  const double delta = 0.75;
  for (std::size_t i = 0; i < shifted.len; ++i)
    shifted.y[i] += delta * shifted.times.tau[i];
  EstimateRecord recd = lse(shifted, EstimatorKind::Stopped);
  CHECK(recd.a_hat == doctest::Approx(base.a_hat + delta).epsilon(1e-12));
}

TEST_CASE("empty sample is a hard error") {
  TimeSequence times;
  times.t = {2.0};
  times.tau = {2.0};
  times.n1 = 0;
  times.N = 2;
  RegressionSample s = make_sample(1.0, times, NoisePath::zero(10.0));
  CHECK_THROWS_AS(lse(s, EstimatorKind::Stopped), NoObservations);
}

TEST_CASE("limit functional quadrature oracles") {
  NoisePath t2 = NoisePath::deterministic("t2", [](double t) { return t * t; }, 2.0);
  CHECK(limit_functional(t2, 10000) == doctest::Approx(2.0).epsilon(1e-6));
  NoisePath c = NoisePath::deterministic("const", [](double) { return 4.2; }, 2.0);
  CHECK(std::abs(limit_functional(c)) < 1e-9);  // exact up to quadrature rounding
  NoisePath lin = NoisePath::deterministic("t", [](double t) { return t; }, 2.0);
  CHECK(limit_functional(lin) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK_THROWS_AS(limit_functional(NoisePath::zero(0.5)), std::invalid_argument);
  CHECK_THROWS_AS(limit_functional(t2, 1), std::invalid_argument);
}

TEST_CASE("theoretical variance values from the asymptotic law") {
  CHECK(theoretical_variance(0.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(theoretical_variance(0.1) == doctest::Approx(9.0 / 2.2).epsilon(1e-15));
  CHECK(theoretical_variance(0.9) == doctest::Approx(9.0 / 3.8).epsilon(1e-15));
  CHECK_THROWS_AS(theoretical_variance(0.0), std::invalid_argument);
  CHECK_THROWS_AS(theoretical_variance(1.0), std::invalid_argument);
}

TEST_CASE("per-path convergence toward the limit functional, both estimators") {
  // reduced version of the theorem check: W(t) = t^2, a = 1, 10 seeds
  NoisePath w = NoisePath::deterministic("t2", [](double t) { return t * t; }, 8.0);
  const double limit = limit_functional(w);
  REQUIRE(limit == doctest::Approx(2.0).epsilon(1e-6));
  for (EstimatorKind kind : {EstimatorKind::Stopped, EstimatorKind::Full}) {
    int improved = 0;
    for (int seed = 0; seed < 10; ++seed) {
      double first_dev = 0.0, last_dev = 0.0;
      for (int n : {250, 4000}) {
        Rng rng = make_stream(400 + seed, static_cast<std::uint64_t>(n));
        TimeSequence times = nsd_times(n, rng);
        RegressionSample s = make_sample(1.0, times, w, kind);
        EstimateRecord rec = lse(s, kind);
        (n == 250 ? first_dev : last_dev) = std::abs(rec.scaled_error - limit);
      }
      if (last_dev < first_dev) ++improved;
      CHECK(last_dev < 0.3);
    }
    CHECK(improved >= 8);
  }
}

TEST_CASE("sample csv serialization") {
  TimeModelSpec spec;
  spec.kind = TimeModelKind::Fixed;
  spec.N = 3;
  RegressionSample s = make_sample(1.0, gen_fixed(spec), NoisePath::zero(2.0));
  std::ostringstream os;
  s.write_csv(os);
  CHECK(os.str().find("i,tau_i,y_i,eps_i") == 0);
  CHECK(os.str().find("3,1,1,0") != std::string::npos);
}
