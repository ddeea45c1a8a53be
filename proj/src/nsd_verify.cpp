#include "nsdreg/nsd_verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "nsdreg/gaussian.hpp"

namespace nsdreg {

std::vector<SuperadditiveTest> builtin_tests(int m) {
  if (m < 2 || m > 5)
    throw std::invalid_argument("built-in battery requires 2 <= m <= 5");
  std::vector<SuperadditiveTest> tests;
  tests.push_back({"product_pair", m, [](std::span<const double> x) {
                     return x[0] * x[1];
                   }});
  tests.push_back({"sum_squared", m, [](std::span<const double> x) {
                     double s = 0.0;
                     for (double v : x) s += v;
                     return s * s;
                   }});
  tests.push_back({"min", m, [](std::span<const double> x) {
                     return *std::min_element(x.begin(), x.end());
                   }});
  tests.push_back({"exp_sum", m, [](std::span<const double> x) {
                     double s = 0.0;
                     for (double v : x) s += v;
                     return std::exp(s);
                   }});
  return tests;
}

namespace {

// Equicorrelated block factor. The boundary rho = -1/(B-1) (in particular
// B = 5 at rho = -1/4) is singular PSD, so the eigendecomposition root is
// used instead of the strict Cholesky.
CholFactor block_factor(int block, double rho) {
  if (block < 1) throw std::invalid_argument("block size must be positive");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(block, block, rho);
  sigma.diagonal().setOnes();
  return psd_sqrt_factor(sigma);
}

}  // namespace

SequenceGenerator nsd_lognormal_generator(int block, double rho, int N) {
  const double mu = -std::log(static_cast<double>(N)) - 0.5;
  auto factor = std::make_shared<CholFactor>(block_factor(block, rho));
  return [factor, mu, block](Rng& rng, std::span<double> out) {
    std::normal_distribution<double> normal;
    const int B = block;
    Eigen::VectorXd z(B);
    std::size_t written = 0;
    while (written < out.size()) {
      for (int i = 0; i < B; ++i) z[i] = normal(rng);
      Eigen::VectorXd x = factor->lower * z;
      for (int i = 0; i < B && written < out.size(); ++i)
        out[written++] = std::exp(mu + x[i]);
    }
  };
}

SequenceGenerator gaussian_block_generator(int block, double rho) {
  auto factor = std::make_shared<CholFactor>(block_factor(block, rho));
  return [factor, block](Rng& rng, std::span<double> out) {
    std::normal_distribution<double> normal;
    const int B = block;
    Eigen::VectorXd z(B);
    std::size_t written = 0;
    while (written < out.size()) {
      for (int i = 0; i < B; ++i) z[i] = normal(rng);
      Eigen::VectorXd x = factor->lower * z;
      for (int i = 0; i < B && written < out.size(); ++i) out[written++] = x[i];
    }
  };
}

std::vector<NsdReport> check_nsd(const SequenceGenerator& gen,
                                 const std::vector<SuperadditiveTest>& tests, int m,
                                 std::int64_t draws, Rng& rng) {
  if (m < 1 || m > 5) throw std::invalid_argument("check_nsd requires m <= 5");
  if (draws < 2) throw std::invalid_argument("check_nsd requires draws >= 2");
  for (const auto& t : tests)
    if (t.arity != m) throw std::invalid_argument("unknown test arity for m");

  const std::size_t nt = tests.size();
  std::vector<double> sum_l(nt, 0.0), sumsq_l(nt, 0.0);
  std::vector<double> sum_r(nt, 0.0), sumsq_r(nt, 0.0);
  std::vector<double> x(static_cast<std::size_t>(m));
  std::vector<double> xstar(static_cast<std::size_t>(m));
  std::vector<double> scratch(static_cast<std::size_t>(m));
  for (std::int64_t d = 0; d < draws; ++d) {
    gen(rng, x);
    // X*: one coordinate from each of m independent draws; equal marginals
    for (int i = 0; i < m; ++i) {
      gen(rng, scratch);
      xstar[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(i)];
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const double vl = tests[t].eval(x);
      const double vr = tests[t].eval(xstar);
      sum_l[t] += vl;
      sumsq_l[t] += vl * vl;
      sum_r[t] += vr;
      sumsq_r[t] += vr * vr;
    }
  }
  std::vector<NsdReport> reports;
  const double n = static_cast<double>(draws);
  for (std::size_t t = 0; t < nt; ++t) {
    NsdReport r;
    r.test = tests[t].name;
    r.draws = draws;
    r.lhs = sum_l[t] / n;
    r.rhs = sum_r[t] / n;
    const double var_l = std::max(0.0, sumsq_l[t] / n - r.lhs * r.lhs);
    const double var_r = std::max(0.0, sumsq_r[t] / n - r.rhs * r.rhs);
    r.stderr_est = std::sqrt((var_l + var_r) / n);
    r.pass = r.lhs <= r.rhs + 3.0 * r.stderr_est;
    reports.push_back(std::move(r));
  }
  return reports;
}

RosenthalReport check_rosenthal(const SequenceGenerator& gen, double p, int n,
                                std::int64_t draws, Rng& rng, double mean_duration) {
  if (p <= 2.0 || p > 4.0) throw std::invalid_argument("rosenthal requires p in (2, 4]");
  if (n < 1 || draws < 2) throw std::invalid_argument("rosenthal needs n >= 1, draws >= 2");

  std::vector<double> t(static_cast<std::size_t>(n));
  double sum_max = 0.0;
  double sum_absp = 0.0;                    // pooled E|X|^p
  double sum_x2 = 0.0, sumsq_x2 = 0.0;      // pooled E X^2
  double sum_sn2 = 0.0, sumsq_sn2 = 0.0;    // E S_n^2
  for (std::int64_t d = 0; d < draws; ++d) {
    gen(rng, t);
    double s = 0.0, maxabs = 0.0;
    for (int j = 0; j < n; ++j) {
      const double xj = t[static_cast<std::size_t>(j)] - mean_duration;
      s += xj;
      maxabs = std::max(maxabs, std::abs(s));
      sum_absp += std::pow(std::abs(xj), p);
      const double x2 = xj * xj;
      sum_x2 += x2;
      sumsq_x2 += x2 * x2;
    }
    sum_max += std::pow(maxabs, p);
    const double sn2 = s * s;
    sum_sn2 += sn2;
    sumsq_sn2 += sn2 * sn2;
  }
  const double nd = static_cast<double>(draws);
  const double pooled = nd * n;
  RosenthalReport r;
  r.p = p;
  r.n = n;
  r.draws = draws;
  r.lhs = sum_max / nd;
  const double e_absp = sum_absp / pooled;
  const double e_x2 = sum_x2 / pooled;
  const double constant = 2.0 * std::pow(15.0 * p / std::log(p), p);
  r.rhs = constant * (n * e_absp + std::pow(n * e_x2, p / 2.0));
  r.pass = r.lhs <= r.rhs;

  r.var_lhs = sum_sn2 / nd;
  r.var_rhs = n * e_x2;
  const double var_sn2 = std::max(0.0, sumsq_sn2 / nd - r.var_lhs * r.var_lhs);
  const double var_x2 = std::max(0.0, sumsq_x2 / pooled - e_x2 * e_x2);
  const double se_rhs = n * std::sqrt(var_x2 / pooled);
  r.var_stderr = std::sqrt(var_sn2 / nd + se_rhs * se_rhs);
  r.var_pass = r.var_lhs <= r.var_rhs + 3.0 * r.var_stderr;
  return r;
}

std::vector<NsdReport> check_monotone_closure(int m, double rho, std::int64_t draws,
                                              Rng& rng) {
  if (rho > 0.0) throw std::invalid_argument("monotone closure check expects rho <= 0");
  SequenceGenerator pre = gaussian_block_generator(m, rho);
  SequenceGenerator transformed = [pre](Rng& r, std::span<double> out) {
    pre(r, out);
    for (double& v : out) v = std::exp(v);
  };
  return check_nsd(transformed, builtin_tests(m), m, draws, rng);
}

double mixed_second_difference(const SuperadditiveTest& test,
                               std::span<const double> x, int i, int j, double h) {
  if (i == j) throw std::invalid_argument("mixed difference needs i != j");
  std::vector<double> p(x.begin(), x.end());
  auto at = [&](double di, double dj) {
    p.assign(x.begin(), x.end());
    p[static_cast<std::size_t>(i)] += di;
    p[static_cast<std::size_t>(j)] += dj;
    return test.eval(p);
  };
  return (at(h, h) - at(h, 0.0) - at(0.0, h) + at(0.0, 0.0)) / (h * h);
}

}  // namespace nsdreg
