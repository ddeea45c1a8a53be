#include "nsdreg/time_models.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "nsdreg/gaussian.hpp"

namespace nsdreg {

void TimeModelSpec::validate() const {
  if (N < 2) throw std::invalid_argument("sampling rate N must be >= 2");
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
  if (kind == TimeModelKind::NsdLognormal) {
    if (rho > 0.0) throw std::invalid_argument("nsd-lognormal requires rho <= 0");
    if (block < 1) throw std::invalid_argument("block size must be positive");
    // The boundary rho = -1/(B-1) gives a singular but valid (PSD) block
    // covariance; the default B = 5, rho = -1/4 sits exactly there.
    if (block >= 2 && rho < -1.0 / (block - 1))
      throw std::invalid_argument("rho violates block positive-semidefiniteness");
  }
}

int count_n1(std::span<const double> tau, double T) {
  if (tau.empty() || tau.back() <= T)
    throw std::invalid_argument("time sequence does not exceed T; extend first");
  int n = 0;
  for (double v : tau) {
    if (v <= T) ++n;
    else break;
  }
  return n;
}

namespace {

TimeSequence finish(std::vector<double> t, const TimeModelSpec& spec) {
  TimeSequence seq;
  seq.t = std::move(t);
  seq.tau.resize(seq.t.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < seq.t.size(); ++i) {
    acc += seq.t[i];
    seq.tau[i] = acc;
  }
  seq.n1 = count_n1(seq.tau, spec.horizon);
  seq.N = spec.N;
  seq.model = spec;
  return seq;
}

}  // namespace

TimeSequence gen_nsd_lognormal(const TimeModelSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.kind != TimeModelKind::NsdLognormal)
    throw std::invalid_argument("spec kind is not nsd-lognormal");
  const double mu = -std::log(static_cast<double>(spec.N)) - 0.5;  // E t = 1/N
  std::normal_distribution<double> normal;

  if (spec.strict) {
    // One global block: at rho = -1/4 this is indefinite beyond dimension 5
    // and cholesky() reports the failure instead of repairing it.
    const int n0 = 2 * spec.N;
    Eigen::MatrixXd global = Eigen::MatrixXd::Constant(n0, n0, spec.rho);
    global.diagonal().setOnes();
    CholFactor factor = cholesky(CovSpec::explicit_cov(std::move(global)));
    Eigen::VectorXd x =
        sample_mvn(factor, Eigen::VectorXd::Constant(n0, mu), rng);
    std::vector<double> t(static_cast<std::size_t>(n0));
    for (int i = 0; i < n0; ++i) t[static_cast<std::size_t>(i)] = std::exp(x[i]);
    return finish(std::move(t), spec);
  }

  const int B = spec.block;
  // Build the block covariance directly: CovSpec::constant_correlation insists
  // on strict positive definiteness, while the boundary rho = -1/(B-1) is a
  // legitimate degenerate Gaussian handled by the eigendecomposition root.
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(B, B, spec.rho);
  sigma.diagonal().setOnes();
  CholFactor factor = psd_sqrt_factor(sigma);
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(B, mu);
  std::vector<double> t;
  double acc = 0.0;
  auto blocks = [&](int count) {
    for (int b = 0; b < count; ++b) {
      Eigen::VectorXd x = sample_mvn(factor, mean, rng);
      for (int i = 0; i < B; ++i) {
        const double d = std::exp(x[i]);
        t.push_back(d);
        acc += d;
      }
    }
  };
  blocks((2 * spec.N + B - 1) / B);
  while (acc <= spec.horizon) blocks((spec.N + B - 1) / B);
  return finish(std::move(t), spec);
}

TimeSequence gen_jittered(const TimeModelSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.kind != TimeModelKind::Jittered)
    throw std::invalid_argument("spec kind is not jittered");
  const int N = spec.N;
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::gamma_distribution<double> gamma2(2.0, 1.0);
  auto draw_jitter = [&]() -> double {
    switch (spec.jitter) {
      case JitterDist::None:
        return 0.0;
      case JitterDist::Uniform:
        return uni(rng);
      case JitterDist::ScaledBeta: {
        const double g1 = gamma2(rng), g2 = gamma2(rng);
        return g1 / (g1 + g2) - 0.5;  // Beta(2,2) centered
      }
    }
    throw std::invalid_argument("unsupported jitter distribution");
  };
  // tau_j = j/N + X_j/N; j runs far enough that tau exceeds the horizon.
  const int count = static_cast<int>(std::ceil(spec.horizon * N)) + 1;
  std::vector<double> tau(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j)
    tau[static_cast<std::size_t>(j - 1)] = (j + draw_jitter()) / N;
  std::vector<double> t(tau.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    t[i] = tau[i] - prev;
    prev = tau[i];
  }
  return finish(std::move(t), spec);
}

TimeSequence gen_fixed(const TimeModelSpec& spec) {
  spec.validate();
  if (spec.kind != TimeModelKind::Fixed)
    throw std::invalid_argument("spec kind is not fixed");
  TimeSequence seq;
  seq.t.assign(static_cast<std::size_t>(spec.N), 1.0 / spec.N);
  seq.tau.resize(seq.t.size());
  for (int j = 1; j <= spec.N; ++j)
    seq.tau[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) / spec.N;
  seq.n1 = spec.N;  // tau_N = 1 counts
  seq.N = spec.N;
  seq.model = spec;
  return seq;
}

TimeSequence gen_iid_renewal(const TimeModelSpec& spec, Rng& rng) {
  spec.validate();
  if (spec.kind != TimeModelKind::IidRenewal)
    throw std::invalid_argument("spec kind is not iid-renewal");
  std::exponential_distribution<double> expo(static_cast<double>(spec.N));
  const double mu = -std::log(static_cast<double>(spec.N)) - 0.5;
  std::normal_distribution<double> normal(mu, 1.0);
  auto draw = [&]() -> double {
    switch (spec.renewal) {
      case RenewalDist::Exponential:
        return expo(rng);
      case RenewalDist::Lognormal:
        return std::exp(normal(rng));
    }
    throw std::invalid_argument("unsupported renewal distribution");
  };
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(2 * spec.N));
  double acc = 0.0;
  for (int i = 0; i < 2 * spec.N; ++i) {
    t.push_back(draw());
    acc += t.back();
  }
  while (acc <= spec.horizon) {
    t.push_back(draw());
    acc += t.back();
  }
  return finish(std::move(t), spec);
}

TimeSequence generate_times(const TimeModelSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case TimeModelKind::NsdLognormal:
      return gen_nsd_lognormal(spec, rng);
    case TimeModelKind::Jittered:
      return gen_jittered(spec, rng);
    case TimeModelKind::Fixed:
      return gen_fixed(spec);
    case TimeModelKind::IidRenewal:
      return gen_iid_renewal(spec, rng);
  }
  throw std::invalid_argument("unknown time model kind");
}

void TimeSequence::write_csv(std::ostream& os) const {
  os << "j,t_j,tau_j\n";
  char buf[64];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i + 1, t[i], tau[i]);
    os << buf;
  }
}

}  // namespace nsdreg
