#include "nsdreg/gaussian.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

namespace nsdreg {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_fbm_params(double hurst, double sigma2) {
  require(hurst > 0.0 && hurst < 1.0, "hurst must lie in (0,1)");
  require(sigma2 > 0.0, "sigma2 must be positive");
}

void check_grid(const std::vector<double>& grid) {
  require(!grid.empty(), "grid must be non-empty");
  require(grid.front() > 0.0, "grid entries must be strictly positive");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], "grid must be strictly increasing");
}

}  // namespace

double fbm_cov(double hurst, double sigma2, double s, double t) {
  check_fbm_params(hurst, sigma2);
  require(s >= 0.0 && t >= 0.0, "fbm_cov requires nonnegative times");
  const double h2 = 2.0 * hurst;
  return 0.5 * sigma2 *
         (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

CovSpec CovSpec::constant_correlation(int m, double rho, double variance) {
  require(m >= 1, "dimension must be positive");
  require(variance > 0.0, "variance must be positive");
  if (m > 1)
    require(rho > -1.0 / (m - 1), "constant correlation requires rho > -1/(m-1)");
  CovSpec spec;
  spec.mean = Eigen::VectorXd::Zero(m);
  spec.kind = ConstantCorrelation{m, rho, variance};
  return spec;
}

CovSpec CovSpec::explicit_cov(Eigen::MatrixXd sigma) {
  require(sigma.rows() == sigma.cols() && sigma.rows() >= 1,
          "explicit covariance must be square");
  require(sigma.isApprox(sigma.transpose(), 1e-12),
          "explicit covariance must be symmetric");
  require((sigma.diagonal().array() > 0.0).all(),
          "explicit covariance diagonal must be strictly positive");
  CovSpec spec;
  spec.mean = Eigen::VectorXd::Zero(sigma.rows());
  spec.kind = ExplicitCov{std::move(sigma)};
  return spec;
}

CovSpec CovSpec::fbm(double hurst, double sigma2, std::vector<double> grid) {
  check_fbm_params(hurst, sigma2);
  check_grid(grid);
  CovSpec spec;
  spec.mean = Eigen::VectorXd::Zero(static_cast<int>(grid.size()));
  spec.kind = FbmCov{hurst, sigma2, std::move(grid)};
  return spec;
}

int CovSpec::dimension() const {
  return std::visit(
      [](const auto& k) -> int {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ConstantCorrelation>)
          return k.dim;
        else if constexpr (std::is_same_v<T, ExplicitCov>)
          return static_cast<int>(k.sigma.rows());
        else
          return static_cast<int>(k.grid.size());
      },
      kind);
}

Eigen::MatrixXd CovSpec::materialize() const {
  if (const auto* cc = std::get_if<ConstantCorrelation>(&kind)) {
    Eigen::MatrixXd sigma =
        Eigen::MatrixXd::Constant(cc->dim, cc->dim, cc->rho * cc->variance);
    sigma.diagonal().setConstant(cc->variance);
    return sigma;
  }
  if (const auto* ex = std::get_if<ExplicitCov>(&kind)) return ex->sigma;
  const auto& fb = std::get<FbmCov>(kind);
  const int n = static_cast<int>(fb.grid.size());
  const double h2 = 2.0 * fb.hurst;
  Eigen::Map<const Eigen::ArrayXd> tau(fb.grid.data(), n);
  Eigen::ArrayXd tau2h = tau.pow(h2);
  Eigen::MatrixXd sigma(n, n);
  for (int j = 0; j < n; ++j) {
    auto col = sigma.col(j).tail(n - j).array();
    col = 0.5 * fb.sigma2 *
          (tau2h.tail(n - j) + tau2h[j] - (tau.tail(n - j) - tau[j]).pow(h2));
  }
  sigma.triangularView<Eigen::StrictlyUpper>() =
      sigma.triangularView<Eigen::StrictlyLower>().transpose();
  return sigma;
}

NotPositiveDefinite::NotPositiveDefinite(int pivot, double value)
    : std::runtime_error("covariance not positive definite: pivot " +
                         std::to_string(pivot) + " = " + std::to_string(value)),
      pivot_(pivot) {}

namespace {

// Reference factorization; used only to locate the failing pivot once the
// fast path has reported an indefinite matrix.
int find_failing_pivot(const Eigen::MatrixXd& sigma, double tol) {
  const int n = static_cast<int>(sigma.rows());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double pivot = sigma(j, j) - L.row(j).head(j).squaredNorm();
    if (pivot <= tol) return j;
    L(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < n; ++i)
      L(i, j) = (sigma(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }
  return n - 1;
}

}  // namespace

CholFactor cholesky(const CovSpec& spec) {
  Eigen::MatrixXd sigma = spec.materialize();
  const double tol = 1e-12 * sigma.diagonal().maxCoeff();
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sigma);  // in place
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite(find_failing_pivot(spec.materialize(), tol), 0.0);
  Eigen::MatrixXd lower = llt.matrixL();
  for (int j = 0; j < lower.rows(); ++j) {
    const double pivot = lower(j, j) * lower(j, j);
    if (pivot <= tol) throw NotPositiveDefinite(j, pivot);
  }
  return CholFactor{std::move(lower)};
}

CholFactor psd_sqrt_factor(const Eigen::MatrixXd& sigma) {
  const double tol = 1e-12 * sigma.diagonal().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_sqrt_factor: eigendecomposition failed");
  Eigen::VectorXd evals = es.eigenvalues();
  for (int i = 0; i < evals.size(); ++i) {
    if (evals[i] < -tol) throw NotPositiveDefinite(i, evals[i]);
    if (evals[i] < 0.0) evals[i] = 0.0;
  }
  return CholFactor{es.eigenvectors() *
                    evals.cwiseSqrt().asDiagonal() *
                    es.eigenvectors().transpose()};
}

Eigen::VectorXd sample_mvn(const CholFactor& factor, const Eigen::VectorXd& mean,
                           Rng& rng) {
  const int m = factor.dim();
  require(mean.size() == m, "sample_mvn: mean dimension mismatch");
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z[i] = normal(rng);
  return mean + factor.lower * z;
}

NoisePath NoisePath::fbm_exact(std::vector<double> grid, std::vector<double> values,
                               double hurst, double sigma2) {
  check_grid(grid);
  require(grid.size() == values.size(), "grid/values size mismatch");
  NoisePath p;
  p.kind_ = Kind::FbmExact;
  p.times_.reserve(grid.size() + 1);
  p.values_.reserve(grid.size() + 1);
  p.times_.push_back(0.0);   // B^H_0 = 0
  p.values_.push_back(0.0);
  p.times_.insert(p.times_.end(), grid.begin(), grid.end());
  p.values_.insert(p.values_.end(), values.begin(), values.end());
  p.domain_end_ = grid.back();
  p.hurst_ = hurst;
  p.sigma2_ = sigma2;
  return p;
}

NoisePath NoisePath::interpolated(std::vector<double> times, std::vector<double> values) {
  require(times.size() >= 2 && times.size() == values.size(),
          "interpolated path needs >= 2 nodes");
  require(times.front() == 0.0, "interpolated path must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "interpolated path times must increase");
  NoisePath p;
  p.kind_ = Kind::Interpolated;
  p.times_ = std::move(times);
  p.values_ = std::move(values);
  p.domain_end_ = p.times_.back();
  return p;
}

NoisePath NoisePath::deterministic(std::string tag, std::function<double(double)> fn,
                                   double domain_end) {
  require(static_cast<bool>(fn), "deterministic path needs a function");
  require(domain_end > 0.0, "domain_end must be positive");
  NoisePath p;
  p.kind_ = Kind::Deterministic;
  p.fn_ = std::move(fn);
  p.tag_ = std::move(tag);
  p.domain_end_ = domain_end;
  return p;
}

NoisePath NoisePath::zero(double domain_end) {
  return deterministic("zero", [](double) { return 0.0; }, domain_end);
}

double NoisePath::operator()(double t) const {
  if (t < 0.0 || t > domain_end_ * (1.0 + 1e-12))
    throw std::out_of_range("NoisePath evaluated outside [0, domain_end]");
  if (kind_ == Kind::Deterministic) return fn_(t);
  t = std::min(t, times_.back());
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return values_.front();
  std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  if (hi == times_.size()) return values_.back();
  std::size_t lo = hi - 1;
  if (t == times_[lo]) return values_[lo];
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

NoisePath sample_fbm_at(const std::vector<double>& grid, double hurst, double sigma2,
                        Rng& rng) {
  check_fbm_params(hurst, sigma2);
  check_grid(grid);
  require(grid.size() <= 20000, "fbm grid exceeds 20000-point cost guard");
  const int n = static_cast<int>(grid.size());
  std::vector<double> values(grid.size());
  if (std::abs(hurst - 0.5) < 1e-12) {
    // Brownian motion: the Gram-matrix factor is exactly the independent
    // increment construction, so sample increments directly.
    std::normal_distribution<double> normal;
    double prev_t = 0.0, acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += std::sqrt(sigma2 * (grid[i] - prev_t)) * normal(rng);
      values[static_cast<std::size_t>(i)] = acc;
      prev_t = grid[i];
    }
    return NoisePath::fbm_exact(grid, std::move(values), hurst, sigma2);
  }
  CholFactor factor = cholesky(CovSpec::fbm(hurst, sigma2, grid));
  Eigen::VectorXd v = sample_mvn(factor, Eigen::VectorXd::Zero(n), rng);
  Eigen::VectorXd::Map(values.data(), n) = v;
  return NoisePath::fbm_exact(grid, std::move(values), hurst, sigma2);
}

namespace {

// Davies-Harte: exact fGn on a uniform grid via circulant embedding.
// Returns the n increments of fBm over steps of size dt.
std::vector<double> circulant_fgn(int n, double dt, double hurst, double sigma2,
                                  Rng& rng) {
  const double h2 = 2.0 * hurst;
  const double scale = 0.5 * sigma2 * std::pow(dt, h2);
  auto gamma = [&](int k) {
    return scale * (std::pow(std::abs(k + 1), h2) - 2.0 * std::pow(std::abs(k), h2) +
                    std::pow(std::abs(k - 1), h2));
  };
  const int m = 2 * n;
  std::vector<std::complex<double>> row(static_cast<std::size_t>(m));
  for (int k = 0; k <= n; ++k) row[static_cast<std::size_t>(k)] = gamma(k);
  for (int k = 1; k < n; ++k) row[static_cast<std::size_t>(m - k)] = gamma(k);

  std::vector<std::complex<double>> eig(static_cast<std::size_t>(m));
  fftw_plan plan = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(row.data()),
                                    reinterpret_cast<fftw_complex*>(eig.data()),
                                    FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> a(static_cast<std::size_t>(m));
  auto lam = [&](int k) {
    // eigenvalues of the fGn circulant are nonnegative; clip rounding noise
    return std::max(eig[static_cast<std::size_t>(k)].real(), 0.0);
  };
  a[0] = std::sqrt(lam(0) / m) * normal(rng);
  a[static_cast<std::size_t>(n)] = std::sqrt(lam(n) / m) * normal(rng);
  for (int k = 1; k < n; ++k) {
    const double s = std::sqrt(lam(k) / (2.0 * m));
    const double re = normal(rng), im = normal(rng);
    a[static_cast<std::size_t>(k)] = std::complex<double>(s * re, s * im);
    a[static_cast<std::size_t>(m - k)] = std::conj(a[static_cast<std::size_t>(k)]);
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(m));
  plan = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(a.data()),
                          reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                          FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> incr(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) incr[static_cast<std::size_t>(k)] = out[static_cast<std::size_t>(k)].real();
  return incr;
}

}  // namespace

NoisePath make_interpolated_path(int resolution_log2, double hurst, double sigma2,
                                 Rng& rng, double domain_end) {
  check_fbm_params(hurst, sigma2);
  require(resolution_log2 >= 8 && resolution_log2 <= 20,
          "resolution_log2 must lie in [8, 20]");
  require(domain_end > 0.0, "domain_end must be positive");
  const int n = 1 << resolution_log2;
  const double dt = domain_end / n;
  std::vector<double> times(static_cast<std::size_t>(n) + 1);
  std::vector<double> values(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) times[static_cast<std::size_t>(i)] = i * dt;
  values[0] = 0.0;
  if (resolution_log2 <= 12) {
    std::vector<double> grid(times.begin() + 1, times.end());
    NoisePath exact = sample_fbm_at(grid, hurst, sigma2, rng);
    for (int i = 1; i <= n; ++i)
      values[static_cast<std::size_t>(i)] = exact(grid[static_cast<std::size_t>(i - 1)]);
  } else {
    std::vector<double> incr = circulant_fgn(n, dt, hurst, sigma2, rng);
    for (int i = 1; i <= n; ++i)
      values[static_cast<std::size_t>(i)] =
          values[static_cast<std::size_t>(i - 1)] + incr[static_cast<std::size_t>(i - 1)];
  }
  return NoisePath::interpolated(std::move(times), std::move(values));
}

}  // namespace nsdreg
