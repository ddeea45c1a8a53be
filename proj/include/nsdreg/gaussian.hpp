#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nsdreg/rng.hpp"

namespace nsdreg {

// Covariance of fractional Brownian motion:
//   R_H(t,s) = (sigma2/2) (t^{2H} + s^{2H} - |t-s|^{2H})
double fbm_cov(double hurst, double sigma2, double s, double t);

struct ConstantCorrelation {
  int dim;
  double rho;
  double variance;
};

struct ExplicitCov {
  Eigen::MatrixXd sigma;
};

struct FbmCov {
  double hurst;
  double sigma2;
  std::vector<double> grid;  // strictly increasing, all > 0
};

// Mean vector plus one of three covariance constructions.
struct CovSpec {
  Eigen::VectorXd mean;
  std::variant<ConstantCorrelation, ExplicitCov, FbmCov> kind;

  static CovSpec constant_correlation(int m, double rho, double variance);
  static CovSpec explicit_cov(Eigen::MatrixXd sigma);
  static CovSpec fbm(double hurst, double sigma2, std::vector<double> grid);

  int dimension() const;
  Eigen::MatrixXd materialize() const;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(int pivot, double value);
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

struct CholFactor {
  Eigen::MatrixXd lower;
  int dim() const { return static_cast<int>(lower.rows()); }
};

// Lower-triangular factor with L L^T = Sigma. A pivot <= 1e-12 * max
// diagonal entry raises NotPositiveDefinite naming the failing index.
CholFactor cholesky(const CovSpec& spec);

// Square root L L^T = Sigma that also accepts singular (PSD) matrices via
// eigendecomposition; the equicorrelated block covariance at rho = -1/(B-1)
// sits exactly on that boundary. L is square but not triangular in general.
CholFactor psd_sqrt_factor(const Eigen::MatrixXd& sigma);

Eigen::VectorXd sample_mvn(const CholFactor& factor, const Eigen::VectorXd& mean,
                           Rng& rng);

// Continuous noise function W on [0, domain_end]. fBm kinds evaluate to 0
// at t = 0 and exactly at their grid nodes; between nodes the evaluation is
// piecewise linear (approximate for fbm-exact, exact by construction for
// the interpolated kind).
class NoisePath {
 public:
  enum class Kind { FbmExact, Interpolated, Deterministic };

  static NoisePath fbm_exact(std::vector<double> grid, std::vector<double> values,
                             double hurst, double sigma2);
  static NoisePath interpolated(std::vector<double> times, std::vector<double> values);
  static NoisePath deterministic(std::string tag, std::function<double(double)> fn,
                                 double domain_end);
  static NoisePath zero(double domain_end);

  double operator()(double t) const;
  double domain_end() const { return domain_end_; }
  Kind kind() const { return kind_; }
  const std::string& tag() const { return tag_; }
  double hurst() const { return hurst_; }

 private:
  NoisePath() = default;
  Kind kind_ = Kind::Deterministic;
  // node 0 is (0, 0) for fbm kinds
  std::vector<double> times_;
  std::vector<double> values_;
  std::function<double(double)> fn_;
  std::string tag_;
  double domain_end_ = 0.0;
  double hurst_ = 0.0;
  double sigma2_ = 1.0;
};

// Exact fBm sample at an arbitrary strictly increasing positive grid
// (Gram-matrix Cholesky; O(n^3), n capped at 20000). H = 1/2 takes the
// equivalent independent-increment route.
NoisePath sample_fbm_at(const std::vector<double>& grid, double hurst, double sigma2,
                        Rng& rng);

// fBm on the uniform dyadic grid of 2^k points over [0, domain_end],
// wrapped as a piecewise-linear continuous function. Cholesky for k <= 12,
// circulant embedding (Davies-Harte) above.
NoisePath make_interpolated_path(int resolution_log2, double hurst, double sigma2,
                                 Rng& rng, double domain_end = 1.0);

}  // namespace nsdreg
