#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nsdreg/rng.hpp"

namespace nsdreg {

// Superadditive test function phi: R^m -> R. Built-ins are supermodular on
// the relevant domain (nonnegative mixed second differences).
struct SuperadditiveTest {
  std::string name;
  int arity;
  std::function<double(std::span<const double>)> eval;
};

// Battery used by check_nsd: pairwise product, squared sum, componentwise
// minimum, exponential of the sum.
std::vector<SuperadditiveTest> builtin_tests(int m);

struct NsdReport {
  std::string test;
  double lhs = 0.0;     // E phi(X)
  double rhs = 0.0;     // E phi(X*) with independent coordinates
  double stderr_est = 0.0;
  std::int64_t draws = 0;
  bool pass = false;    // lhs <= rhs + 3 stderr
};

// Fills a span of any requested length with consecutive durations from the
// model; coordinates beyond one block are independent across blocks.
using SequenceGenerator = std::function<void(Rng&, std::span<double>)>;

// Block log-normal durations: exp of MVN with mean -log(N)-1/2, unit
// variance, within-block correlation rho (block size = span length cap m).
SequenceGenerator nsd_lognormal_generator(int block, double rho, int N);
// The Gaussian pre-image (no exp), for monotone-closure comparisons.
SequenceGenerator gaussian_block_generator(int block, double rho);

std::vector<NsdReport> check_nsd(const SequenceGenerator& gen,
                                 const std::vector<SuperadditiveTest>& tests, int m,
                                 std::int64_t draws, Rng& rng);

struct RosenthalReport {
  double p = 0.0;
  int n = 0;
  double lhs = 0.0;       // E max_k |S_k|^p
  double rhs = 0.0;       // 2 (15p / log p)^p [ n E|X|^p + (n E X^2)^{p/2} ]
  bool pass = false;      // lhs <= rhs
  double var_lhs = 0.0;   // E S_n^2
  double var_rhs = 0.0;   // n E X^2
  double var_stderr = 0.0;
  bool var_pass = false;  // var_lhs <= var_rhs + 3 stderr
  std::int64_t draws = 0;
};

// Rosenthal maximal inequality and the p = 2 variance bound for centered
// durations X_j = t_j - 1/N.
RosenthalReport check_rosenthal(const SequenceGenerator& gen, double p, int n,
                                std::int64_t draws, Rng& rng, double mean_duration);

// NSD battery on exp of a negatively correlated Gaussian block (monotone
// transforms preserve NSD).
std::vector<NsdReport> check_monotone_closure(int m, double rho, std::int64_t draws,
                                              Rng& rng);

// Centered second difference of phi in directions (i, j); >= 0 everywhere
// characterizes smooth superadditive functions.
double mixed_second_difference(const SuperadditiveTest& test,
                               std::span<const double> x, int i, int j, double h);

}  // namespace nsdreg
