#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "nsdreg/rng.hpp"

namespace nsdreg {

enum class TimeModelKind { NsdLognormal, Jittered, Fixed, IidRenewal };
enum class JitterDist { None, Uniform, ScaledBeta };
enum class RenewalDist { Exponential, Lognormal };

struct TimeModelSpec {
  TimeModelKind kind = TimeModelKind::NsdLognormal;
  int N = 100;            // sampling rate, E t_j = 1/N
  double horizon = 1.0;   // T
  double rho = -0.25;     // nsd-lognormal within-block correlation
  int block = 5;          // nsd-lognormal block size
  bool strict = false;    // single global block; surfaces PSD failure
  JitterDist jitter = JitterDist::Uniform;
  RenewalDist renewal = RenewalDist::Exponential;

  void validate() const;
};

// Durations t_j, cumulative times tau_j and the observation count
// n1 = #{j : tau_j <= horizon}.
struct TimeSequence {
  std::vector<double> t;
  std::vector<double> tau;
  int n1 = 0;
  int N = 0;
  TimeModelSpec model;

  void write_csv(std::ostream& os) const;  // columns: j, t_j, tau_j
};

// Count of entries <= T; requires tau strictly increasing with tau.back() > T.
int count_n1(std::span<const double> tau, double T);

TimeSequence gen_nsd_lognormal(const TimeModelSpec& spec, Rng& rng);
TimeSequence gen_jittered(const TimeModelSpec& spec, Rng& rng);
TimeSequence gen_fixed(const TimeModelSpec& spec);
TimeSequence gen_iid_renewal(const TimeModelSpec& spec, Rng& rng);

// Dispatch on spec.kind.
TimeSequence generate_times(const TimeModelSpec& spec, Rng& rng);

}  // namespace nsdreg
