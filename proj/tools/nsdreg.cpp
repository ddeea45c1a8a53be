// Command-line surface: simulate, montecarlo, verify, convergence.
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nsdreg/gaussian.hpp"
#include "nsdreg/montecarlo.hpp"
#include "nsdreg/nsd_verify.hpp"
#include "nsdreg/regression.hpp"
#include "nsdreg/rng.hpp"
#include "nsdreg/time_models.hpp"
#include "nsdreg/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nsdreg;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TimeModelKind parse_time_model(const std::string& name) {
  if (name == "nsd-lognormal") return TimeModelKind::NsdLognormal;
  if (name == "jittered") return TimeModelKind::Jittered;
  if (name == "fixed") return TimeModelKind::Fixed;
  if (name == "iid-renewal") return TimeModelKind::IidRenewal;
  throw CLI::ValidationError("--time-model", "unknown time model: " + name);
}

json time_model_json(const TimeModelSpec& m) {
  static const std::map<TimeModelKind, std::string> names = {
      {TimeModelKind::NsdLognormal, "nsd-lognormal"},
      {TimeModelKind::Jittered, "jittered"},
      {TimeModelKind::Fixed, "fixed"},
      {TimeModelKind::IidRenewal, "iid-renewal"}};
  return json{{"kind", names.at(m.kind)}, {"N", m.N},       {"horizon", m.horizon},
              {"rho", m.rho},             {"block", m.block}, {"strict", m.strict}};
}

json config_json(const ExperimentConfig& c) {
  return json{{"N", c.N},
              {"hurst", c.hurst},
              {"a", c.a},
              {"replications", c.M},
              {"seed", c.seed},
              {"estimator", c.estimator == EstimatorKind::Stopped ? "stopped" : "full"},
              {"noise", c.noise == NoiseKind::Fbm ? "fbm" : "zero"},
              {"sigma2", c.sigma2},
              {"time_model", time_model_json(c.time_model)}};
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const json& config, const std::vector<std::string>& outputs,
                    std::uint64_t seed) {
  json manifest{{"subcommand", subcommand}, {"version", kVersion},
                {"seed", seed},             {"config", config},
                {"outputs", outputs}};
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << "\n";
}

void write_histogram_csv(const fs::path& path, const Histogram& h) {
  std::ofstream os(path);
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << fmt17(h.edges[i]) << "," << fmt17(h.edges[i + 1]) << "," << h.counts[i]
       << "\n";
}

json summary_json(const McSummary& s) {
  return json{{"abs_mean_bias", s.abs_mean_bias},
              {"l1_risk", s.l1_risk},
              {"est_variance", s.est_variance},
              {"theo_variance", s.theo_variance},
              {"ks_distance", s.ks_distance},
              {"ratio_n1_mean", s.ratio_mean},
              {"ratio_n1_sd", s.ratio_sd},
              {"config", config_json(s.config)},
              {"version", kVersion}};
}

void write_summary_csv(const fs::path& path, const McSummary& s) {
  std::ofstream os(path);
  os << "abs_mean_bias,l1_risk,est_variance,theo_variance,ks_distance,"
        "ratio_n1_mean,ratio_n1_sd\n";
  os << fmt17(s.abs_mean_bias) << "," << fmt17(s.l1_risk) << ","
     << fmt17(s.est_variance) << "," << fmt17(s.theo_variance) << ","
     << fmt17(s.ks_distance) << "," << fmt17(s.ratio_mean) << ","
     << fmt17(s.ratio_sd) << "\n";
}

void write_reps_csv(const fs::path& path, const std::vector<RepRecord>& reps) {
  std::ofstream os(path);
  os << "k,n1,a_hat,scaled_error\n";
  for (const RepRecord& r : reps)
    os << r.k << "," << r.n1 << "," << fmt17(r.a_hat) << ","
       << fmt17(r.scaled_error) << "\n";
}

struct CommonFlags {
  int n = 100;
  double hurst = 0.5;
  double a = 1.0;
  std::string time_model = "nsd-lognormal";
  double rho = -0.25;
  int block = 5;
  std::uint64_t seed = 0;
  std::string out;
};

TimeModelSpec make_time_spec(const CommonFlags& f) {
  TimeModelSpec spec;
  spec.kind = parse_time_model(f.time_model);
  spec.N = f.n;
  spec.rho = f.rho;
  spec.block = f.block;
  return spec;
}

void add_common(CLI::App* cmd, CommonFlags& f, bool hurst_required) {
  cmd->add_option("--n", f.n, "sampling rate N");
  auto* h = cmd->add_option("--hurst", f.hurst, "Hurst index in (0,1)");
  if (hurst_required) h->required();
  cmd->add_option("--a", f.a, "true trend");
  cmd->add_option("--time-model", f.time_model,
                  "nsd-lognormal | jittered | fixed | iid-renewal");
  cmd->add_option("--rho", f.rho, "within-block correlation");
  cmd->add_option("--block", f.block, "NSD block size");
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--out", f.out, "output directory")->required();
}

int cmd_simulate(const CommonFlags& f) {
  fs::create_directories(f.out);
  TimeModelSpec spec = make_time_spec(f);
  json config{{"N", f.n},     {"hurst", f.hurst}, {"a", f.a},
              {"seed", f.seed}, {"time_model", time_model_json(spec)}};
  write_manifest(f.out, "simulate", config, {"sample.csv", "times.csv"}, f.seed);

  Rng rng = make_stream(f.seed, 0);
  TimeSequence times = generate_times(spec, rng);
  std::vector<double> grid(times.tau.begin(),
                           times.tau.begin() + times.n1);
  NoisePath w = sample_fbm_at(grid, f.hurst, 1.0, rng);
  RegressionSample sample = make_sample(f.a, std::move(times), w);

  std::ofstream ts(fs::path(f.out) / "times.csv");
  sample.times.write_csv(ts);
  std::ofstream ss(fs::path(f.out) / "sample.csv");
  sample.write_csv(ss);
  return 0;
}

int cmd_montecarlo(const CommonFlags& f, int replications, const std::string& grid,
                   const std::string& format) {
  std::vector<int> n_list{f.n};
  std::vector<double> h_list{f.hurst};
  if (!grid.empty()) {
    const auto x = grid.find('x');
    if (x == std::string::npos)
      throw CLI::ValidationError("--grid", "expected N1,N2,...xH1,H2,...");
    n_list.clear();
    h_list.clear();
    std::stringstream ns(grid.substr(0, x)), hs(grid.substr(x + 1));
    for (std::string tok; std::getline(ns, tok, ',');) n_list.push_back(std::stoi(tok));
    for (std::string tok; std::getline(hs, tok, ',');) h_list.push_back(std::stod(tok));
    if (n_list.empty() || h_list.empty())
      throw CLI::ValidationError("--grid", "empty grid axis");
  }

  fs::create_directories(f.out);
  std::vector<std::string> outputs;
  auto cell_tag = [](int n, double h) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "N%d_H%g", n, h);
    return std::string(buf);
  };
  for (int n : n_list)
    for (double h : h_list) {
      outputs.push_back("summary_" + cell_tag(n, h) +
                        (format == "csv" ? ".csv" : ".json"));
      outputs.push_back("reps_" + cell_tag(n, h) + ".csv");
    }
  outputs.insert(outputs.end(),
                 {"table_bias.csv", "table_l1.csv", "table_variance.csv"});
  json config{{"grid_n", n_list},   {"grid_h", h_list},  {"a", f.a},
              {"replications", replications}, {"seed", f.seed},
              {"format", format},
              {"time_model", time_model_json(make_time_spec(f))}};
  write_manifest(f.out, "montecarlo", config, outputs, f.seed);

  std::map<std::pair<int, double>, McSummary> cells;
  for (int n : n_list)
    for (double h : h_list) {
      ExperimentConfig cfg;
      cfg.N = n;
      cfg.hurst = h;
      cfg.a = f.a;
      cfg.M = replications;
      cfg.time_model = make_time_spec(f);
      cfg.time_model.N = n;
      cfg.seed = f.seed;
      ExperimentResult res = run_experiment(cfg);
      const std::string tag = cell_tag(n, h);
      if (format == "csv")
        write_summary_csv(fs::path(f.out) / ("summary_" + tag + ".csv"), res.summary);
      else {
        std::ofstream os(fs::path(f.out) / ("summary_" + tag + ".json"));
        os << summary_json(res.summary).dump(2) << "\n";
      }
      write_reps_csv(fs::path(f.out) / ("reps_" + tag + ".csv"), res.reps);
      cells[{n, h}] = res.summary;
    }

  // combined tables: rows N, columns H
  auto write_table = [&](const std::string& name, auto field) {
    std::ofstream os(fs::path(f.out) / name);
    os << "N";
    for (double h : h_list) os << ",H=" << h;
    os << "\n";
    for (int n : n_list) {
      os << n;
      for (double h : h_list) os << "," << fmt17(field(cells.at({n, h})));
      os << "\n";
    }
  };
  write_table("table_bias.csv", [](const McSummary& s) { return s.abs_mean_bias; });
  write_table("table_l1.csv", [](const McSummary& s) { return s.l1_risk; });
  write_table("table_variance.csv", [](const McSummary& s) { return s.est_variance; });
  return 0;
}

int cmd_verify(int m, double rho, std::int64_t draws, std::uint64_t seed, int n_rate,
               bool strict, const std::string& out) {
  if (strict && m > 5) {
    // surface the PSD failure instead of silently blocking
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(m, m, rho);
    sigma.diagonal().setOnes();
    cholesky(CovSpec::explicit_cov(std::move(sigma)));
  }
  Rng rng = make_stream(seed, 0);
  json battery = json::array();
  bool all_pass = true;
  auto add = [&](const NsdReport& r, const std::string& prefix) {
    battery.push_back(json{{"test", prefix + r.test},
                           {"lhs", r.lhs},
                           {"rhs", r.rhs},
                           {"stderr", r.stderr_est},
                           {"draws", r.draws},
                           {"pass", r.pass}});
    all_pass = all_pass && r.pass;
  };

  SequenceGenerator gen = nsd_lognormal_generator(m, rho, n_rate);
  for (const NsdReport& r : check_nsd(gen, builtin_tests(m), m, draws, rng))
    add(r, "nsd/");
  for (const NsdReport& r : check_monotone_closure(m, rho, draws, rng))
    add(r, "monotone/");

  RosenthalReport ros = check_rosenthal(gen, 3.0, 20, std::min<std::int64_t>(draws, 100000),
                                        rng, 1.0 / n_rate);
  battery.push_back(json{{"test", "rosenthal/p3_n20"},
                         {"lhs", ros.lhs},
                         {"rhs", ros.rhs},
                         {"draws", ros.draws},
                         {"pass", ros.pass}});
  battery.push_back(json{{"test", "rosenthal/variance_bound"},
                         {"lhs", ros.var_lhs},
                         {"rhs", ros.var_rhs},
                         {"stderr", ros.var_stderr},
                         {"draws", ros.draws},
                         {"pass", ros.var_pass}});
  all_pass = all_pass && ros.pass && ros.var_pass;

  json doc{{"version", kVersion}, {"seed", seed},   {"m", m},
           {"rho", rho},          {"draws", draws}, {"N", n_rate},
           {"battery", battery},  {"all_pass", all_pass}};
  if (out.empty())
    std::cout << doc.dump(2) << "\n";
  else {
    fs::create_directories(out);
    write_manifest(out, "verify",
                   json{{"m", m}, {"rho", rho}, {"draws", draws}, {"N", n_rate}},
                   {"report.json"}, seed);
    std::ofstream os(fs::path(out) / "report.json");
    os << doc.dump(2) << "\n";
  }
  return all_pass ? 0 : 1;
}

int cmd_convergence(const CommonFlags& f, std::vector<int> n_list, int seeds,
                    const std::string& w_kind, const std::string& estimator) {
  const EstimatorKind kind =
      estimator == "full" ? EstimatorKind::Full : EstimatorKind::Stopped;
  fs::create_directories(f.out);
  std::vector<std::string> outputs{"convergence.csv"};
  for (int n : n_list) outputs.push_back("hist_ratio_N" + std::to_string(n) + ".csv");
  json config{{"n_list", n_list},      {"seeds", seeds},     {"w", w_kind},
              {"estimator", estimator}, {"a", f.a},          {"hurst", f.hurst},
              {"seed", f.seed},
              {"time_model", time_model_json(make_time_spec(f))}};
  write_manifest(f.out, "convergence", config, outputs, f.seed);

  std::ofstream os(fs::path(f.out) / "convergence.csv");
  os << "seed,N,n1,scaled_error,limit_value,deviation\n";
  std::map<int, std::vector<double>> ratios;
  for (int s = 0; s < seeds; ++s) {
    Rng path_rng = make_stream(f.seed, 1000000u + static_cast<std::uint64_t>(s));
    NoisePath w = NoisePath::deterministic("t2", [](double t) { return t * t; }, 8.0);
    if (w_kind == "interpolated")
      w = make_interpolated_path(14, f.hurst, 1.0, path_rng,
                                 kind == EstimatorKind::Full ? 2.0 : 1.0);
    else if (w_kind != "t2")
      throw CLI::ValidationError("--deterministic-w", "expected t2 or interpolated");
    const double limit = limit_functional(w);
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
      Rng rng = make_stream(f.seed, static_cast<std::uint64_t>(s) * 1000u + ni);
      TimeModelSpec spec = make_time_spec(f);
      spec.N = n_list[ni];
      TimeSequence times = generate_times(spec, rng);
      RegressionSample sample = make_sample(f.a, std::move(times), w, kind);
      EstimateRecord est = lse(sample, kind);
      ratios[n_list[ni]].push_back(static_cast<double>(est.n1) / n_list[ni]);
      os << s << "," << n_list[ni] << "," << est.n1 << "," << fmt17(est.scaled_error)
         << "," << fmt17(limit) << "," << fmt17(std::abs(est.scaled_error - limit))
         << "\n";
    }
  }
  for (const auto& [n, r] : ratios)
    write_histogram_csv(fs::path(f.out) / ("hist_ratio_N" + std::to_string(n) + ".csv"),
                        histogram(r, 30));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NSD random-time regression simulation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonFlags sim_f, mc_f, cv_f;
  auto* sim = app.add_subcommand("simulate", "generate one regression sample");
  add_common(sim, sim_f, /*hurst_required=*/true);

  auto* mc = app.add_subcommand("montecarlo", "replication study over an N x H grid");
  add_common(mc, mc_f, /*hurst_required=*/false);
  int replications = 1000;
  std::string grid, format = "json";
  mc->add_option("--replications", replications, "replications M");
  mc->add_option("--grid", grid, "sweep, e.g. 100,1000x0.1,0.5,0.9");
  mc->add_option("--format", format, "summary format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* vf = app.add_subcommand("verify", "NSD / moment-inequality battery");
  int vf_m = 3, vf_n = 100;
  double vf_rho = -0.25;
  std::int64_t vf_draws = 200000;
  std::uint64_t vf_seed = 0;
  bool vf_strict = false;
  std::string vf_out;
  vf->add_option("--m", vf_m, "vector dimension (<= 5 unless --strict)");
  vf->add_option("--rho", vf_rho, "within-block correlation");
  vf->add_option("--draws", vf_draws, "Monte Carlo draws");
  vf->add_option("--seed", vf_seed, "root seed");
  vf->add_option("--n", vf_n, "sampling rate N of the duration model");
  vf->add_flag("--strict", vf_strict, "single global block; m > 5 surfaces PSD failure");
  vf->add_option("--out", vf_out, "output directory (default: stdout)");

  auto* cv = app.add_subcommand("convergence", "per-path theorem verification");
  add_common(cv, cv_f, /*hurst_required=*/false);
  std::vector<int> n_list{250, 500, 1000, 2000, 4000};
  int seeds = 50;
  std::string w_kind = "t2", estimator = "stopped";
  cv->add_option("--n-list", n_list, "sampling rates to sweep");
  cv->add_option("--seeds", seeds, "number of independent paths");
  cv->add_option("--deterministic-w", w_kind, "t2 | interpolated");
  cv->add_option("--estimator", estimator, "stopped | full")
      ->check(CLI::IsMember({"stopped", "full"}));

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim_f);
    if (mc->parsed()) return cmd_montecarlo(mc_f, replications, grid, format);
    if (vf->parsed())
      return cmd_verify(vf_m, vf_rho, vf_draws, vf_seed, vf_n, vf_strict, vf_out);
    if (cv->parsed()) return cmd_convergence(cv_f, n_list, seeds, w_kind, estimator);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
