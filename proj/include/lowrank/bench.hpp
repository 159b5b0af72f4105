#pragma once

#include "lowrank/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lowrank {

/// One Monte-Carlo replicate of one estimator on one instance.
struct TrialRecord {
  std::string experiment;
  std::string estimator;  // localized_svd | histogram | alg2 | alg2_histbw | adaptive
  int d = 0;
  long long n = 0;
  int K = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double error = 0.0;  // entrywise l1 (discrete) or L1 (continuous)
  double runtime_ms = 0.0;
  std::string spec_hash;  // instance description, enough to re-derive the trial
};

bool is_known_estimator(const std::string& id);

/// Experiment configuration. Named presets fill every field; a JSON config
/// document (keys experiment, grid, replicates, estimators, base_seed,
/// output_path, params) starts from the preset of its experiment name and
/// overrides what it lists.
struct BenchConfig {
  std::string experiment;
  std::vector<double> grid;  // d values (fig1), K values (fig3), n values (fig5)
  int replicates = 10;
  std::vector<std::string> estimators;
  std::uint64_t base_seed = 1;
  std::string output_path;

  // estimator and instance parameters
  double alpha = 2.0;
  double N_override = 0.0;   // 0: N = d for discrete runs, N = n for density runs
  double tau_scale = 1.0;
  double guard_log_scale = 1.0;
  long long n_discrete = 100000;  // per-half sample size of fig1/fig3 runs
  int K_discrete = 1;             // rank of fig1 instances
  int d_discrete = 100;           // dimension of fig3 instances
  double beta = 1.0;              // density runs
  int K_density = 1;
  std::string instance;  // dirichlet_lowrank | assouad | lipschitz_product

  static BenchConfig named(const std::string& name);
  static BenchConfig from_json_file(const std::string& path);
  static BenchConfig from_json_text(const std::string& text);
  static std::vector<std::string> known_experiments();
};

struct RunSummary {
  std::vector<TrialRecord> records;
  long long factor2_checks = 0;
  long long factor2_violations = 0;  // ||truth-est||_1 > 2 ||truth-pre||_1
};

/// Runs every (grid point, replicate) of the configured experiment on a
/// worker pool. Per-trial seed = base_seed xor trial index; record order is
/// by (grid point, replicate) regardless of scheduling.
RunSummary run_experiment_summary(const BenchConfig& config, int jobs = 0);
std::vector<TrialRecord> run_experiment(const BenchConfig& config, int jobs = 0);

/// CSV schema: experiment,estimator,d,n,K,beta,seed,error,tv,runtime_ms
/// (tv = error/2, the total-variation convention of the figures).
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_trials_csv_file(const std::string& path, const std::vector<TrialRecord>& records);

} // namespace lowrank
