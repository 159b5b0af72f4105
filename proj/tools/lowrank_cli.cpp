#include "lowrank/adaptive.hpp"
#include "lowrank/bench.hpp"
#include "lowrank/density.hpp"
#include "lowrank/discrete.hpp"
#include "lowrank/io.hpp"
#include "lowrank/linalg.hpp"
#include "lowrank/rand.hpp"
#include "lowrank/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;  // usage or parse errors
constexpr int kExitData = 3;   // data invariant violations

int cmd_estimate_discrete(const std::string& h1_path, const std::string& h2_path,
                          long long n, double alpha, int d, double N, double tau_scale,
                          const std::string& output, const std::string& truth_path,
                          bool oracle_blocks_mode) {
  const lowrank::Matrix m1 = lowrank::read_matrix_file(h1_path);
  const lowrank::Matrix m2 = lowrank::read_matrix_file(h2_path);
  lowrank::FrequencyMatrix h1{m1, n}, h2{m2, n};
  h1.validate();
  h2.validate();

  lowrank::Alg1Params params;
  params.alpha = alpha;
  params.d = d > 0 ? d : (int)std::max(m1.rows(), m1.cols());
  params.N = N > 0 ? N : (double)n;
  params.n = n;
  params.tau_scale = tau_scale;

  lowrank::Alg1Result result;
  if (oracle_blocks_mode) {
    // debug/ablation mode: index sets from the exact marginals of the truth
    lowrank::require(!truth_path.empty(), "--oracle-blocks needs --truth");
    const lowrank::Matrix truth = lowrank::read_matrix_file(truth_path);
    lowrank::validate_prob_matrix(truth);
    result = lowrank::localized_svd_estimate_with_blocks(
        params, lowrank::oracle_blocks(truth, params.d), h1, h2);
  } else {
    result = lowrank::localized_svd_estimate(params, h1, h2);
  }
  lowrank::write_matrix_file(output, result.estimate);
  std::cout << "branch "
            << (result.branch == lowrank::Alg1Branch::SmallSample      ? "small_sample"
                : result.branch == lowrank::Alg1Branch::ZeroFallback   ? "zero_fallback"
                                                                       : "normalized")
            << "\n";
  if (!truth_path.empty()) {
    const lowrank::Matrix truth = lowrank::read_matrix_file(truth_path);
    std::cout << "l1_error "
              << lowrank::format_double(lowrank::entrywise_l1_distance(result.estimate, truth))
              << "\n";
  }
  return kExitOk;
}

int cmd_estimate_density(const std::string& input, double alpha, int K, double beta, double N,
                         double tau_scale, double guard_scale, const std::string& output,
                         bool adaptive, const std::string& k_grid,
                         const std::string& trace_path, std::uint64_t seed) {
  (void)seed;  // estimation is deterministic; the flag exists for config symmetry
  const lowrank::Sample2D sample = lowrank::read_sample_file(input);

  lowrank::DensityParams params;
  params.alpha = alpha;
  params.K = K;
  params.beta = beta;
  params.N_override = N;
  params.tau_scale = tau_scale;
  params.guard_log_scale = guard_scale;

  if (!adaptive) {
    const auto result = lowrank::alg2_density_2d(sample, params);
    lowrank::write_density_file(output, result.density);
    std::cout << "branch " << lowrank::to_string(result.branch) << "\n";
    std::cout << "k_prime " << result.k_prime << "\n";
    if (result.n_truncated > 0)
      std::cout << "note truncated " << result.n_truncated
                << " observation(s) to reach a multiple of 4\n";
    return kExitOk;
  }

  const long long n = (long long)sample.size();
  lowrank::require(n >= 8, "adaptive estimation needs n >= 8 (constraint: n >= 8)");
  const auto grid = k_grid == "full" ? lowrank::CandidateGrid::full(n)
                                     : lowrank::CandidateGrid::dyadic(n);
  const auto set = lowrank::build_candidates(sample, alpha, grid, params);
  for (const auto& w : set.warnings) std::cerr << "warning: " << w << "\n";
  const auto [density, trace] = lowrank::min_distance_select(set, sample);
  lowrank::write_density_file(output, density);
  if (!trace_path.empty()) {
    std::ofstream tf(trace_path);
    if (!tf) throw std::runtime_error("cannot open '" + trace_path + "' for writing");
    lowrank::write_selection_trace_csv(tf, trace);
  }
  const auto& sel = set.info[(std::size_t)trace.selected_index];
  std::cout << "selected K=" << sel.K << " beta=" << lowrank::format_double(sel.beta) << "\n";
  return kExitOk;
}

int cmd_bench(const std::string& experiment, const std::string& config_path,
              const std::string& output, std::uint64_t seed, bool seed_set, int replicates,
              int jobs) {
  lowrank::BenchConfig config;
  try {
    config = !config_path.empty() ? lowrank::BenchConfig::from_json_file(config_path)
                                  : lowrank::BenchConfig::named(experiment);
  } catch (const lowrank::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed_set) config.base_seed = seed;
  if (replicates > 0) config.replicates = replicates;
  if (!output.empty()) config.output_path = output;
  lowrank::require(!config.output_path.empty(), "bench: an output path is required");

  const auto summary = lowrank::run_experiment_summary(config, jobs);
  lowrank::write_trials_csv_file(config.output_path, summary.records);
  std::cout << "experiment " << config.experiment << "\n";
  std::cout << "records " << summary.records.size() << "\n";
  std::cout << "factor2_checks " << summary.factor2_checks << "\n";
  std::cout << "factor2_violations " << summary.factor2_violations << "\n";
  std::cout << "output " << config.output_path << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& lemma, const std::string& output, std::uint64_t seed,
               int trials, double alpha, double N, long long n, int d, double lambda, int ell,
               long long m, double delta) {
  lowrank::VerifierReport report;
  if (lemma == "noise") {
    lowrank::Matrix p = lowrank::Matrix::Constant(d, d, 1.0 / (double)(d * d));
    std::vector<int> all(d);
    for (int i = 0; i < d; ++i) all[(std::size_t)i] = i;
    report = lowrank::verify_noise_bound(p, all, all, alpha, N, n,
                                         trials > 0 ? trials : 500, seed);
  } else if (lemma == "rows") {
    const double threshold = 14.0 * alpha * std::log(N) / (double)n;
    lowrank::require(threshold < 1.0, "verify rows: mass threshold above 1; increase n");
    const int rows = std::max(1, (int)std::floor(1.0 / threshold));
    lowrank::Matrix p = lowrank::Matrix::Constant(rows, 4, 1.0 / (double)(rows * 4));
    report = lowrank::verify_row_concentration(p, alpha, N, n, trials > 0 ? trials : 500, seed);
  } else if (lemma == "poisson") {
    const std::vector<double> grid = {lambda / 4.0, lambda / 2.0, 3.0 * lambda / 4.0};
    report = lowrank::verify_poisson_tails(lambda, grid, trials > 0 ? trials : 100000, seed);
  } else if (lemma == "histogram") {
    report = lowrank::verify_histogram_deviation(ell, m, delta, trials > 0 ? trials : 1000,
                                                 seed);
  } else {
    std::cerr << "error: unknown lemma '" << lemma
              << "' (valid: noise, rows, poisson, histogram)\n";
    return kExitUsage;
  }

  std::ofstream f(output);
  if (!f) throw std::runtime_error("cannot open '" + output + "' for writing");
  lowrank::write_report_csv(f, report);
  std::cout << "lemma " << report.lemma << "\n";
  std::cout << "params " << report.params << "\n";
  std::cout << "trials " << report.trials << "\n";
  std::cout << "violations " << report.violations << "\n";
  std::cout << "allowed " << lowrank::format_double(report.lemma_probability + report.slack)
            << "\n";
  std::cout << (report.flagged ? "flagged\n" : "within_bound\n");
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank probability matrix and bivariate density estimation"};
  app.require_subcommand(1);

  // estimate-discrete
  auto* disc = app.add_subcommand("estimate-discrete",
                                  "Localized SVD estimate from two frequency matrices. Each "
                                  "matrix must hold exactly n observations; with an odd raw "
                                  "total, drop the last observation before splitting.");
  std::string h1_path, h2_path, disc_out, truth_path;
  long long disc_n = 0;
  double disc_alpha = 2.0, disc_N = 0.0, disc_tau = 1.0;
  int disc_d = 0;
  disc->add_option("--h1", h1_path, "first-half frequency matrix file")->required();
  disc->add_option("--h2", h2_path, "second-half frequency matrix file")->required();
  disc->add_option("--n", disc_n, "sample size per half")->required()->check(CLI::PositiveNumber);
  disc->add_option("--alpha", disc_alpha, "confidence parameter, > 1")
      ->check(CLI::Range(std::nextafter(1.0, 2.0), 1e9));
  disc->add_option("--d", disc_d, "partition dimension parameter (default max(d1,d2))");
  disc->add_option("--N", disc_N, "log factor base N (default n)");
  disc->add_option("--tau-scale", disc_tau, "threshold scale factor (default 1.0)");
  disc->add_option("--output", disc_out, "output matrix file")->required();
  disc->add_option("--truth", truth_path, "optional truth matrix; prints the l1 error");
  bool disc_oracle = false;
  disc->add_flag("--oracle-blocks", disc_oracle,
                 "debug mode: build the dyadic index sets from the exact marginals of the "
                 "--truth matrix instead of H1");

  // estimate-density
  auto* dens = app.add_subcommand("estimate-density",
                                  "Two-dimensional density estimate from a two-column sample "
                                  "file (truncated to a multiple of 4 observations).");
  std::string dens_in, dens_out, dens_trace, dens_grid = "dyadic";
  double dens_alpha = 2.0, dens_beta = 1.0, dens_N = 0.0, dens_tau = 1.0, dens_guard = 1.0;
  int dens_K = 1;
  bool dens_adaptive = false;
  std::uint64_t dens_seed = 1;
  dens->add_option("--input", dens_in, "sample file, one 'x y' pair per line")->required();
  dens->add_option("--K", dens_K, "number of separable components (default 1)");
  dens->add_option("--beta", dens_beta, "Hoelder smoothness in (0,1] (default 1)");
  dens->add_option("--alpha", dens_alpha, "confidence parameter, > 1");
  dens->add_option("--N", dens_N, "override of the N passed to the discrete estimator");
  dens->add_option("--tau-scale", dens_tau, "threshold scale factor (default 1.0)");
  dens->add_option("--guard-scale", dens_guard,
                   "scale on the log^{3/2}(n) factor of the rate guard (default 1.0)");
  dens->add_option("--output", dens_out, "output density file")->required();
  dens->add_flag("--adaptive", dens_adaptive, "minimum-distance selection over a (K, beta) grid");
  dens->add_option("--k-grid", dens_grid, "adaptive K grid: dyadic (default) or full")
      ->check(CLI::IsMember({"dyadic", "full"}));
  dens->add_option("--trace", dens_trace, "selection trace CSV (adaptive only)");
  dens->add_option("--seed", dens_seed, "base seed");

  // bench
  auto* bench = app.add_subcommand("bench", "Monte-Carlo experiment runner.");
  std::string bench_experiment, bench_config, bench_out;
  std::uint64_t bench_seed = 0;
  int bench_replicates = 0, bench_jobs = 0;
  bench->add_option("--experiment", bench_experiment, "named experiment (fig1-desk, ...)");
  bench->add_option("--config", bench_config, "JSON config document");
  bench->add_option("--output", bench_out, "trial CSV path");
  auto* seed_opt = bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--replicates", bench_replicates, "replicates per grid point");
  bench->add_option("--jobs", bench_jobs, "worker pool size (default: logical cores)");

  // verify
  auto* verify = app.add_subcommand("verify", "Empirical concentration-lemma checks.");
  std::string verify_lemma, verify_out;
  std::uint64_t verify_seed = 1;
  int verify_trials = 0, verify_d = 10, verify_ell = 20;
  double verify_alpha = 2.0, verify_N = 10.0, verify_lambda = 100.0, verify_delta = 0.05;
  long long verify_n = 10000, verify_m = 10000;
  verify->add_option("--lemma", verify_lemma, "noise | rows | poisson | histogram")->required();
  verify->add_option("--output", verify_out, "report CSV path")->required();
  verify->add_option("--seed", verify_seed, "base seed");
  verify->add_option("--trials", verify_trials, "trial count (default per lemma)");
  verify->add_option("--alpha", verify_alpha, "noise/rows: confidence parameter");
  verify->add_option("--N", verify_N, "noise/rows: log factor base");
  verify->add_option("--n", verify_n, "noise/rows: sample size");
  verify->add_option("--d", verify_d, "noise: matrix dimension");
  verify->add_option("--lambda", verify_lambda, "poisson: mean");
  verify->add_option("--ell", verify_ell, "histogram: bin count");
  verify->add_option("--m", verify_m, "histogram: draws per trial");
  verify->add_option("--delta", verify_delta, "histogram: tail probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (disc->parsed())
      return cmd_estimate_discrete(h1_path, h2_path, disc_n, disc_alpha, disc_d, disc_N,
                                   disc_tau, disc_out, truth_path, disc_oracle);
    if (dens->parsed())
      return cmd_estimate_density(dens_in, dens_alpha, dens_K, dens_beta, dens_N, dens_tau,
                                  dens_guard, dens_out, dens_adaptive, dens_grid, dens_trace,
                                  dens_seed);
    if (bench->parsed()) {
      if (bench_experiment.empty() && bench_config.empty()) {
        std::cerr << "error: bench needs --experiment or --config\n";
        return kExitUsage;
      }
      return cmd_bench(bench_experiment, bench_config, bench_out, bench_seed,
                       seed_opt->count() > 0, bench_replicates, bench_jobs);
    }
    if (verify->parsed())
      return cmd_verify(verify_lemma, verify_out, verify_seed, verify_trials, verify_alpha,
                        verify_N, verify_n, verify_d, verify_lambda, verify_ell, verify_m,
                        verify_delta);
  } catch (const lowrank::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const lowrank::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
