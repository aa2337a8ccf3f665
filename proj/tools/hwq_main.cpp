// hwq: command line front end for the experiment runner.
//
//   hwq <subcommand> --config <path> [--out <path>] [--seed <u64>] [--threads <k>]
//   hwq gaussian --config <path> --dump-cov <path>
//   hwq limits --model h2star --p 0.5 --B 1 --x 0

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hwq/errors.hpp"
#include "hwq/experiments.hpp"
#include "hwq/reference_limits.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string dump_cov;
};

struct LimitArgs {
  std::string model = "h2star";
  double p = 1.0;
  double B = 1.0;
  double x = 0.0;
  double cA2 = 1.0;
  std::optional<double> cS2;
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
};

int run_experiment(const std::string& name, const RunArgs& a) {
  hwq::ExperimentConfig config = hwq::load_config(a.config);
  const auto kind = hwq::parse_experiment_kind(name);
  if (config.raw.contains("experiment") && config.kind != kind)
    throw hwq::ConfigError("config declares experiment '" + hwq::to_string(config.kind) + "' but '" + name +
                           "' was requested");
  config.kind = kind;
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = *a.threads;
  if (!a.out.empty()) config.output = a.out;

  if (!a.dump_cov.empty()) {
    std::ofstream f(a.dump_cov, std::ios::binary);
    if (!f) throw hwq::ConfigError("cannot write '" + a.dump_cov + "'");
    hwq::write_covariance_csv(f, config);
  }

  const hwq::RunResult result = hwq::run(config);
  if (config.output.empty()) {
    hwq::write_csv(std::cout, config, result.table);
  } else {
    std::ofstream f(config.output, std::ios::binary);
    if (!f) throw hwq::ConfigError("cannot write '" + config.output + "'");
    hwq::write_csv(f, config, result.table);
  }
  for (const auto& m : result.messages) std::cerr << "hwq: " << m << "\n";
  return result.exit_code;
}

int run_limits(const LimitArgs& a) {
  std::cout << "quantity,value\r\n";
  auto line = [](const char* k, double v) { std::cout << k << "," << std::setprecision(10) << v << "\r\n"; };
  if (a.model == "h2star") {
    const double cS2 = a.cS2.value_or(2.0 / a.p - 1.0);
    const auto t = hwq::h2star_limits(a.B, a.x, a.p, a.cA2, cS2);
    const auto s = hwq::scaling_constants(hwq::H2StarModel{a.p, a.cA2, cS2});
    line("alpha", hwq::alpha(a.B / std::sqrt(a.p * (a.cA2 + cS2) / 2.0)));
    line("upper_tail", t.upper_tail);
    line("lower_tail", t.lower_tail);
    line("large_B_rate", s.large_B_rate);
    line("small_B_rate", s.small_B_rate);
    line("idle_tail_rate", s.idle_tail_rate);
  } else if (a.model == "deterministic") {
    const auto e = hwq::gid_limit_mc(a.B, a.cA2, a.x, a.reps, 1000000, a.seed);
    const auto s = hwq::scaling_constants(hwq::DeterministicModel{a.cA2});
    line("upper_tail", e.point);
    line("upper_tail_std_error", e.std_error);
    line("large_B_rate", s.large_B_rate);
    line("small_B_rate", s.small_B_rate);
    line("idle_tail_rate", s.idle_tail_rate);
  } else if (a.model == "mginf") {
    line("idle_tail_bound", hwq::mginf_bound(a.B, a.x));
  } else {
    throw hwq::ConfigError("--model must be h2star, deterministic or mginf");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Halfin-Whitt queue bounds toolkit"};
  app.set_version_flag("--version", std::string(hwq::version()));
  app.require_subcommand(1);

  RunArgs run_args;
  const char* experiments[] = {"validate", "simulate", "bound", "gaussian", "renewal",
                               "scaling_large_B", "scaling_small_B", "idle_tail", "compare"};
  for (const char* name : experiments) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", run_args.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", run_args.out, "CSV output path (default stdout)");
    sub->add_option("--seed", run_args.seed, "override the config seed");
    sub->add_option("--threads", run_args.threads, "worker threads (default HWQ_THREADS or all cores)");
    if (std::string(name) == "gaussian")
      sub->add_option("--dump-cov", run_args.dump_cov, "write the covariance matrix of Z as CSV");
  }

  LimitArgs lim;
  CLI::App* limits = app.add_subcommand("limits", "closed-form reference limits");
  limits->add_option("--model", lim.model, "h2star, deterministic or mginf");
  limits->add_option("--p", lim.p, "H*2 weight of the exponential part");
  limits->add_option("--B", lim.B, "excess parameter");
  limits->add_option("--x", lim.x, "level in sqrt(n) units");
  limits->add_option("--cA2", lim.cA2, "squared coefficient of variation of A");
  limits->add_option("--cS2", lim.cS2, "squared coefficient of variation of S (default 2/p - 1)");
  limits->add_option("--reps", lim.reps, "Monte Carlo replications (deterministic model)");
  limits->add_option("--seed", lim.seed, "seed (deterministic model)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(hwq::ExitCode::kConfig);
  }

  try {
    if (limits->parsed()) return run_limits(lim);
    for (CLI::App* sub : app.get_subcommands())
      if (sub->parsed()) return run_experiment(sub->get_name(), run_args);
  } catch (const hwq::Error& e) {
    std::cerr << "hwq: " << e.what() << "\n";
    return static_cast<int>(e.code());
  }
  return 0;
}
