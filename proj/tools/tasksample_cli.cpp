// Command-line front end: run, describe and real subcommands over a config file.
#include "tasksample/config.hpp"
#include "tasksample/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace tasksample;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<Index> trials;
};

void add_overrides(CLI::App* cmd, std::string& config_path, Overrides& o) {
  cmd->add_option("config", config_path, "experiment config file")->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output CSV path");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--trials", o.trials, "Monte-Carlo trials (0 disables)");
}

ExperimentConfig load(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output = *o.out;
  if (o.threads) c.threads = *o.threads;
  if (o.trials) c.trials = *o.trials;
  validate(c);
  return c;
}

int finish(const ExperimentSummary& summary, const ExperimentConfig& c) {
  write_results_csv(c.output, summary);
  const std::size_t rows = summary.real_rows.empty() ? summary.rows.size() : summary.real_rows.size();
  std::cerr << "wrote " << rows << " rows to " << c.output.string() << '\n';
  if (summary.failed_instances > 0)
    std::cerr << summary.failed_instances << " of " << summary.instances
              << " graph instances failed\n";
  return summary.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-aware sampling experiments on graph signals"};
  app.require_subcommand(1);

  std::string run_path, describe_path, real_path;
  Overrides run_o, describe_o, real_o;
  auto* run = app.add_subcommand("run", "synthetic sweep, writes a CSV");
  add_overrides(run, run_path, run_o);
  auto* desc = app.add_subcommand("describe", "print the resolved plan without computing");
  add_overrides(desc, describe_path, describe_o);
  auto* real = app.add_subcommand("real", "sample under the assumed model, score on given signals");
  add_overrides(real, real_path, real_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*desc) {
      std::cout << describe(load(describe_path, describe_o));
      return kExitOk;
    }
    if (*run) {
      const auto c = load(run_path, run_o);
      return finish(run_experiment(c, &std::cerr), c);
    }
    const auto c = load(real_path, real_o);
    return finish(run_real_dataset(c, &std::cerr), c);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartialFailure;
  }
}
