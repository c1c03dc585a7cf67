#pragma once

#include "tasksample/config.hpp"
#include "tasksample/graph.hpp"
#include "tasksample/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tasksample {

// One cell of a synthetic sweep. MC fields are empty when mc.trials = 0.
struct ResultRow {
  Index graph_id = 0;
  std::string sampler;
  std::string reconstruction_method;
  double eta2 = 0.0;
  Index sample_size = 0;
  double analytic_classification_loss = 0.0;
  double analytic_reconstruction_loss = 0.0;
  std::optional<double> mc_classification_mean;
  std::optional<double> mc_classification_se;
  std::optional<double> mc_reconstruction_mean;
  std::optional<double> mc_reconstruction_se;
  double wall_time_ms = 0.0;
};

inline constexpr const char* kResultHeader =
    "graph_id,sampler,reconstruction_method,eta2,sample_size,"
    "analytic_classification_loss,analytic_reconstruction_loss,"
    "mc_classification_mean,mc_classification_se,mc_reconstruction_mean,"
    "mc_reconstruction_se,wall_time_ms";

// One cell of a real-dataset run. Analytic columns are computed under the
// assumed model; empirical columns are computed on the supplied signals.
struct RealResultRow {
  Index graph_id = 0;
  std::string sampler;
  std::string reconstruction_method;
  double eta2 = 0.0;
  Index sample_size = 0;
  double analytic_classification_loss = 0.0;
  double analytic_reconstruction_loss = 0.0;
  double empirical_classification_mean = 0.0;
  double empirical_classification_se = 0.0;
  double empirical_reconstruction_mean_per_signal = 0.0;
  double empirical_reconstruction_se = 0.0;
  double empirical_reconstruction_total = 0.0;
  Index signals = 0;
  double wall_time_ms = 0.0;
};

inline constexpr const char* kRealResultHeader =
    "graph_id,sampler,reconstruction_method,eta2,sample_size,"
    "analytic_classification_loss,analytic_reconstruction_loss,"
    "empirical_classification_mean,empirical_classification_se,"
    "empirical_reconstruction_mean_per_signal,empirical_reconstruction_se,"
    "empirical_reconstruction_total,signals,wall_time_ms";

struct ExperimentSummary {
  std::vector<ResultRow> rows;
  std::vector<RealResultRow> real_rows;
  Index instances = 0;
  Index failed_instances = 0;
  std::vector<std::string> failures;
  // Share of MC rows whose classification mean lies within 4 SE of the
  // analytic value; nullopt when MC is disabled.
  std::optional<double> mc_agreement;
  int exit_code = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitPartialFailure = 2;

/// Graph instance `graph_id` of the configured model (or the loaded file).
Graph make_graph(const ExperimentConfig& config, Index graph_id);

// Runs the synthetic sweep. Rows are ordered by (graph_id, method, eta2,
// sampler, sample_size). A failing graph instance is logged to `log` and
// skipped. Does not write files; see write_results_csv.
ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 std::ostream* log = nullptr);

// Real-dataset pathway: sample sets are chosen under the assumed Gaussian
// model, losses are measured on the supplied signals.
ExperimentSummary run_real_dataset(const ExperimentConfig& config,
                                   std::ostream* log = nullptr);

/// Human-readable plan: resolved parameters, counts and a memory estimate.
std::string describe(const ExperimentConfig& config);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_results_csv(std::ostream& out, const std::vector<RealResultRow>& rows);
void write_results_csv(const std::filesystem::path& path, const ExperimentSummary& summary);

/// Edge-list writer matching load_graph's format.
void write_graph(const std::filesystem::path& path, const Graph& g);

}  // namespace tasksample
