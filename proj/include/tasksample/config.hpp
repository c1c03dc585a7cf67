#pragma once

#include "tasksample/classifier.hpp"
#include "tasksample/reconstruction.hpp"
#include "tasksample/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tasksample {

// A node-count-relative quantity: an absolute count ("50"), a fraction of
// the node count ("N/10", floored), or a multiple of the resolved bandwidth
// ("3k", only where a bandwidth exists).
struct CountRule {
  enum class Kind { Absolute, NodeFraction, BandwidthMultiple };
  Kind kind = Kind::Absolute;
  Index value = 1;

  static CountRule parse(const std::string& text);
  Index resolve(Index nodes, Index bandwidth = 0) const;
  std::string str() const;
};

enum class GraphModel { BarabasiAlbert, StochasticBlock, File };
enum class CovarianceKind { Bandlimited, LaplacianPseudoinverse };
enum class ClassifierKind { Sgc, Polynomial, Identity };
enum class SamplerKind { Random, GreedyClassification, GreedyReconstruction };

std::string to_string(GraphModel m);
std::string to_string(SamplerKind s);

struct GraphSpec {
  GraphModel model = GraphModel::BarabasiAlbert;
  Index nodes = 500;
  int count = 32;
  Index attach = 3;
  Index blocks = 2;
  double p_in = 0.7;
  double p_out = 0.1;
  std::filesystem::path file;
};

struct SignalSpec {
  CovarianceKind covariance = CovarianceKind::Bandlimited;
  CountRule bandwidth{CountRule::Kind::NodeFraction, 10};
  Index dim = 64;
  std::vector<double> noise{0.0, 1e-3};
  std::filesystem::path file;  // real-dataset signals
  bool center = true;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::Sgc;
  double gamma = 1.0;
  int layers = 1;
  std::vector<LayerShape> widths{{64, 32}, {32, 1}};
  std::vector<double> coefficients{0.0, 1.0};
};

struct SweepSpec {
  CountRule min{CountRule::Kind::Absolute, 1};
  CountRule max{CountRule::Kind::NodeFraction, 5};
  Index step = 1;
};

struct ExperimentConfig {
  GraphSpec graph;
  SignalSpec signal;
  ClassifierSpec classifier;
  std::vector<MethodKind> methods{MethodKind::LeastSquares,
                                  MethodKind::FeaturePropagation};
  std::vector<SamplerKind> samplers{SamplerKind::Random,
                                    SamplerKind::GreedyClassification,
                                    SamplerKind::GreedyReconstruction};
  int random_draws = 32;
  SweepSpec sweep;
  Index trials = 0;
  std::uint64_t seed = 1;
  std::filesystem::path output = "results.csv";
  int threads = 1;
};

/// Parses the flat `section.key = value` format. Unknown or repeated keys
/// are errors. Relative file paths resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& in,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Checks every parameter that can be checked without generating a graph.
// Throws ValidationError naming the offending key.
void validate(const ExperimentConfig& config);

// Node-count dependent checks (bandwidth and sweep bounds within [1, n]).
void validate_for_nodes(const ExperimentConfig& config, Index nodes);

/// Sample sizes of the sweep for an n-node graph with bandwidth k.
std::vector<Index> sweep_sizes(const ExperimentConfig& config, Index nodes,
                               Index bandwidth);

}  // namespace tasksample
