// Writes a graph file and a signals file drawn from the bandlimited Gaussian
// model, for exercising the real-dataset pathway without real data.
#include "tasksample/experiment.hpp"
#include "tasksample/graph.hpp"
#include "tasksample/rng.hpp"
#include "tasksample/signal.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace tasksample;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic stand-in for a real graph-signal dataset"};
  Index nodes = 120, attach = 3, signals = 40, bandwidth = 0;
  std::uint64_t seed = 1;
  std::string dir = ".";
  app.add_option("--nodes", nodes, "graph size");
  app.add_option("--attach", attach, "BA attachment count");
  app.add_option("--signals", signals, "number of signal columns");
  app.add_option("--bandwidth", bandwidth, "k (default N/10)");
  app.add_option("--seed", seed, "seed");
  app.add_option("--dir", dir, "output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    const Graph g = generate_ba(nodes, attach, derive_seed(seed, 0));
    const Index k = bandwidth > 0 ? bandwidth : nodes / 10;
    const SpectralBasis basis = eigendecompose(laplacian(g));
    const Matrix sigma = realize_covariance(CovarianceSpec{Bandlimited{k}}, basis);
    const FeatureMatrix x = sample_features(sigma, signals, derive_seed(seed, 1));
    write_graph(std::filesystem::path(dir) / "graph.csv", g);
    write_signals(std::filesystem::path(dir) / "signals.csv", x.values);
    std::cerr << "wrote " << nodes << "-node graph and " << signals << " signals to " << dir
              << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
