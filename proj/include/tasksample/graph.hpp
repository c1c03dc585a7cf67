#pragma once

#include "tasksample/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tasksample {

struct Edge {
  Index source = 0;
  Index target = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphMetadata {
  std::string name;
  std::optional<std::uint64_t> seed;
};

/// Undirected, connected, positively weighted graph without self-loops.
///
/// Edges are stored once with source < target, sorted lexicographically, so
/// two graphs built from the same edge set compare equal bit for bit.
/// Construction throws DisconnectedGraph if more than one component exists.
class Graph {
 public:
  Graph(Index node_count, std::vector<Edge> edges, GraphMetadata metadata = {});

  Index node_count() const noexcept { return node_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const GraphMetadata& metadata() const noexcept { return metadata_; }

  Matrix adjacency() const;
  Vector degrees() const;

 private:
  Index node_count_;
  std::vector<Edge> edges_;
  GraphMetadata metadata_;
};

/// Number of connected components of the graph on `node_count` nodes.
Index count_components(Index node_count, const std::vector<Edge>& edges);

// Barabasi-Albert growth: a clique on m + 1 seed nodes, then each new node
// attaches to m distinct existing nodes chosen with probability proportional
// to degree. At least one node must be grown, so n > m + 1.
Graph generate_ba(Index n, Index m, std::uint64_t seed);

struct SbmParams {
  Index n = 0;
  Index num_blocks = 2;
  double p_in = 0.7;
  double p_out = 0.1;
};

// Stochastic block model with equal blocks (the remainder goes to the first
// blocks). Disconnected draws are rejected and redrawn from a derived seed,
// at most kSbmRetryCap times.
inline constexpr int kSbmRetryCap = 100;
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

/// Block index of every node under the equal-split rule used by generate_sbm.
std::vector<Index> sbm_block_assignment(Index n, Index num_blocks);

/// Edge-list file: `i,j,weight` per line, `#` comments, either orientation.
/// Duplicate edges keep their first weight.
Graph load_graph(const std::filesystem::path& path);

/// (D + gamma I)^{-1/2} (A + gamma I) (D + gamma I)^{-1/2}.
Matrix normalized_adjacency(const Graph& g, double gamma);

/// Symmetrically normalized Laplacian I - D^{-1/2} A D^{-1/2}.
Matrix laplacian(const Graph& g);

struct SpectralBasis {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column j pairs with eigenvalues(j)

  Index size() const noexcept { return eigenvalues.size(); }
  Matrix low_band(Index k) const { return eigenvectors.leftCols(k); }
};

// Symmetric eigendecomposition with a deterministic sign per column: the
// first entry of largest magnitude is made positive. Throws InvalidInput if
// the matrix is not symmetric within 1e-10.
SpectralBasis eigendecompose(const Matrix& symmetric);

inline constexpr double kDegeneracyGap = 1e-9;

/// True when eigenvalues k-1 and k (0-based) are closer than kDegeneracyGap,
/// i.e. the k-bandlimiting projector is not uniquely defined.
bool bandwidth_is_degenerate(const SpectralBasis& basis, Index k);

}  // namespace tasksample
