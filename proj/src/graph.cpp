#include "tasksample/graph.hpp"

#include "tasksample/linalg.hpp"
#include "tasksample/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

namespace tasksample {

namespace {

// Union-find with path halving; only used for component counting.
class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }
  Index find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<Index> parent_;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Index count_components(Index node_count, const std::vector<Edge>& edges) {
  DisjointSets sets(node_count);
  Index components = node_count;
  for (const auto& e : edges)
    if (sets.unite(e.source, e.target)) --components;
  return components;
}

Graph::Graph(Index node_count, std::vector<Edge> edges, GraphMetadata metadata)
    : node_count_(node_count), edges_(std::move(edges)),
      metadata_(std::move(metadata)) {
  if (node_count_ < 1) throw InvalidParameter("graph needs at least one node");
  for (auto& e : edges_) {
    if (e.source < 0 || e.target < 0 || e.source >= node_count_ ||
        e.target >= node_count_)
      throw InvalidInput("edge (" + std::to_string(e.source) + ", " +
                         std::to_string(e.target) + ") outside [0, " +
                         std::to_string(node_count_) + ")");
    if (e.source == e.target)
      throw InvalidInput("self-loop on node " + std::to_string(e.source));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InvalidInput("edge weight must be positive and finite");
    if (e.source > e.target) std::swap(e.source, e.target);
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (edges_[i].source == edges_[i - 1].source &&
        edges_[i].target == edges_[i - 1].target)
      throw InvalidInput("duplicate edge (" + std::to_string(edges_[i].source) +
                         ", " + std::to_string(edges_[i].target) + ")");

  const Index components = count_components(node_count_, edges_);
  if (components != 1)
    throw DisconnectedGraph(
        "graph is disconnected: " + std::to_string(components) + " components",
        components);
}

Matrix Graph::adjacency() const {
  Matrix a = Matrix::Zero(node_count_, node_count_);
  for (const auto& e : edges_) {
    a(e.source, e.target) = e.weight;
    a(e.target, e.source) = e.weight;
  }
  return a;
}

Vector Graph::degrees() const {
  Vector d = Vector::Zero(node_count_);
  for (const auto& e : edges_) {
    d(e.source) += e.weight;
    d(e.target) += e.weight;
  }
  return d;
}

Graph generate_ba(Index n, Index m, std::uint64_t seed) {
  if (m < 1) throw InvalidParameter("BA attachment count m must be >= 1");
  // n = m + 1 would be the seed clique alone, with no preferential growth.
  if (n <= m + 1)
    throw InvalidParameter("BA needs n > m + 1 (got n=" + std::to_string(n) +
                           ", m=" + std::to_string(m) + ")");

  Rng rng(seed);
  std::vector<Edge> edges;
  // Each node appears once per incident edge endpoint, so a uniform draw from
  // this list is a degree-proportional draw.
  std::vector<Index> endpoints;
  for (Index i = 0; i <= m; ++i)
    for (Index j = i + 1; j <= m; ++j) {
      edges.push_back({i, j, 1.0});
      endpoints.push_back(i);
      endpoints.push_back(j);
    }

  std::vector<Index> targets;
  for (Index v = m + 1; v < n; ++v) {
    targets.clear();
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    while (static_cast<Index>(targets.size()) < m) {
      const Index t = endpoints[pick(rng)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end())
        targets.push_back(t);
    }
    for (Index t : targets) {
      edges.push_back({t, v, 1.0});
      endpoints.push_back(t);
      endpoints.push_back(v);
    }
  }
  return Graph(n, std::move(edges), {"ba", seed});
}

std::vector<Index> sbm_block_assignment(Index n, Index num_blocks) {
  std::vector<Index> block(n);
  const Index base = n / num_blocks;
  const Index extra = n % num_blocks;
  Index node = 0;
  for (Index b = 0; b < num_blocks; ++b) {
    const Index size = base + (b < extra ? 1 : 0);
    for (Index i = 0; i < size; ++i) block[node++] = b;
  }
  return block;
}

Graph generate_sbm(const SbmParams& p, std::uint64_t seed) {
  if (p.num_blocks < 1) throw InvalidParameter("SBM needs at least one block");
  if (p.n < p.num_blocks)
    throw InvalidParameter("SBM needs n >= num_blocks");
  if (!(p.p_out >= 0.0 && p.p_out <= p.p_in && p.p_in <= 1.0))
    throw InvalidParameter("SBM needs 0 <= p_out <= p_in <= 1");

  const auto block = sbm_block_assignment(p.n, p.num_blocks);
  for (int attempt = 0; attempt < kSbmRetryCap; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, attempt));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<Edge> edges;
    for (Index i = 0; i < p.n; ++i)
      for (Index j = i + 1; j < p.n; ++j) {
        const double prob = block[i] == block[j] ? p.p_in : p.p_out;
        if (coin(rng) < prob) edges.push_back({i, j, 1.0});
      }
    if (count_components(p.n, edges) == 1)
      return Graph(p.n, std::move(edges), {"sbm", seed});
  }
  std::ostringstream msg;
  msg << "SBM generation failed after " << kSbmRetryCap
      << " attempts to draw a connected graph (n=" << p.n
      << ", blocks=" << p.num_blocks << ", p_in=" << p.p_in
      << ", p_out=" << p.p_out << ", seed=" << seed << ")";
  throw GenerationFailure(msg.str());
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list " + path.string(), 0);

  std::map<std::pair<Index, Index>, double> weights;
  Index max_id = -1;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    auto fail = [&](const std::string& why) -> ParseError {
      return ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                            why,
                        line_no);
    };
    if (fields.size() != 3) throw fail("expected `i,j,weight`");

    long long i = 0, j = 0;
    double w = 0.0;
    try {
      std::size_t pos = 0;
      i = std::stoll(fields[0], &pos);
      if (pos != fields[0].size()) throw std::invalid_argument("i");
      j = std::stoll(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("j");
      w = std::stod(fields[2], &pos);
      if (pos != fields[2].size()) throw std::invalid_argument("w");
    } catch (const std::exception&) {
      throw fail("malformed number");
    }
    if (i < 0 || j < 0) throw fail("negative node id");
    if (i == j) throw fail("self-loop");
    if (!(w > 0.0) || !std::isfinite(w)) throw fail("weight must be > 0");

    const std::pair<Index, Index> key{std::min<Index>(i, j), std::max<Index>(i, j)};
    weights.emplace(key, w);
    max_id = std::max<Index>(max_id, std::max<Index>(i, j));
  }
  if (max_id < 0) throw ParseError(path.string() + ": no edges", line_no);

  std::vector<Edge> edges;
  edges.reserve(weights.size());
  for (const auto& [key, w] : weights) edges.push_back({key.first, key.second, w});
  return Graph(max_id + 1, std::move(edges), {path.filename().string(), {}});
}

Matrix normalized_adjacency(const Graph& g, double gamma) {
  if (gamma < 0.0) throw InvalidParameter("gamma must be nonnegative");
  const Index n = g.node_count();
  Matrix a = g.adjacency();
  a.diagonal().array() += gamma;
  Vector scale = (g.degrees().array() + gamma).matrix();
  for (Index i = 0; i < n; ++i)
    scale(i) = scale(i) > 0.0 ? 1.0 / std::sqrt(scale(i)) : 0.0;
  return scale.asDiagonal() * a * scale.asDiagonal();
}

Matrix laplacian(const Graph& g) {
  const Index n = g.node_count();
  return Matrix::Identity(n, n) - normalized_adjacency(g, 0.0);
}

SpectralBasis eigendecompose(const Matrix& symmetric) {
  if (symmetric.rows() != symmetric.cols())
    throw InvalidInput("eigendecompose needs a square matrix");
  if (asymmetry(symmetric) > 1e-10)
    throw InvalidInput("eigendecompose needs a symmetric matrix (asymmetry " +
                       std::to_string(asymmetry(symmetric)) + ")");

  // Solve on the exactly symmetrized matrix so both triangles agree.
  const Matrix sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw InvalidInput("eigendecomposition did not converge");

  SpectralBasis basis{solver.eigenvalues(), solver.eigenvectors()};
  for (Index j = 0; j < basis.eigenvectors.cols(); ++j) {
    auto col = basis.eigenvectors.col(j);
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < col.size(); ++i)
      if (std::abs(col(i)) > best) {
        best = std::abs(col(i));
        arg = i;
      }
    if (col(arg) < 0.0) col = -col;
  }
  return basis;
}

bool bandwidth_is_degenerate(const SpectralBasis& basis, Index k) {
  if (k <= 0 || k >= basis.size()) return false;
  return std::abs(basis.eigenvalues(k) - basis.eigenvalues(k - 1)) <
         kDegeneracyGap;
}

}  // namespace tasksample
