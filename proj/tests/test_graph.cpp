#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tasksample/graph.hpp"
#include "tasksample/linalg.hpp"

#include <cmath>

using namespace tasksample;
using testutil::complete_graph;
using testutil::path_graph;

TEST_CASE("graph construction validates edges") {
  CHECK_THROWS_AS(Graph(3, {{0, 0, 1.0}, {1, 2, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph(3, {{0, 1, -1.0}, {1, 2, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph(3, {{0, 3, 1.0}, {1, 2, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}}), InvalidInput);
}

TEST_CASE("edges are normalized and sorted") {
  const Graph a(3, {{2, 1, 1.0}, {1, 0, 2.0}});
  const Graph b(3, {{0, 1, 2.0}, {1, 2, 1.0}});
  CHECK(a.edges() == b.edges());
  CHECK(a.edges().front().source < a.edges().front().target);
  const Matrix adj = a.adjacency();
  CHECK(adj(0, 1) == 2.0);
  CHECK(adj(1, 0) == 2.0);
  CHECK(a.degrees()(1) == 3.0);
}

TEST_CASE("disconnected graphs report their component count") {
  try {
    Graph(5, {{0, 1, 1.0}, {2, 3, 1.0}});
    FAIL("expected DisconnectedGraph");
  } catch (const DisconnectedGraph& e) {
    CHECK(e.components() == 3);
  }
  CHECK(count_components(4, {{0, 1, 1.0}, {2, 3, 1.0}}) == 2);
}

TEST_CASE("barabasi-albert generator") {
  const Graph g = generate_ba(500, 3, 11);
  CHECK(g.node_count() == 500);
  // Clique on 4 nodes plus 3 edges for every later node.
  CHECK(g.edges().size() == 6 + 3 * (500 - 4));
  CHECK_THROWS_AS(generate_ba(5, 4, 1), InvalidParameter);
  CHECK_THROWS_AS(generate_ba(3, 3, 1), InvalidParameter);

  const Graph a = generate_ba(50, 3, 7);
  const Graph b = generate_ba(50, 3, 7);
  CHECK(a.edges() == b.edges());
  CHECK(a.edges() != generate_ba(50, 3, 8).edges());
}

TEST_CASE("stochastic block model") {
  const Graph g = generate_sbm({500, 2, 0.7, 0.1}, 5);
  CHECK(g.node_count() == 500);
  CHECK(count_components(g.node_count(), g.edges()) == 1);

  const Graph k10 = generate_sbm({10, 1, 1.0, 0.0}, 2);
  CHECK(k10.edges() == complete_graph(10).edges());

  // Intra-block density over 2 * C(20, 2) = 380 pairs; a binomial(380, 0.7)
  // stays inside [0.55, 0.85] with overwhelming probability.
  const SbmParams p{40, 2, 0.7, 0.1};
  const Graph s = generate_sbm(p, 3);
  const auto blocks = sbm_block_assignment(40, 2);
  double intra = 0.0;
  for (const auto& e : s.edges())
    if (blocks[e.source] == blocks[e.target]) intra += 1.0;
  const double density = intra / 380.0;
  CHECK(density >= 0.55);
  CHECK(density <= 0.85);

  CHECK(generate_sbm(p, 3).edges() == s.edges());

  // p_in = p_out = 0 can never be connected.
  CHECK_THROWS_AS(generate_sbm({6, 2, 0.0, 0.0}, 1), GenerationFailure);
  CHECK_THROWS_AS(generate_sbm({6, 0, 0.5, 0.5}, 1), InvalidParameter);
}

TEST_CASE("sbm block assignment spreads the remainder") {
  const auto b = sbm_block_assignment(7, 3);
  CHECK(b == std::vector<Index>{0, 0, 0, 1, 1, 2, 2});
}

TEST_CASE("edge list loader") {
  testutil::TempDir dir;
  const Graph p3 = load_graph(dir.write("p3.csv", "0,1,1.0\n1,2,1.0\n"));
  CHECK(p3.edges() == path_graph(3).edges());

  CHECK_THROWS_AS(load_graph(dir.write("split.csv", "0,1,1.0\n2,3,1.0\n")), DisconnectedGraph);

  try {
    load_graph(dir.write("bad.csv", "# header\n0,1,1\n1,x,1\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  const Graph dup = load_graph(dir.write("dup.csv", "0,1,2.5\n1,0,7\n1,2,1\n"));
  CHECK(dup.adjacency()(0, 1) == 2.5);

  const Graph tri = load_graph(dir.write("tri.csv", " 0 , 1 , 1\n1,2,1\n0,2,1\n"));
  const Matrix a = normalized_adjacency(tri, 0.0);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(a(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
}

TEST_CASE("normalized adjacency") {
  const Graph g = generate_ba(60, 2, 4);
  const Vector deg = g.degrees();
  const Matrix scale = deg.cwiseSqrt().cwiseInverse().asDiagonal();
  const Matrix direct = scale * g.adjacency() * scale;
  CHECK((normalized_adjacency(g, 0.0) - direct).cwiseAbs().maxCoeff() <= 1e-12);

  // gamma = 1 on K_3: (A + I) / 3, every entry 1/3.
  const Matrix k3 = normalized_adjacency(complete_graph(3), 1.0);
  CHECK((k3 - Matrix::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK(spectral_norm(normalized_adjacency(generate_ba(100, 3, 9), 1.0)) <= 1.0 + 1e-10);

  for (int seed = 0; seed < 20; ++seed) {
    const Graph r = seed % 2 ? generate_ba(40 + seed, 2, seed)
                             : generate_sbm({40 + seed, 2, 0.5, 0.1}, seed);
    for (double gamma : {0.0, 0.5, 1.0, 5.0})
      CHECK(spectral_norm(normalized_adjacency(r, gamma)) <= 1.0 + 1e-10);
  }
}

TEST_CASE("laplacian") {
  const Matrix l3 = laplacian(complete_graph(3));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(l3(i, j) == doctest::Approx(i == j ? 1.0 : -0.5));

  const Graph g = generate_ba(80, 3, 2);
  const Matrix l = laplacian(g);
  CHECK(asymmetry(l) == 0.0);
  const SpectralBasis b = eigendecompose(l);
  CHECK(b.eigenvalues.minCoeff() >= -1e-10);
  CHECK(b.eigenvalues.maxCoeff() <= 2.0 + 1e-10);
  CHECK(std::abs(b.eigenvalues(0)) <= 1e-10);
  CHECK(b.eigenvalues(1) > 1e-6);

  CHECK(std::abs(eigendecompose(laplacian(path_graph(3))).eigenvalues(0)) <= 1e-12);
}

TEST_CASE("eigendecomposition") {
  const SpectralBasis k3 = eigendecompose(laplacian(complete_graph(3)));
  CHECK(k3.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k3.eigenvalues(1) == doctest::Approx(1.5));
  CHECK(k3.eigenvalues(2) == doctest::Approx(1.5));

  const SpectralBasis id = eigendecompose(Matrix::Identity(5, 5));
  CHECK((id.eigenvalues.array() - 1.0).abs().maxCoeff() <= 1e-14);

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(eigendecompose(asym), InvalidInput);

  const Graph g = generate_sbm({70, 2, 0.6, 0.1}, 8);
  const SpectralBasis b = eigendecompose(laplacian(g));
  const Index n = b.size();
  CHECK((b.eigenvectors.transpose() * b.eigenvectors - Matrix::Identity(n, n)).norm() <= 1e-10);
  for (Index j = 1; j < n; ++j) CHECK(b.eigenvalues(j) >= b.eigenvalues(j - 1));

  // Sign convention: first entry of largest magnitude is positive.
  for (Index j = 0; j < n; ++j) {
    Index arg = 0;
    const auto col = b.eigenvectors.col(j);
    const double top = col.cwiseAbs().maxCoeff();
    while (std::abs(col(arg)) < top - 1e-12) ++arg;
    CHECK(col(arg) > 0.0);
  }

  // Same input, same output to the bit.
  const SpectralBasis again = eigendecompose(laplacian(g));
  CHECK(again.eigenvectors == b.eigenvectors);
}

TEST_CASE("bandwidth degeneracy") {
  // K_3 has the eigenvalue 1.5 twice: k = 2 splits the pair.
  const SpectralBasis k3 = eigendecompose(laplacian(complete_graph(3)));
  CHECK(bandwidth_is_degenerate(k3, 2));
  CHECK_FALSE(bandwidth_is_degenerate(k3, 1));
  CHECK_FALSE(bandwidth_is_degenerate(k3, 3));
}
