#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tasksample/classifier.hpp"
#include "tasksample/linalg.hpp"
#include "tasksample/losses.hpp"
#include "tasksample/rng.hpp"
#include "tasksample/sampler.hpp"
#include "tasksample/signal.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace tasksample;

namespace {

SampleSet all_nodes(Index n) {
  std::vector<Index> v(n);
  std::iota(v.begin(), v.end(), Index{0});
  return SampleSet(v, n);
}

struct Instance {
  Graph graph;
  Matrix lap;
  SpectralBasis basis;
  Matrix sigma;
};

Instance bandlimited(Index n, Index k, std::uint64_t seed) {
  Graph g = generate_ba(n, 2, seed);
  Matrix lap = laplacian(g);
  SpectralBasis basis = eigendecompose(lap);
  Matrix sigma = bandlimiting_projector(basis, k);
  return {std::move(g), std::move(lap), std::move(basis), std::move(sigma)};
}

}  // namespace

TEST_CASE("sign mismatch probability") {
  CHECK(sign_mismatch_probability(1.0) == 0.0);
  CHECK(sign_mismatch_probability(0.0) == doctest::Approx(0.5));
  CHECK(sign_mismatch_probability(-1.0) == doctest::Approx(1.0));
  CHECK(sign_mismatch_probability(0.5) == doctest::Approx(1.0 / 3.0));
  CHECK(sign_mismatch_probability(1.0 + 5e-10) == 0.0);
  CHECK_THROWS_AS(sign_mismatch_probability(1.001), InvalidInput);
  CHECK_THROWS_AS(sign_mismatch_probability(std::nan("")), InvalidInput);

  // 1e6 paired draws at rho = 0.5.
  Rng rng(2024);
  std::normal_distribution<double> z;
  const double rho = 0.5;
  const double tail = std::sqrt(1.0 - rho * rho);
  const int draws = 1000000;
  int hits = 0;
  for (int t = 0; t < draws; ++t) {
    const double a = z(rng);
    const double b = rho * a + tail * z(rng);
    if ((a < 0.0) != (b < 0.0)) ++hits;
  }
  const double p = 1.0 / 3.0;
  const double freq = static_cast<double>(hits) / draws;
  CHECK(std::abs(freq - p) <= 3.0 * std::sqrt(p * (1.0 - p) / draws));
}

TEST_CASE("full observation with the full band is lossless") {
  const Instance inst = bandlimited(20, 20, 1);
  const auto op = ls_operator(inst.basis, 20, all_nodes(20));
  const auto r = analyze(Matrix::Identity(20, 20), op, inst.sigma, 0.0, 3);
  for (Index i = 0; i < 20; ++i) CHECK(r.rho(i) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.classification_loss <= 1e-6 * 20);
  CHECK(*r.reconstruction_loss <= 1e-10);
}

TEST_CASE("noiseless least squares: nu^2 = c and the arccos(sqrt(c / sigma^2)) shape") {
  const Instance inst = bandlimited(50, 5, 4);
  const Matrix g = normalized_adjacency(inst.graph, 1.0);
  for (Index size : {2, 4, 5, 9, 20}) {
    const auto op = ls_operator(inst.basis, 5, random_sample(50, size, size));
    const auto r = node_statistics(g, op, EffectiveCovariance{inst.sigma}, 0.0);
    for (Index i = 0; i < 50; ++i) {
      CHECK(std::abs(r.nu(i) * r.nu(i) - r.c(i)) <= 1e-8);
      if (r.sigma(i) > 1e-6 && r.nu(i) > 1e-6) {
        const double x = std::clamp(r.c(i) / (r.sigma(i) * r.sigma(i)), 0.0, 1.0);
        CHECK(r.p_misclass(i) ==
              doctest::Approx(std::acos(std::sqrt(x)) / std::numbers::pi).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("node statistics invariants") {
  const Instance inst = bandlimited(40, 4, 9);
  const Matrix g = matrix_power(normalized_adjacency(inst.graph, 0.5), 2);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const SampleSet s = random_sample(40, 1 + seed * 3, seed);
    for (double eta2 : {0.0, 1e-3}) {
      const auto op = seed % 2 ? fp_operator(inst.lap, s) : ls_operator(inst.basis, 4, s);
      const auto r = node_statistics(g, op, EffectiveCovariance{inst.sigma}, eta2);
      CHECK(r.p_misclass.minCoeff() >= 0.0);
      CHECK(r.p_misclass.maxCoeff() <= 1.0);
      CHECK(r.classification_loss >= 0.0);
      CHECK(r.classification_loss <= 40.0);
      for (Index i = 0; i < 40; ++i) CHECK(std::abs(r.c(i)) <= r.sigma(i) * r.nu(i) + 1e-10);
      CHECK(reconstruction_loss(op, inst.sigma, eta2, 2) >= -1e-8);
    }
  }
}

TEST_CASE("classification loss is invariant to the scale of w") {
  const Instance inst = bandlimited(30, 3, 2);
  const Matrix a = normalized_adjacency(inst.graph, 1.0);
  const std::vector<LayerShape> widths{{4, 3}, {3, 1}};
  const ClassifierModel m = build_sgc(a, 2, widths, 3);
  const auto op = ls_operator(inst.basis, 3, random_sample(30, 4, 1));
  const auto c1 = effective_covariance(inst.sigma, m.w, true);
  const auto c2 = effective_covariance(inst.sigma, 2.0 * m.w, true);
  const auto r1 = node_statistics(m.g, op, c1, 1e-3);
  const auto r2 = node_statistics(m.g, op, c2, 1e-3);
  CHECK(r1.rho == r2.rho);
}

TEST_CASE("degenerate nodes fall back to one half") {
  const Instance inst = bandlimited(30, 3, 5);
  // One sample and a filter that zeroes a row: sigma_0 = 0 there.
  Matrix g = Matrix::Identity(30, 30);
  g.row(0).setZero();
  const auto op = ls_operator(inst.basis, 3, SampleSet({7}, 30));
  const auto r = node_statistics(g, op, EffectiveCovariance{inst.sigma}, 0.0);
  CHECK(r.p_misclass(0) == 0.5);
  CHECK(r.degenerate_nodes >= 1);
  CHECK(std::isfinite(r.classification_loss));
}

TEST_CASE("classification loss edge values") {
  NodeLossReport r;
  r.p_misclass = Vector::Zero(6);
  CHECK(classification_loss(r) == 0.0);
  r.p_misclass = Vector::Constant(6, sign_mismatch_probability(0.0));
  CHECK(classification_loss(r) == doctest::Approx(3.0));
}

TEST_CASE("noiseless full-rank least squares classifies perfectly") {
  const Instance inst = bandlimited(60, 6, 8);
  const Matrix g = normalized_adjacency(inst.graph, 1.0);
  Eigen::ColPivHouseholderQR<Matrix> qr(inst.basis.low_band(6).transpose());
  std::vector<Index> rows;
  for (Index j = 0; j < 8; ++j) rows.push_back(qr.colsPermutation().indices()(j));
  const auto op = ls_operator(inst.basis, 6, SampleSet(rows, 60));
  CHECK(op.rank == 6);
  const auto r = analyze(g, op, inst.sigma, 0.0, 1);
  CHECK(r.classification_loss <= 1e-6 * 60);
  CHECK(*r.reconstruction_loss <= 1e-8 * 60);
}

TEST_CASE("reconstruction loss against Monte-Carlo on an 8-node instance") {
  const Instance inst = bandlimited(8, 3, 3);
  for (int method = 0; method < 2; ++method) {
    const SampleSet s({1, 4, 6}, 8);
    const auto op = method ? fp_operator(inst.lap, s) : ls_operator(inst.basis, 3, s);
    const double eta2 = 1e-2;
    const double analytic = reconstruction_loss(op, inst.sigma, eta2, 1);
    const ClassifierModel id = explicit_model(Matrix::Identity(8, 8), Vector::Ones(1));
    const auto mc = monte_carlo_losses(id, inst.sigma, op, eta2, 100000, 77 + method);
    CHECK(std::abs(mc.reconstruction.mean - analytic) <= 3.0 * mc.reconstruction.standard_error);
  }
}

TEST_CASE("rho against the empirical output correlation on a 6-node instance") {
  const Instance inst = bandlimited(6, 2, 12);
  const Matrix g = normalized_adjacency(inst.graph, 1.0);
  const SampleSet s({0, 3, 5}, 6);
  const auto op = fp_operator(inst.lap, s);
  const double eta2 = 1e-2;
  const auto r = node_statistics(g, op, EffectiveCovariance{inst.sigma}, eta2);

  const GaussianSource source(inst.sigma);
  const Index trials = 100000;
  Matrix clean(6, trials), rebuilt(6, trials);
  for (Index t = 0; t < trials; ++t) {
    const FeatureMatrix x = source.sample(1, derive_seed(5, {std::uint64_t(t), 0}));
    const Matrix y = observe(x, s, {eta2}, derive_seed(5, {std::uint64_t(t), 1}));
    clean.col(t) = g * x.values.col(0);
    rebuilt.col(t) = g * (op.matrix * y.col(0));
  }
  for (Index i = 0; i < 6; ++i) {
    const double sa = clean.row(i).squaredNorm() / trials;
    const double sb = rebuilt.row(i).squaredNorm() / trials;
    const double emp = clean.row(i).dot(rebuilt.row(i)) / trials / std::sqrt(sa * sb);
    // Fisher-type standard error of a sample correlation.
    const double se = (1.0 - emp * emp) / std::sqrt(static_cast<double>(trials));
    CHECK(std::abs(emp - r.rho(i)) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("output error and triangle identity") {
  NodeLossReport r;
  r.sigma = Vector::Constant(2, 0.7);
  r.nu = Vector::Constant(2, 0.7);
  r.c = Vector::Constant(2, 0.49);
  r.rho = Vector::Ones(2);
  r.p_misclass = Vector::Zero(2);
  auto out = output_error_and_triangle(r, 4);
  CHECK(std::abs(out[0].error_out) <= 1e-15);

  r.sigma << 1.0, 2.0;
  r.nu << 0.5, 3.0;
  r.c.setZero();
  r.rho.setZero();
  r.p_misclass.setConstant(0.5);
  out = output_error_and_triangle(r, 2);
  CHECK(out[0].error_out / 2 == doctest::Approx(1.25));
  CHECK(out[1].error_out / 2 == doctest::Approx(13.0));
  CHECK(out[1].triangle_residual <= 1e-12);

  const Instance inst = bandlimited(40, 4, 6);
  const Matrix g = normalized_adjacency(inst.graph, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto op = fp_operator(inst.lap, random_sample(40, 2 + seed, seed));
    const auto rep = node_statistics(g, op, EffectiveCovariance{inst.sigma}, 1e-3);
    for (const auto& rec : output_error_and_triangle(rep, 3)) CHECK(rec.triangle_residual <= 1e-8);
  }
}

TEST_CASE("spectral bound") {
  const Instance inst = bandlimited(30, 30, 3);
  const auto op = ls_operator(inst.basis, 30, all_nodes(30));
  const auto rep = analyze(Matrix::Identity(30, 30), op, inst.sigma, 0.0, 1);
  const auto check = spectral_bound_check(Matrix::Identity(30, 30), rep, *rep.reconstruction_loss, 1);
  CHECK(check.holds);
  CHECK(std::abs(check.lhs) <= 1e-10);
  CHECK(std::abs(check.rhs) <= 1e-10);

  const Instance b = bandlimited(40, 4, 7);
  const Matrix g = matrix_power(normalized_adjacency(b.graph, 1.0), 2);
  const auto op2 = ls_operator(b.basis, 4, random_sample(40, 3, 2));
  const auto rep2 = analyze(g, op2, b.sigma, 1e-3, 2);
  const auto c2 = spectral_bound_check(g, rep2, *rep2.reconstruction_loss, 2);
  CHECK(c2.holds);
  CHECK(c2.rhs <= *rep2.reconstruction_loss * (1.0 + 1e-10));
}

TEST_CASE("Monte-Carlo estimator") {
  const Instance inst = bandlimited(40, 4, 2);
  const Matrix g = normalized_adjacency(inst.graph, 1.0);
  const ClassifierModel m = explicit_model(g, Vector::Ones(3));

  SUBCASE("perfect reconstruction has no mismatches") {
    Eigen::ColPivHouseholderQR<Matrix> qr(inst.basis.low_band(4).transpose());
    std::vector<Index> rows;
    for (Index j = 0; j < 4; ++j) rows.push_back(qr.colsPermutation().indices()(j));
    const auto op = ls_operator(inst.basis, 4, SampleSet(rows, 40));
    const auto mc = monte_carlo_losses(m, inst.sigma, op, 0.0, 500, 3);
    CHECK(mc.classification.mean == 0.0);
  }
  SUBCASE("agrees with the analytic loss and is thread-independent") {
    const auto op = fp_operator(inst.lap, random_sample(40, 6, 1));
    const auto rep = analyze(g, op, inst.sigma, 1e-3, 3);
    const auto mc = monte_carlo_losses(m, inst.sigma, op, 1e-3, 4000, 11);
    CHECK(std::abs(mc.classification.mean - rep.classification_loss) <=
          3.0 * mc.classification.standard_error);
    CHECK(std::abs(mc.reconstruction.mean - *rep.reconstruction_loss) <=
          3.0 * mc.reconstruction.standard_error);

    const auto mc4 = monte_carlo_losses(m, inst.sigma, op, 1e-3, 4000, 11, 4);
    CHECK(mc4.classification.mean == mc.classification.mean);
    CHECK(mc4.reconstruction.mean == mc.reconstruction.mean);
  }
  SUBCASE("standard error shrinks like 1 / sqrt(trials)") {
    const auto op = fp_operator(inst.lap, random_sample(40, 6, 1));
    const auto a = monte_carlo_losses(m, inst.sigma, op, 1e-3, 4000, 21);
    const auto b = monte_carlo_losses(m, inst.sigma, op, 1e-3, 8000, 22);
    const double ratio = a.classification.standard_error / b.classification.standard_error;
    CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
  }
  SUBCASE("rejects short runs") {
    const auto op = fp_operator(inst.lap, random_sample(40, 6, 1));
    CHECK_THROWS_AS(monte_carlo_losses(m, inst.sigma, op, 0.0, 99, 1), InvalidParameter);
  }
}

TEST_CASE("summary statistics") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = summarize(v);
  CHECK(e.mean == 2.5);
  CHECK(e.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.trials == 4);
}
