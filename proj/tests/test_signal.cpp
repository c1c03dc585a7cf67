#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tasksample/linalg.hpp"
#include "tasksample/reconstruction.hpp"
#include "tasksample/signal.hpp"

#include <cmath>

using namespace tasksample;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("bandlimiting projector") {
  const SpectralBasis basis = eigendecompose(laplacian(generate_ba(60, 3, 1)));
  const Index n = basis.size();
  CHECK(max_abs(bandlimiting_projector(basis, n) - Matrix::Identity(n, n)) <= 1e-10);

  for (Index k : {1, 6, 17, 59}) {
    const Matrix p = bandlimiting_projector(basis, k);
    CHECK(max_abs(p * p - p) <= 1e-8);
    CHECK(asymmetry(p) <= 1e-12);
    CHECK(p.trace() == doctest::Approx(static_cast<double>(k)).epsilon(1e-10));
    const SpectralBasis spec = eigendecompose((p + p.transpose()) / 2.0);
    for (Index i = 0; i < n; ++i) {
      const double ev = spec.eigenvalues(i);
      CHECK(std::min(std::abs(ev), std::abs(ev - 1.0)) <= 1e-7);
    }
  }
  CHECK_THROWS_AS(bandlimiting_projector(basis, 0), InvalidParameter);
  CHECK_THROWS_AS(bandlimiting_projector(basis, n + 1), InvalidParameter);
}

TEST_CASE("path graph k = 1 projector is the normalized sqrt-degree outer product") {
  const Graph p3 = testutil::path_graph(3);
  const Matrix p = bandlimiting_projector(eigendecompose(laplacian(p3)), 1);
  Vector v = p3.degrees().cwiseSqrt();
  v.normalize();
  CHECK(max_abs(p - v * v.transpose()) <= 1e-12);
  CHECK(p.trace() == doctest::Approx(1.0));
  Eigen::JacobiSVD<Matrix> svd(p);
  CHECK(svd.singularValues()(1) <= 1e-12);
}

TEST_CASE("covariance realization") {
  const Graph g = generate_sbm({40, 2, 0.6, 0.1}, 4);
  const Matrix lap = laplacian(g);
  const SpectralBasis basis = eigendecompose(lap);

  CHECK(realize_covariance({Bandlimited{5}}, basis) == bandlimiting_projector(basis, 5));

  const Matrix pinv = realize_covariance({LaplacianPseudoinverse{}}, basis);
  CHECK(max_abs(pinv * lap * pinv - pinv) <= 1e-8);
  CHECK(max_abs(lap * pinv * lap - lap) <= 1e-8);
  validate_covariance(pinv);

  Matrix asym = Matrix::Identity(40, 40);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(realize_covariance({ExplicitCovariance{asym}}, basis), InvalidInput);
  Matrix neg = Matrix::Identity(3, 3);
  neg(2, 2) = -0.1;
  CHECK_THROWS_AS(validate_covariance(neg), InvalidInput);
  CHECK_THROWS_AS(validate_covariance(Matrix::Zero(2, 3)), InvalidInput);
}

TEST_CASE("feature sampling") {
  CHECK(sample_features(Matrix::Zero(6, 6), 4, 3).values.isZero(0.0));

  const SpectralBasis basis = eigendecompose(laplacian(generate_ba(200, 3, 2)));
  const Index n = basis.size();
  const Matrix p = bandlimiting_projector(basis, 20);
  const GaussianSource source(p);
  CHECK(source.factor().cols() == 20);

  const FeatureMatrix x = source.sample(7, 99);
  CHECK(x.nodes() == n);
  CHECK(x.dim() == 7);
  const Matrix outside = (Matrix::Identity(n, n) - p) * x.values;
  CHECK(outside.norm() <= 1e-8 * x.values.norm());

  CHECK(source.sample(7, 99).values == x.values);
  CHECK(source.sample(7, 100).values != x.values);

  // Empirical covariance of 5000 columns against sigma, entrywise 5 / sqrt(d).
  const Index d = 5000;
  const FeatureMatrix big = source.sample(d, 12);
  const Matrix emp = big.values * big.values.transpose() / static_cast<double>(d);
  CHECK(max_abs(emp - p) <= 5.0 / std::sqrt(static_cast<double>(d)));
}

TEST_CASE("observation") {
  const SpectralBasis basis = eigendecompose(laplacian(generate_ba(200, 3, 5)));
  const Matrix p = bandlimiting_projector(basis, 20);
  const FeatureMatrix x = sample_features(p, 64, 4);
  const SampleSet s({5, 1, 100}, 200);

  const Matrix exact = observe(x, s, {0.0}, 1);
  CHECK(exact.rows() == 3);
  CHECK(exact.row(0) == x.values.row(5));
  CHECK(exact.row(1) == x.values.row(1));
  CHECK(exact.row(2) == x.values.row(100));

  CHECK(observe(x, s, {1e-3}, 8) == observe(x, s, {1e-3}, 8));
  CHECK_THROWS_AS(observe(x, SampleSet({}, 200), {0.0}, 1), InvalidParameter);
  CHECK_THROWS_AS(observe(x, SampleSet({1}, 150), {0.0}, 1), DimensionMismatch);

  // k = N/10 gives mean per-node variance 0.1; eta2 = 1e-3 is then 20 dB.
  std::vector<Index> all(200);
  for (Index i = 0; i < 200; ++i) all[i] = i;
  const SampleSet full(all, 200);
  const FeatureMatrix wide = sample_features(p, 2000, 6);
  const double snr = empirical_snr_db(wide.values, observe(wide, full, {1e-3}, 7));
  CHECK(snr == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("standard normal fill") {
  const Matrix z = standard_normal(300, 300, 42);
  CHECK(std::abs(z.mean()) <= 5.0 / 300.0);
  CHECK((z.array() * z.array()).mean() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(standard_normal(300, 300, 42) == z);
}

TEST_CASE("signal files round trip") {
  testutil::TempDir dir;
  Matrix x(3, 2);
  x << 0.1, -2.0, 1.0 / 3.0, 4e-17, 5.0, 6.0;
  const auto path = dir.path() / "s.csv";
  write_signals(path, x);
  CHECK(load_signals(path) == x);

  const Matrix one = load_signals(dir.write("one.csv", "node,sig_0\n1,2.0\n0,-1\n"));
  CHECK(one.cols() == 1);
  CHECK(one(0, 0) == -1.0);
  CHECK(one(1, 0) == 2.0);

  CHECK_THROWS_AS(load_signals(dir.write("gap.csv", "node,a\n0,1\n2,1\n")), ParseError);
  CHECK_THROWS_AS(load_signals(dir.write("ragged.csv", "node,a,b\n0,1\n1,1,2\n")), ParseError);
  CHECK_THROWS_AS(load_signals(dir.path() / "missing.csv"), ParseError);
}
