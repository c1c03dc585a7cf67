#include "tasksample/classifier.hpp"

#include "tasksample/linalg.hpp"
#include "tasksample/rng.hpp"

#include <cmath>

namespace tasksample {

ClassifierModel explicit_model(Matrix g, Vector w) {
  if (g.rows() != g.cols()) throw DimensionMismatch("G must be square");
  if (!g.allFinite()) throw InvalidInput("G has non-finite entries");
  if (w.size() == 0 || w.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidParameter("classifier weight vector w must be nonzero");
  return ClassifierModel{std::move(g), std::move(w), ExplicitConstruction{}};
}

Matrix glorot_uniform(const LayerShape& shape, std::uint64_t seed) {
  if (shape.rows < 1 || shape.cols < 1)
    throw InvalidParameter("layer shape must be positive");
  const double limit =
      std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(shape.rows, shape.cols);
  for (Index j = 0; j < w.cols(); ++j)
    for (Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
  return w;
}

ClassifierModel build_sgc(const Matrix& adjacency_aug, int r,
                          std::span<const LayerShape> widths, std::uint64_t seed) {
  if (r < 1) throw InvalidParameter("SGC needs at least one propagation step");
  if (widths.empty()) throw InvalidParameter("SGC needs at least one layer");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    if (widths[l].cols != widths[l + 1].rows)
      throw InvalidParameter("layer " + std::to_string(l) + " outputs " +
                             std::to_string(widths[l].cols) + " but layer " +
                             std::to_string(l + 1) + " expects " +
                             std::to_string(widths[l + 1].rows));
  if (widths.back().cols != 1)
    throw InvalidParameter("final SGC layer must have a single output");

  Matrix product = glorot_uniform(widths[0], derive_seed(seed, 0));
  for (std::size_t l = 1; l < widths.size(); ++l)
    product = product * glorot_uniform(widths[l], derive_seed(seed, l));

  ClassifierModel model;
  model.g = matrix_power(adjacency_aug, r);
  model.w = product.col(0);
  model.construction =
      SgcConstruction{r, std::vector<LayerShape>(widths.begin(), widths.end()), seed};
  if (model.w.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidParameter("collapsed SGC weights are zero");
  return model;
}

Matrix polynomial_filter(const Matrix& adjacency_aug,
                         std::span<const double> coefficients) {
  if (coefficients.empty())
    throw InvalidParameter("polynomial filter needs at least one coefficient");
  const Index n = adjacency_aug.rows();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix g = coefficients.back() * eye;
  for (std::size_t j = coefficients.size() - 1; j-- > 0;)
    g = g * adjacency_aug + coefficients[j] * eye;
  return g;
}

ClassifierModel build_polynomial(const Matrix& adjacency_aug,
                                 std::span<const double> coefficients, Vector w) {
  ClassifierModel model = explicit_model(polynomial_filter(adjacency_aug, coefficients),
                                         std::move(w));
  model.construction =
      PolynomialConstruction{{coefficients.begin(), coefficients.end()}};
  return model;
}

EffectiveCovariance effective_covariance(const Matrix& sigma, const Vector& w,
                                         bool columns_iid) {
  if (!columns_iid)
    throw UnsupportedModel(
        "effective covariance is only defined for independent feature columns");
  if (w.size() == 0 || w.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidParameter("w must be nonzero");
  return EffectiveCovariance{sigma};
}

Vector model_output(const ClassifierModel& model, const Matrix& x) {
  if (x.rows() != model.g.cols() || x.cols() != model.w.size())
    throw DimensionMismatch("features are " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + ", model expects " +
                            std::to_string(model.g.cols()) + "x" +
                            std::to_string(model.w.size()));
  return model.g * (x * model.w);
}

Eigen::VectorXi sign_labels(const Vector& values) {
  Eigen::VectorXi out(values.size());
  for (Index i = 0; i < values.size(); ++i) out(i) = values(i) < 0.0 ? -1 : 1;
  return out;
}

Eigen::VectorXi labels(const ClassifierModel& model, const FeatureMatrix& x) {
  return sign_labels(model_output(model, x.values));
}

}  // namespace tasksample
