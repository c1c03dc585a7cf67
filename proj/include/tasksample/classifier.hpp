#pragma once

#include "tasksample/signal.hpp"
#include "tasksample/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tasksample {

struct LayerShape {
  Index rows = 0;  // fan-in
  Index cols = 0;  // fan-out

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

struct SgcConstruction {
  int layers = 1;
  std::vector<LayerShape> widths;
  std::uint64_t seed = 0;
};
struct PolynomialConstruction {
  std::vector<double> coefficients;
};
struct ExplicitConstruction {};

// Label-generating function f(X) = G X w of a linear graph model. Only the
// collapsed pair (G, w) is kept.
struct ClassifierModel {
  Matrix g;
  Vector w;
  std::variant<SgcConstruction, PolynomialConstruction, ExplicitConstruction>
      construction;

  Index nodes() const noexcept { return g.rows(); }
  Index feature_dim() const noexcept { return w.size(); }
};

/// Validates (G, w): G square and finite, w nonzero.
ClassifierModel explicit_model(Matrix g, Vector w);

/// Uniform on +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(const LayerShape& shape, std::uint64_t seed);

// Linearized GCN: G = adjacency_aug^r and w the product of Glorot-initialized
// layer weights, which must chain (widths[l].cols == widths[l+1].rows) and end
// in a single output.
ClassifierModel build_sgc(const Matrix& adjacency_aug, int r,
                          std::span<const LayerShape> widths, std::uint64_t seed);

/// sum_j coefficients[j] * adjacency_aug^j, Horner order.
Matrix polynomial_filter(const Matrix& adjacency_aug,
                         std::span<const double> coefficients);

ClassifierModel build_polynomial(const Matrix& adjacency_aug,
                                 std::span<const double> coefficients, Vector w);

struct EffectiveCovariance {
  Matrix c;
};

/// C = Cov(Xw) / ||w||^2. Only the independent-columns model is supported,
/// for which C equals sigma regardless of w.
EffectiveCovariance effective_covariance(const Matrix& sigma, const Vector& w,
                                         bool columns_iid);

/// f(X) = G X w.
Vector model_output(const ClassifierModel& model, const Matrix& x);

/// Elementwise sign with sign(0) = +1.
Eigen::VectorXi sign_labels(const Vector& values);

Eigen::VectorXi labels(const ClassifierModel& model, const FeatureMatrix& x);

}  // namespace tasksample
