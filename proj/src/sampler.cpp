#include "tasksample/sampler.hpp"

#include "tasksample/linalg.hpp"
#include "tasksample/parallel.hpp"
#include "tasksample/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tasksample {

SampleSet random_sample(Index n, Index size, std::uint64_t seed) {
  if (size < 1 || size > n)
    throw InvalidParameter("random sample size " + std::to_string(size) +
                           " outside [1, " + std::to_string(n) + "]");
  std::vector<Index> nodes(n);
  std::iota(nodes.begin(), nodes.end(), Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first `size` slots are a uniform ordered draw.
  for (Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(nodes[i], nodes[pick(rng)]);
  }
  nodes.resize(size);
  return SampleSet(std::move(nodes), n);
}

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::Classification ? "classification" : "reconstruction";
}

SamplingObjective::SamplingObjective(ObjectiveKind kind, const Matrix* filter,
                                     const Matrix& covariance,
                                     ReconstructionMethod method, double eta2,
                                     Index feature_dim)
    : kind_(kind), identity_filter_(filter == nullptr), covariance_(covariance),
      method_(std::move(method)), eta2_(eta2), feature_dim_(feature_dim) {
  const Index n = covariance_.rows();
  if (covariance_.cols() != n) throw DimensionMismatch("covariance must be square");
  if (eta2 < 0.0) throw InvalidParameter("noise variance must be >= 0");
  if (feature_dim < 1) throw InvalidParameter("feature dimension must be >= 1");
  if (const auto* ls = std::get_if<LeastSquaresMethod>(&method_)) {
    if (ls->low_band.rows() != n)
      throw DimensionMismatch("LS basis and covariance disagree on node count");
  } else if (std::get<FeaturePropagationMethod>(method_).laplacian.rows() != n) {
    throw DimensionMismatch("Laplacian and covariance disagree on node count");
  }

  if (identity_filter_) {
    filtered_cov_ = covariance_;
    sigma2_ = covariance_.diagonal();
  } else {
    if (filter->rows() != n || filter->cols() != n)
      throw DimensionMismatch("output filter and covariance disagree on node count");
    filter_ = *filter;
    filtered_cov_ = filter_ * covariance_;
    sigma2_ = filtered_cov_.cwiseProduct(filter_).rowwise().sum();
  }
  if (const auto* ls = std::get_if<LeastSquaresMethod>(&method_))
    filtered_low_band_ = identity_filter_ ? ls->low_band : filter_ * ls->low_band;
}

SamplingObjective SamplingObjective::classification(const Matrix& g,
                                                    const Matrix& covariance,
                                                    ReconstructionMethod method,
                                                    double eta2) {
  return SamplingObjective(ObjectiveKind::Classification, &g, covariance,
                           std::move(method), eta2, 1);
}

SamplingObjective SamplingObjective::reconstruction(const Matrix& covariance,
                                                    ReconstructionMethod method,
                                                    double eta2, Index feature_dim) {
  return SamplingObjective(ObjectiveKind::Reconstruction, nullptr, covariance,
                           std::move(method), eta2, feature_dim);
}

SamplingObjective::Factors SamplingObjective::factors(const SampleSet& s) const {
  if (s.ambient_size() != nodes())
    throw DimensionMismatch("sample set is over the wrong node count");
  if (s.empty()) throw InvalidParameter("objective needs a nonempty sample set");
  const auto& idx = s.indices();
  Factors f;
  if (const auto* ls = std::get_if<LeastSquaresMethod>(&method_)) {
    const auto pinv = pseudo_inverse(select_rows(ls->low_band, idx), ls->rcond);
    f.response = filtered_low_band_ * pinv.matrix;
  } else {
    const auto op = fp_operator(std::get<FeaturePropagationMethod>(method_).laplacian, s);
    f.response = identity_filter_ ? op.matrix : Matrix(filter_ * op.matrix);
  }
  f.cross = select_cols(filtered_cov_, idx);
  f.sampled_cov = select_block(covariance_, idx, idx);
  return f;
}

NodeLossReport SamplingObjective::report(const SampleSet& s) const {
  const auto f = factors(s);
  return node_statistics_from_factors(sigma2_, f.response, f.cross, f.sampled_cov,
                                      eta2_);
}

SamplingObjective::Factors SamplingObjective::factors(
    const ReconstructionOperator& op) const {
  const auto& s = op.sample_set;
  if (s.ambient_size() != nodes() || op.matrix.rows() != nodes() ||
      op.matrix.cols() != s.size())
    throw DimensionMismatch("operator is over the wrong node count");
  if (s.empty()) throw InvalidParameter("objective needs a nonempty sample set");
  const auto& idx = s.indices();
  Factors f;
  f.response = identity_filter_ ? op.matrix : Matrix(filter_ * op.matrix);
  f.cross = select_cols(filtered_cov_, idx);
  f.sampled_cov = select_block(covariance_, idx, idx);
  return f;
}

double SamplingObjective::loss(const Factors& f) const {
  if (kind_ == ObjectiveKind::Classification)
    return node_statistics_from_factors(sigma2_, f.response, f.cross, f.sampled_cov,
                                        eta2_)
        .classification_loss;

  Matrix observed_cov = f.sampled_cov;
  observed_cov.diagonal().array() += eta2_;
  const double rebuilt = (f.response * observed_cov).cwiseProduct(f.response).sum();
  const double cross = f.response.cwiseProduct(f.cross).sum();
  return std::max(0.0, static_cast<double>(feature_dim_) * (sigma2_.sum() + rebuilt - 2.0 * cross));
}

double SamplingObjective::evaluate(const SampleSet& s) const { return loss(factors(s)); }

double SamplingObjective::evaluate(const ReconstructionOperator& op) const {
  return loss(factors(op));
}

struct SamplingObjective::Extensions {
  SampleSet base{{}, 0};
  bool direct = false;       // score every candidate with evaluate()
  Matrix response;           // M R_S
  Matrix response_cov;       // M R_S (C_SS + eta2 I)
  Matrix observed_cov;       // C_SS + eta2 I
  Matrix cross;              // (M C)_{:,S}
  Vector c;
  Vector nu2;
  // LS: rows U_S of the low band and the inverse of the nonsingular Gram
  // matrix, U_S U_S^T while |S| < k and U_S^T U_S afterwards.
  Matrix basis_rows;
  Matrix gram_inv;
  bool wide = true;
  // FP: R_S, plus M applied to the columns of the inverse grounded
  // Laplacian (embedded in n rows) and its diagonal. With an empty base the
  // single column is M z for the null vector z of L.
  Matrix rows;
  Matrix green;
  Vector pivot;
  std::vector<Index> slot;
};

namespace {

// Conditioning floor for the Gram and grounded solves of the update path.
constexpr double kExtensionRcond = 1e-10;

}  // namespace

std::shared_ptr<const SamplingObjective::Extensions> SamplingObjective::extensions(
    const SampleSet& base) const {
  const Index n = nodes();
  if (base.ambient_size() != n)
    throw DimensionMismatch("sample set is over the wrong node count");
  auto e = std::make_shared<Extensions>();
  e->base = base;
  const auto& idx = base.indices();
  const Index s = base.size();
  const Matrix& apply = filter_;

  if (const auto* ls = std::get_if<LeastSquaresMethod>(&method_)) {
    const Index k = ls->low_band.cols();
    e->basis_rows = select_rows(ls->low_band, idx);
    e->wide = s < k;
    Matrix pinv(k, s);
    if (s > 0) {
      const Matrix gram = e->wide ? Matrix(e->basis_rows * e->basis_rows.transpose())
                                  : Matrix(e->basis_rows.transpose() * e->basis_rows);
      Eigen::LLT<Matrix> llt(gram);
      if (llt.info() != Eigen::Success || !(llt.rcond() > kExtensionRcond)) {
        e->direct = true;
        return e;
      }
      e->gram_inv = llt.solve(Matrix::Identity(gram.rows(), gram.cols()));
      pinv = e->wide ? Matrix(e->basis_rows.transpose() * e->gram_inv)
                     : Matrix(e->gram_inv * e->basis_rows.transpose());
    }
    e->response = filtered_low_band_ * pinv;
  } else {
    const Matrix& lap = std::get<FeaturePropagationMethod>(method_).laplacian;
    e->slot.assign(n, -1);
    if (s == 0) {
      if (n < 2) {
        e->direct = true;
        return e;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
      const Vector& lambda = eig.eigenvalues();
      const double scale = std::max(1.0, std::abs(lambda(n - 1)));
      if (eig.info() != Eigen::Success || std::abs(lambda(0)) > 1e-9 * scale ||
          !(lambda(1) > 1e-6 * scale)) {
        e->direct = true;
        return e;
      }
      const Vector z = eig.eigenvectors().col(0);
      e->pivot = z;
      e->green = identity_filter_ ? Matrix(z) : Matrix(apply * z);
      e->rows = Matrix::Zero(n, 0);
    } else {
      const auto unsampled = base.complement();
      const Matrix grounded = select_block(lap, unsampled, unsampled);
      Eigen::LDLT<Matrix> ldlt(grounded);
      if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kExtensionRcond) ||
          !(ldlt.vectorD().minCoeff() > 0.0)) {
        e->direct = true;
        return e;
      }
      const Index u = static_cast<Index>(unsampled.size());
      const Matrix inv = ldlt.solve(Matrix::Identity(u, u));
      const Matrix harmonic = -inv * select_block(lap, unsampled, idx);
      e->rows = Matrix::Zero(n, s);
      for (Index j = 0; j < s; ++j) e->rows(idx[j], j) = 1.0;
      Matrix embedded = Matrix::Zero(n, u);
      for (Index i = 0; i < u; ++i) {
        e->rows.row(unsampled[i]) = harmonic.row(i);
        embedded.row(unsampled[i]) = inv.row(i);
        e->slot[unsampled[i]] = i;
      }
      e->pivot = inv.diagonal();
      e->green = identity_filter_ ? std::move(embedded)
                                  : Matrix(select_cols(apply, unsampled) * inv);
    }
    e->response = identity_filter_ ? e->rows : Matrix(apply * e->rows);
  }

  e->cross = select_cols(filtered_cov_, idx);
  e->observed_cov = select_block(covariance_, idx, idx);
  e->observed_cov.diagonal().array() += eta2_;
  e->response_cov = e->response * e->observed_cov;
  e->c = e->response.cwiseProduct(e->cross).rowwise().sum();
  e->nu2 = e->response_cov.cwiseProduct(e->response).rowwise().sum();
  return e;
}

double SamplingObjective::evaluate_extension(const Extensions& e, Index v) const {
  const Index n = nodes();
  if (v < 0 || v >= n || e.base.contains(v))
    throw InvalidParameter("extension candidate " + std::to_string(v) +
                           " is not outside the base set");
  if (e.direct) return evaluate(e.base.with(v));

  // R_{S+v} = [R_S - g r^T, g] with r the row of R_S at v and g the new
  // column; b = M g.
  Vector b;
  Vector r;
  if (const auto* ls = std::get_if<LeastSquaresMethod>(&method_)) {
    const Vector u = ls->low_band.row(v).transpose();
    const double uu = u.squaredNorm();
    if (e.wide) {
      r = e.base.empty() ? Vector(0) : Vector(e.gram_inv * (e.basis_rows * u));
      const Vector w = e.base.empty() ? u : Vector(u - e.basis_rows.transpose() * r);
      const double delta = w.squaredNorm();
      // The extended rows would be (nearly) dependent.
      if (!(delta > 1e-10 * uu)) return evaluate(e.base.with(v));
      b = filtered_low_band_ * (w / delta);
    } else {
      const Vector pu = e.gram_inv * u;
      const double gamma = 1.0 + u.dot(pu);
      r = e.basis_rows * pu;
      b = filtered_low_band_ * (pu / gamma);
    }
  } else if (e.base.empty()) {
    const double zv = e.pivot(v);
    if (!(std::abs(zv) > 1e-8 * e.pivot.cwiseAbs().maxCoeff()))
      return evaluate(e.base.with(v));
    r = Vector(0);
    b = e.green.col(0) / zv;
  } else {
    const Index col = e.slot[v];
    const double pivot = e.pivot(col);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) return evaluate(e.base.with(v));
    r = e.rows.row(v).transpose();
    b = e.green.col(col) / pivot;
  }

  const auto& idx = e.base.indices();
  const Index s = e.base.size();
  Vector q(s);
  for (Index j = 0; j < s; ++j) q(j) = covariance_(idx[j], v);
  const double t = covariance_(v, v) + eta2_;
  const double quad = r.dot(e.observed_cov * r) - 2.0 * r.dot(q) + t;

  Vector c = e.c + b.cwiseProduct(filtered_cov_.col(v) - e.cross * r);
  const Vector nu2 = e.nu2 + 2.0 * b.cwiseProduct(e.response * q - e.response_cov * r) +
                     quad * b.cwiseAbs2();
  if (kind_ == ObjectiveKind::Classification)
    return node_statistics_from_moments(sigma2_, std::move(c), nu2).classification_loss;
  return std::max(0.0, static_cast<double>(feature_dim_) *
                           (sigma2_.sum() + nu2.sum() - 2.0 * c.sum()));
}

GreedyTrace greedy_sample(const SamplingObjective& objective, Index target_size,
                          int threads) {
  const Index n = objective.nodes();
  if (target_size < 1 || target_size > n)
    throw InvalidParameter("greedy target size " + std::to_string(target_size) +
                           " outside [1, " + std::to_string(n) + "]");

  GreedyTrace trace{SampleSet({}, n), {}, {}};
  std::vector<double> scores;
  for (Index step = 0; step < target_size; ++step) {
    const auto candidates = trace.chosen.complement();
    const auto ext = objective.extensions(trace.chosen);
    scores.assign(candidates.size(), 0.0);
    parallel_for(candidates.size(), threads, [&](std::size_t c) {
      const Index v = candidates[c];
      try {
        scores[c] = objective.evaluate_extension(*ext, v);
      } catch (const std::exception& e) {
        throw CandidateEvaluationError("objective evaluation failed for candidate " +
                                           std::to_string(v) + ": " + e.what(),
                                       v);
      }
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
      if (scores[c] < scores[best]) best = c;
    trace.chosen = trace.chosen.with(candidates[best]);
    trace.objective_values.push_back(scores[best]);
    trace.evaluations.push_back(static_cast<Index>(candidates.size()));
  }
  return trace;
}

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (Index i = 1; i <= k; ++i)
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

ExhaustiveResult exhaustive_sample(const SamplingObjective& objective, Index size) {
  const Index n = objective.nodes();
  if (size < 1 || size > n)
    throw InvalidParameter("exhaustive size " + std::to_string(size) +
                           " outside [1, " + std::to_string(n) + "]");
  const double count = binomial(n, size);
  if (count > kExhaustiveBudget)
    throw BudgetExceeded("C(" + std::to_string(n) + ", " + std::to_string(size) +
                         ") subsets exceed the exhaustive budget");

  std::vector<Index> combo(size);
  std::iota(combo.begin(), combo.end(), Index{0});
  ExhaustiveResult result{SampleSet(combo, n), std::numeric_limits<double>::infinity(), 0};
  while (true) {
    SampleSet s(combo, n);
    const double loss = objective.evaluate(s);
    ++result.evaluations;
    if (loss < result.loss) {
      result.loss = loss;
      result.best = std::move(s);
    }
    // Next combination in lexicographic order.
    Index i = size - 1;
    while (i >= 0 && combo[i] == n - size + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (Index j = i + 1; j < size; ++j) combo[j] = combo[j - 1] + 1;
  }
  return result;
}

}  // namespace tasksample
