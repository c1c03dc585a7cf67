#include "tasksample/losses.hpp"

#include "tasksample/linalg.hpp"
#include "tasksample/parallel.hpp"
#include "tasksample/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tasksample {

double sign_mismatch_probability(double rho) {
  if (!(std::abs(rho) <= 1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "correlation " << rho << " outside [-1, 1]";
    throw InvalidInput(msg.str());
  }
  return std::acos(std::clamp(rho, -1.0, 1.0)) / std::numbers::pi;
}

NodeLossReport node_statistics_from_moments(const Vector& sigma2, Vector c,
                                            const Vector& nu2) {
  const Index n = sigma2.size();
  if (c.size() != n || nu2.size() != n)
    throw DimensionMismatch("node moments have inconsistent lengths");
  NodeLossReport r;
  r.c = std::move(c);
  r.sigma = sigma2.cwiseMax(0.0).cwiseSqrt();
  r.nu = nu2.cwiseMax(0.0).cwiseSqrt();
  r.rho.resize(n);
  r.p_misclass.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (r.sigma(i) <= kDegenerateScale || r.nu(i) <= kDegenerateScale) {
      r.rho(i) = 0.0;
      r.p_misclass(i) = 0.5;
      ++r.degenerate_nodes;
      continue;
    }
    double rho = r.c(i) / (r.sigma(i) * r.nu(i));
    if (rho > 1.0 || rho < -1.0) {
      ++r.clamp_events;
      rho = std::clamp(rho, -1.0, 1.0);
    }
    r.rho(i) = rho;
    r.p_misclass(i) = std::acos(rho) / std::numbers::pi;
  }
  r.classification_loss = r.p_misclass.sum();
  return r;
}

NodeLossReport node_statistics_from_factors(const Vector& sigma2,
                                            const Matrix& response,
                                            const Matrix& cross,
                                            const Matrix& sampled_cov,
                                            double eta2) {
  const Index n = sigma2.size();
  const Index s = response.cols();
  if (response.rows() != n || cross.rows() != n || cross.cols() != s ||
      sampled_cov.rows() != s || sampled_cov.cols() != s)
    throw DimensionMismatch("node statistics factors have inconsistent shapes");
  if (eta2 < 0.0) throw InvalidParameter("noise variance must be >= 0");

  Matrix observed_cov = sampled_cov;
  observed_cov.diagonal().array() += eta2;
  const Vector nu2 = (response * observed_cov).cwiseProduct(response).rowwise().sum();
  return node_statistics_from_moments(sigma2, response.cwiseProduct(cross).rowwise().sum(),
                                      nu2);
}

namespace {

struct Factors {
  Vector sigma2;
  Matrix response;
  Matrix cross;
  Matrix sampled_cov;
};

Factors factors_for(const Matrix& m, const ReconstructionOperator& op,
                    const Matrix& c) {
  const Index n = c.rows();
  if (m.rows() != n || m.cols() != n || op.matrix.rows() != n)
    throw DimensionMismatch("G, R_S and C must share the node count");
  const auto& s = op.sample_set.indices();
  const Matrix mc = m * c;
  return Factors{
      .sigma2 = mc.cwiseProduct(m).rowwise().sum(),
      .response = m * op.matrix,
      .cross = select_cols(mc, s),
      .sampled_cov = select_block(c, s, s),
  };
}

}  // namespace

NodeLossReport node_statistics(const Matrix& g, const ReconstructionOperator& op,
                               const EffectiveCovariance& c, double eta2) {
  const auto f = factors_for(g, op, c.c);
  return node_statistics_from_factors(f.sigma2, f.response, f.cross, f.sampled_cov,
                                      eta2);
}

double classification_loss(const NodeLossReport& report) {
  return report.p_misclass.sum();
}

double reconstruction_loss(const ReconstructionOperator& op, const Matrix& sigma,
                           double eta2, Index d) {
  if (d < 1) throw InvalidParameter("feature dimension must be >= 1");
  if (op.matrix.rows() != sigma.rows())
    throw DimensionMismatch("operator and covariance disagree on node count");
  if (eta2 < 0.0) throw InvalidParameter("noise variance must be >= 0");
  const auto& s = op.sample_set.indices();
  const Matrix& r = op.matrix;
  Matrix observed_cov = select_block(sigma, s, s);
  observed_cov.diagonal().array() += eta2;
  const double signal = sigma.trace();
  const double rebuilt = (r * observed_cov).cwiseProduct(r).sum();
  const double cross = r.cwiseProduct(select_cols(sigma, s)).sum();
  // A second moment; round-off can push it a few ulps below zero.
  return std::max(0.0, static_cast<double>(d) * (signal + rebuilt - 2.0 * cross));
}

NodeLossReport analyze(const Matrix& g, const ReconstructionOperator& op,
                       const Matrix& sigma, double eta2, Index d) {
  NodeLossReport report = node_statistics(g, op, EffectiveCovariance{sigma}, eta2);
  report.reconstruction_loss = reconstruction_loss(op, sigma, eta2, d);
  return report;
}

std::vector<OutputErrorRecord> output_error_and_triangle(const NodeLossReport& report,
                                                         Index d) {
  std::vector<OutputErrorRecord> out(report.nodes());
  const double dd = static_cast<double>(d);
  for (Index i = 0; i < report.nodes(); ++i) {
    const double s = report.sigma(i);
    const double v = report.nu(i);
    const double per_column = s * s + v * v - 2.0 * report.c(i);
    const double cosine_side =
        s * s + v * v - 2.0 * s * v * std::cos(std::numbers::pi * report.p_misclass(i));
    out[i].error_out = dd * per_column;
    out[i].triangle_residual = std::abs(per_column - cosine_side);
  }
  return out;
}

SpectralBoundCheck spectral_bound_check(const Matrix& g, const NodeLossReport& report,
                                        double rec_loss, Index d) {
  SpectralBoundCheck check;
  for (const auto& rec : output_error_and_triangle(report, d)) check.lhs += rec.error_out;
  const double norm = spectral_norm(g);
  check.rhs = norm * norm * rec_loss;
  const double floor =
      1e-12 * static_cast<double>(d) * report.sigma.squaredNorm();
  check.holds = check.lhs <= check.rhs + 1e-8 * std::abs(check.rhs) + floor;
  return check;
}

McEstimate summarize(std::span<const double> values) {
  McEstimate est;
  est.trials = static_cast<Index>(values.size());
  if (values.empty()) return est;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    est.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

McLosses monte_carlo_losses(const ClassifierModel& model, const GaussianSource& source,
                            const ReconstructionOperator& op, double eta2,
                            Index trials, std::uint64_t seed, int threads) {
  if (trials < kMinMonteCarloTrials)
    throw InvalidParameter("Monte-Carlo needs at least " +
                           std::to_string(kMinMonteCarloTrials) + " trials");
  const Index n = model.nodes();
  if (source.nodes() != n || op.matrix.rows() != n)
    throw DimensionMismatch("model, covariance and operator disagree on node count");
  const Index d = model.feature_dim();
  const Matrix output_response = model.g * op.matrix;
  const NoiseSpec noise{eta2};

  std::vector<double> mismatches(trials), errors(trials);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(seed, t);
    const FeatureMatrix x = source.sample(d, derive_seed(trial_seed, 0));
    const Matrix y = observe(x, op.sample_set, noise, derive_seed(trial_seed, 1));
    const Matrix x_hat = op.matrix * y;

    const Vector clean = model.g * (x.values * model.w);
    const Vector rebuilt = output_response * (y * model.w);
    double count = 0.0;
    for (Index i = 0; i < n; ++i)
      if ((clean(i) < 0.0) != (rebuilt(i) < 0.0)) count += 1.0;
    mismatches[t] = count;
    errors[t] = (x.values - x_hat).squaredNorm();
  });
  return McLosses{summarize(mismatches), summarize(errors)};
}

McLosses monte_carlo_losses(const ClassifierModel& model, const Matrix& sigma,
                            const ReconstructionOperator& op, double eta2,
                            Index trials, std::uint64_t seed, int threads) {
  return monte_carlo_losses(model, GaussianSource(sigma), op, eta2, trials, seed,
                            threads);
}

}  // namespace tasksample
