#pragma once

#include "tasksample/classifier.hpp"
#include "tasksample/reconstruction.hpp"
#include "tasksample/signal.hpp"
#include "tasksample/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tasksample {

/// P(sign X != sign Y) for a zero-mean bivariate normal with correlation rho:
/// arccos(rho) / pi. Accepts |rho| <= 1 + 1e-9 (clamped), throws otherwise.
double sign_mismatch_probability(double rho);

// Standard deviations at or below this mark a node as degenerate; its
// mismatch probability is then fixed at 1/2.
inline constexpr double kDegenerateScale = 1e-12;

// Per-node second moments of clean and reconstructed outputs for a linear
// map M, and the resulting sign-mismatch probabilities:
//   c_i      = (M R_S C_{S,:} M^T)_ii
//   sigma_i^2 = (M C M^T)_ii
//   nu_i^2    = (M R_S (C_SS + eta^2 I) R_S^T M^T)_ii
struct NodeLossReport {
  Vector c;
  Vector sigma;
  Vector nu;
  Vector rho;
  Vector p_misclass;
  double classification_loss = 0.0;
  std::optional<double> reconstruction_loss;
  Index clamp_events = 0;
  Index degenerate_nodes = 0;

  Index nodes() const noexcept { return c.size(); }
};

// Factored inputs so callers that sweep many sample sets can precompute the
// S-independent pieces. `response` is M R_S (n x s), `cross` is (M C)_{:,S}
// (n x s), `sampled_cov` is C_SS and `sigma2` the diagonal of M C M^T.
/// Per-node statistics from the moments diag(M C M^T), c and nu^2.
NodeLossReport node_statistics_from_moments(const Vector& sigma2, Vector c,
                                            const Vector& nu2);

NodeLossReport node_statistics_from_factors(const Vector& sigma2,
                                            const Matrix& response,
                                            const Matrix& cross,
                                            const Matrix& sampled_cov,
                                            double eta2);

NodeLossReport node_statistics(const Matrix& g, const ReconstructionOperator& op,
                               const EffectiveCovariance& c, double eta2);

/// Sum of per-node mismatch probabilities.
double classification_loss(const NodeLossReport& report);

/// Expected squared Frobenius reconstruction error for d i.i.d. columns:
/// d * sum_i (sigma_i(I)^2 + nu_i(I)^2 - 2 c_i(I)).
double reconstruction_loss(const ReconstructionOperator& op, const Matrix& sigma,
                           double eta2, Index d);

/// Node statistics under G plus the reconstruction loss, in one report.
NodeLossReport analyze(const Matrix& g, const ReconstructionOperator& op,
                       const Matrix& sigma, double eta2, Index d);

struct OutputErrorRecord {
  double error_out = 0.0;           // d (sigma^2 + nu^2 - 2c)
  double triangle_residual = 0.0;   // law-of-cosines mismatch, angle pi * p
};

std::vector<OutputErrorRecord> output_error_and_triangle(const NodeLossReport& report,
                                                         Index d);

struct SpectralBoundCheck {
  double lhs = 0.0;  // sum of output errors
  double rhs = 0.0;  // ||G||^2 * reconstruction loss
  bool holds = false;
};

// Tolerance is 1e-8 relative to rhs plus a round-off floor of
// 1e-12 * d * sum_i sigma_i^2 for instances where both sides vanish.
SpectralBoundCheck spectral_bound_check(const Matrix& g, const NodeLossReport& report,
                                        double rec_loss, Index d);

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  Index trials = 0;
};

/// Mean and standard error (sample sd / sqrt(n)) of per-trial values.
McEstimate summarize(std::span<const double> values);

struct McLosses {
  McEstimate classification;
  McEstimate reconstruction;
};

inline constexpr Index kMinMonteCarloTrials = 100;

// Paired Monte-Carlo estimate: each trial draws X and the observation noise,
// reconstructs, and records the label-mismatch count between sign(f(X)) and
// sign(f(X_hat)) and the squared Frobenius error. Trial t uses seeds derived
// from (seed, t), so results do not depend on `threads`.
McLosses monte_carlo_losses(const ClassifierModel& model, const GaussianSource& source,
                            const ReconstructionOperator& op, double eta2,
                            Index trials, std::uint64_t seed, int threads = 1);

McLosses monte_carlo_losses(const ClassifierModel& model, const Matrix& sigma,
                            const ReconstructionOperator& op, double eta2,
                            Index trials, std::uint64_t seed, int threads = 1);

}  // namespace tasksample
