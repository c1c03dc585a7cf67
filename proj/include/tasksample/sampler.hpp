#pragma once

#include "tasksample/losses.hpp"
#include "tasksample/reconstruction.hpp"
#include "tasksample/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tasksample {

/// Uniform draw of `size` distinct nodes out of n.
SampleSet random_sample(Index n, Index size, std::uint64_t seed);

enum class ObjectiveKind { Classification, Reconstruction };

std::string to_string(ObjectiveKind kind);

// Loss of a candidate sample set: the analytic classification loss under the
// output filter G, or the analytic reconstruction loss (filter = identity).
// Everything that does not depend on S (G C, diag(G C G^T), G U_K) is
// precomputed at construction; the object is immutable afterwards and safe to
// share across threads.
class SamplingObjective {
 public:
  static SamplingObjective classification(const Matrix& g, const Matrix& covariance,
                                          ReconstructionMethod method, double eta2);
  static SamplingObjective reconstruction(const Matrix& covariance,
                                          ReconstructionMethod method, double eta2,
                                          Index feature_dim = 1);

  double evaluate(const SampleSet& s) const;
  /// Same loss with R_S taken from a prebuilt operator of this method.
  double evaluate(const ReconstructionOperator& op) const;

  // Everything the one-node extensions S + {v} of a fixed S have in common.
  // Each extension is a rank-one update of R_S, so scoring one costs
  // O(n |S|) instead of a fresh operator build. When S is rank deficient or
  // a solve is singular, scoring falls back to evaluate(S + {v}).
  struct Extensions;
  std::shared_ptr<const Extensions> extensions(const SampleSet& base) const;

  /// Loss of base + {v}; equal to evaluate(base.with(v)) up to round-off.
  double evaluate_extension(const Extensions& ext, Index v) const;

  /// Node statistics under this objective's filter (G or I).
  NodeLossReport report(const SampleSet& s) const;

  ObjectiveKind kind() const noexcept { return kind_; }
  Index nodes() const noexcept { return covariance_.rows(); }
  double eta2() const noexcept { return eta2_; }
  const ReconstructionMethod& method() const noexcept { return method_; }

 private:
  SamplingObjective(ObjectiveKind kind, const Matrix* filter, const Matrix& covariance,
                    ReconstructionMethod method, double eta2, Index feature_dim);

  struct Factors {
    Matrix response;
    Matrix cross;
    Matrix sampled_cov;
  };
  Factors factors(const SampleSet& s) const;
  Factors factors(const ReconstructionOperator& op) const;
  double loss(const Factors& f) const;

  ObjectiveKind kind_;
  bool identity_filter_;
  Matrix filter_;
  Matrix covariance_;
  ReconstructionMethod method_;
  double eta2_;
  Index feature_dim_;
  Vector sigma2_;
  Matrix filtered_cov_;
  Matrix filtered_low_band_;
};

class CandidateEvaluationError : public Error {
 public:
  CandidateEvaluationError(const std::string& what, Index candidate)
      : Error(what), candidate_(candidate) {}
  Index candidate() const noexcept { return candidate_; }

 private:
  Index candidate_;
};

struct GreedyTrace {
  SampleSet chosen;
  std::vector<double> objective_values;  // loss after each addition
  std::vector<Index> evaluations;        // candidates scored per step
};

// Forward greedy selection from the empty set: each step scores S + {v} for
// every v not in S with evaluate_extension and keeps the minimizer, lowest
// index on exact ties.
// Candidate scoring may use `threads` workers; the reduction is index-ordered
// so the trace is identical to a serial run.
GreedyTrace greedy_sample(const SamplingObjective& objective, Index target_size,
                          int threads = 1);

inline constexpr double kExhaustiveBudget = 1e6;

struct ExhaustiveResult {
  SampleSet best;
  double loss = 0.0;
  Index evaluations = 0;
};

/// Global minimizer over all subsets of `size` nodes, lexicographically first
/// on ties. Throws BudgetExceeded when C(n, size) > kExhaustiveBudget.
ExhaustiveResult exhaustive_sample(const SamplingObjective& objective, Index size);

/// C(n, k) in floating point.
double binomial(Index n, Index k);

}  // namespace tasksample
