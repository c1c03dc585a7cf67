#pragma once

#include "tasksample/graph.hpp"
#include "tasksample/types.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tasksample {

/// Ordered set of distinct node ids over an ambient graph of n nodes.
/// Selection order is preserved; greedy traces rely on it.
class SampleSet {
 public:
  SampleSet(std::vector<Index> indices, Index ambient_size);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  Index ambient_size() const noexcept { return ambient_; }
  bool contains(Index v) const noexcept { return mask_[v] != 0; }

  /// Unsampled nodes in increasing order.
  std::vector<Index> complement() const;
  SampleSet with(Index v) const;
  SampleSet prefix(Index count) const;

 private:
  std::vector<Index> indices_;
  std::vector<char> mask_;
  Index ambient_;
};

enum class MethodKind { LeastSquares, FeaturePropagation };

std::string to_string(MethodKind kind);

inline constexpr double kDefaultRcond = 1e-12;
inline constexpr double kConditionWarning = 1e12;

struct LeastSquaresMethod {
  Matrix low_band;  // U_{:,0..k-1}
  double rcond = kDefaultRcond;
};

struct FeaturePropagationMethod {
  Matrix laplacian;
};

using ReconstructionMethod =
    std::variant<LeastSquaresMethod, FeaturePropagationMethod>;

MethodKind method_kind(const ReconstructionMethod& method);

struct ReconstructionOperator {
  MethodKind method = MethodKind::LeastSquares;
  Index bandwidth = 0;    // LS only
  Matrix matrix;          // n x |S|
  SampleSet sample_set;

  // LS: rank of U_{S,K}; rank_deficient when it is below k.
  Index rank = 0;
  bool rank_deficient = false;
  // FP: estimated condition number of the grounded Laplacian.
  double condition_estimate = 1.0;
  bool ill_conditioned = false;
};

/// R_S = U_{:,K} pinv(U_{S,K}).
ReconstructionOperator ls_operator(const SpectralBasis& basis, Index k,
                                   const SampleSet& s,
                                   double rcond = kDefaultRcond);
ReconstructionOperator ls_operator(const LeastSquaresMethod& method,
                                   const SampleSet& s);

// Feature propagation as a harmonic extension: sampled rows are the identity
// and unsampled rows solve L_{Sc,Sc} x_Sc = -L_{Sc,S} x_S.
ReconstructionOperator fp_operator(const Matrix& laplacian, const SampleSet& s);

ReconstructionOperator build_operator(const ReconstructionMethod& method,
                                      const SampleSet& s);

/// R_S * observations.
Matrix reconstruct(const ReconstructionOperator& op, const Matrix& observations);

}  // namespace tasksample
