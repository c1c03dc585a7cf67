#include "tasksample/reconstruction.hpp"

#include "tasksample/linalg.hpp"

#include <cmath>
#include <sstream>

namespace tasksample {

SampleSet::SampleSet(std::vector<Index> indices, Index ambient_size)
    : indices_(std::move(indices)), mask_(ambient_size, 0), ambient_(ambient_size) {
  if (ambient_size < 0) throw InvalidParameter("negative ambient size");
  for (Index v : indices_) {
    if (v < 0 || v >= ambient_size)
      throw InvalidParameter("sample index " + std::to_string(v) +
                             " outside [0, " + std::to_string(ambient_size) + ")");
    if (mask_[v]) throw InvalidParameter("duplicate sample index " + std::to_string(v));
    mask_[v] = 1;
  }
}

std::vector<Index> SampleSet::complement() const {
  std::vector<Index> out;
  out.reserve(ambient_ - size());
  for (Index v = 0; v < ambient_; ++v)
    if (!mask_[v]) out.push_back(v);
  return out;
}

SampleSet SampleSet::with(Index v) const {
  auto next = indices_;
  next.push_back(v);
  return SampleSet(std::move(next), ambient_);
}

SampleSet SampleSet::prefix(Index count) const {
  if (count < 0 || count > size()) throw InvalidParameter("prefix out of range");
  return SampleSet({indices_.begin(), indices_.begin() + count}, ambient_);
}

std::string to_string(MethodKind kind) {
  return kind == MethodKind::LeastSquares ? "LS" : "FP";
}

MethodKind method_kind(const ReconstructionMethod& method) {
  return std::holds_alternative<LeastSquaresMethod>(method)
             ? MethodKind::LeastSquares
             : MethodKind::FeaturePropagation;
}

ReconstructionOperator ls_operator(const LeastSquaresMethod& method,
                                   const SampleSet& s) {
  const Matrix& u = method.low_band;
  if (s.empty()) throw InvalidParameter("LS needs a nonempty sample set");
  if (s.ambient_size() != u.rows())
    throw DimensionMismatch("sample set and basis disagree on node count");
  const Index k = u.cols();
  auto pinv = pseudo_inverse(select_rows(u, s.indices()), method.rcond);
  return ReconstructionOperator{
      .method = MethodKind::LeastSquares,
      .bandwidth = k,
      .matrix = u * pinv.matrix,
      .sample_set = s,
      .rank = pinv.rank,
      .rank_deficient = pinv.rank < k,
  };
}

ReconstructionOperator ls_operator(const SpectralBasis& basis, Index k,
                                   const SampleSet& s, double rcond) {
  if (k < 1 || k > basis.size())
    throw InvalidParameter("bandwidth k=" + std::to_string(k) + " out of range");
  return ls_operator(LeastSquaresMethod{basis.low_band(k), rcond}, s);
}

ReconstructionOperator fp_operator(const Matrix& laplacian, const SampleSet& s) {
  const Index n = laplacian.rows();
  if (s.empty()) throw InvalidParameter("FP needs a nonempty sample set");
  if (s.ambient_size() != n)
    throw DimensionMismatch("sample set and Laplacian disagree on node count");

  const auto& sampled = s.indices();
  const auto unsampled = s.complement();
  Matrix r = Matrix::Zero(n, s.size());
  for (Index j = 0; j < s.size(); ++j) r(sampled[j], j) = 1.0;

  ReconstructionOperator op{
      .method = MethodKind::FeaturePropagation,
      .matrix = {},
      .sample_set = s,
      .rank = s.size(),
  };
  if (!unsampled.empty()) {
    const Matrix grounded = select_block(laplacian, unsampled, unsampled);
    const Matrix coupling = select_block(laplacian, unsampled, sampled);
    Eigen::LDLT<Matrix> ldlt(grounded);
    const Vector pivots = ldlt.vectorD();
    const double smallest = pivots.minCoeff();
    const double largest = pivots.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(smallest > 1e-14 * largest)) {
      std::ostringstream msg;
      msg << "grounded Laplacian is numerically singular (smallest pivot "
          << smallest << ")";
      throw ConditioningError(msg.str(), smallest);
    }
    const double rc = ldlt.rcond();
    op.condition_estimate = rc > 0.0 ? 1.0 / rc : INFINITY;
    op.ill_conditioned = op.condition_estimate > kConditionWarning;

    const Matrix extension = ldlt.solve(-coupling);
    for (std::size_t i = 0; i < unsampled.size(); ++i)
      r.row(unsampled[i]) = extension.row(i);
  }
  op.matrix = std::move(r);
  return op;
}

ReconstructionOperator build_operator(const ReconstructionMethod& method,
                                      const SampleSet& s) {
  if (const auto* ls = std::get_if<LeastSquaresMethod>(&method))
    return ls_operator(*ls, s);
  return fp_operator(std::get<FeaturePropagationMethod>(method).laplacian, s);
}

Matrix reconstruct(const ReconstructionOperator& op, const Matrix& observations) {
  if (observations.rows() != op.matrix.cols())
    throw DimensionMismatch("operator expects " + std::to_string(op.matrix.cols()) +
                            " observed rows, got " +
                            std::to_string(observations.rows()));
  return op.matrix * observations;
}

}  // namespace tasksample
