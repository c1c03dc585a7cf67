#pragma once

#include "tasksample/graph.hpp"
#include "tasksample/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>

namespace tasksample {

class SampleSet;

/// U_{:,0..k-1} U_{:,0..k-1}^T.
Matrix bandlimiting_projector(const SpectralBasis& basis, Index k);

struct Bandlimited {
  Index bandwidth = 1;
};
struct LaplacianPseudoinverse {};
struct ExplicitCovariance {
  Matrix matrix;
};

// Prior covariance of every feature column.
struct CovarianceSpec {
  std::variant<Bandlimited, LaplacianPseudoinverse, ExplicitCovariance> kind;

  std::string describe() const;
};

// Eigenvalues at or below this are treated as the null space when forming
// the Laplacian pseudoinverse.
inline constexpr double kPinvEigenTolerance = 1e-9;

Matrix realize_covariance(const CovarianceSpec& spec, const SpectralBasis& basis);

/// Throws InvalidInput unless `sigma` is square, symmetric within 1e-10 and
/// has eigenvalues >= -1e-8.
void validate_covariance(const Matrix& sigma);

struct FeatureMatrix {
  Matrix values;  // n x d
  std::uint64_t seed = 0;

  Index nodes() const noexcept { return values.rows(); }
  Index dim() const noexcept { return values.cols(); }
};

// Draws columns i.i.d. N(0, sigma). The square-root factor F (F F^T = sigma)
// comes from the eigendecomposition of sigma restricted to its positive
// eigenvalues, so rank-deficient covariances are sampled exactly on their
// support. Build once and reuse across Monte-Carlo trials.
class GaussianSource {
 public:
  explicit GaussianSource(const Matrix& sigma);

  FeatureMatrix sample(Index d, std::uint64_t seed) const;
  const Matrix& factor() const noexcept { return factor_; }
  Index nodes() const noexcept { return factor_.rows(); }

 private:
  Matrix factor_;
};

FeatureMatrix sample_features(const Matrix& sigma, Index d, std::uint64_t seed);

struct NoiseSpec {
  double eta2 = 0.0;  // variance of white observation noise
};

/// X_{S,:} + eta * eps, eps i.i.d. standard normal.
Matrix observe(const FeatureMatrix& x, const SampleSet& s, const NoiseSpec& noise,
               std::uint64_t seed);

/// i.i.d. standard normal matrix, column-major fill order.
Matrix standard_normal(Index rows, Index cols, std::uint64_t seed);

/// 10 log10(||clean||^2 / ||noisy - clean||^2).
double empirical_snr_db(const Matrix& clean, const Matrix& noisy);

/// Signal CSV: header `node,sig_0,...,sig_{m-1}`, one row per node id.
/// Returns an (n x m) matrix with row i holding node i.
Matrix load_signals(const std::filesystem::path& path);
void write_signals(const std::filesystem::path& path, const Matrix& signals);

}  // namespace tasksample
