#include "tasksample/signal.hpp"

#include "tasksample/linalg.hpp"
#include "tasksample/reconstruction.hpp"
#include "tasksample/rng.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

namespace tasksample {

Matrix bandlimiting_projector(const SpectralBasis& basis, Index k) {
  if (k < 1 || k > basis.size())
    throw InvalidParameter("bandwidth k=" + std::to_string(k) +
                           " outside [1, " + std::to_string(basis.size()) + "]");
  const Matrix u = basis.low_band(k);
  return u * u.transpose();
}

std::string CovarianceSpec::describe() const {
  struct Visitor {
    std::string operator()(const Bandlimited& b) const {
      return "bandlimited(k=" + std::to_string(b.bandwidth) + ")";
    }
    std::string operator()(const LaplacianPseudoinverse&) const {
      return "laplacian_pinv";
    }
    std::string operator()(const ExplicitCovariance& e) const {
      return "explicit(" + std::to_string(e.matrix.rows()) + "x" +
             std::to_string(e.matrix.cols()) + ")";
    }
  };
  return std::visit(Visitor{}, kind);
}

void validate_covariance(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols())
    throw InvalidInput("covariance must be square");
  if (!sigma.allFinite()) throw InvalidInput("covariance has non-finite entries");
  if (asymmetry(sigma) > 1e-10)
    throw InvalidInput("covariance is not symmetric");
  if (sigma.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sigma + sigma.transpose()),
                                               Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-8)
    throw InvalidInput("covariance is not positive semidefinite (min eigenvalue " +
                       std::to_string(solver.eigenvalues().minCoeff()) + ")");
}

Matrix realize_covariance(const CovarianceSpec& spec, const SpectralBasis& basis) {
  struct Visitor {
    const SpectralBasis& basis;
    Matrix operator()(const Bandlimited& b) const {
      return bandlimiting_projector(basis, b.bandwidth);
    }
    Matrix operator()(const LaplacianPseudoinverse&) const {
      Vector inv = Vector::Zero(basis.size());
      for (Index i = 0; i < basis.size(); ++i)
        if (basis.eigenvalues(i) > kPinvEigenTolerance)
          inv(i) = 1.0 / basis.eigenvalues(i);
      return basis.eigenvectors * inv.asDiagonal() *
             basis.eigenvectors.transpose();
    }
    Matrix operator()(const ExplicitCovariance& e) const {
      if (e.matrix.rows() != basis.size())
        throw DimensionMismatch("explicit covariance is " +
                                std::to_string(e.matrix.rows()) +
                                " wide but the graph has " +
                                std::to_string(basis.size()) + " nodes");
      validate_covariance(e.matrix);
      return e.matrix;
    }
  };
  return std::visit(Visitor{basis}, spec.kind);
}

GaussianSource::GaussianSource(const Matrix& sigma) {
  validate_covariance(sigma);
  const Index n = sigma.rows();
  if (n == 0) {
    factor_ = Matrix(0, 0);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sigma + sigma.transpose()));
  const Vector& lambda = solver.eigenvalues();
  const double top = std::max(lambda.maxCoeff(), 0.0);
  // Round-off eigenvalues of a projector sit around 1e-16; keeping them would
  // leak 1e-8-sized components outside the support.
  const double floor = 1e-12 * std::max(top, 1.0);
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i)
    if (lambda(i) > floor) keep.push_back(i);
  factor_ = Matrix::Zero(n, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    factor_.col(c) = solver.eigenvectors().col(keep[c]) * std::sqrt(lambda(keep[c]));
}

FeatureMatrix GaussianSource::sample(Index d, std::uint64_t seed) const {
  if (d < 1) throw InvalidParameter("feature dimension must be >= 1");
  FeatureMatrix x;
  x.seed = seed;
  if (factor_.cols() == 0) {
    x.values = Matrix::Zero(factor_.rows(), d);
    return x;
  }
  x.values = factor_ * standard_normal(factor_.cols(), d, seed);
  return x;
}

FeatureMatrix sample_features(const Matrix& sigma, Index d, std::uint64_t seed) {
  return GaussianSource(sigma).sample(d, seed);
}

Matrix standard_normal(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) z(i, j) = normal(rng);
  return z;
}

Matrix observe(const FeatureMatrix& x, const SampleSet& s, const NoiseSpec& noise,
               std::uint64_t seed) {
  if (s.empty()) throw InvalidParameter("cannot observe on an empty sample set");
  if (s.ambient_size() != x.nodes())
    throw DimensionMismatch("sample set is over " +
                            std::to_string(s.ambient_size()) +
                            " nodes but features have " +
                            std::to_string(x.nodes()) + " rows");
  if (noise.eta2 < 0.0) throw InvalidParameter("noise variance must be >= 0");
  Matrix y = select_rows(x.values, s.indices());
  if (noise.eta2 > 0.0)
    y += std::sqrt(noise.eta2) * standard_normal(y.rows(), y.cols(), seed);
  return y;
}

double empirical_snr_db(const Matrix& clean, const Matrix& noisy) {
  const double noise = (noisy - clean).squaredNorm();
  return 10.0 * std::log10(clean.squaredNorm() / noise);
}

Matrix load_signals(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open signal file " + path.string(), 0);
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) {
      while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
      while (!f.empty() && f.front() == ' ') f.erase(f.begin());
      out.push_back(f);
    }
    return out;
  };
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 0);
  ++line_no;
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "node")
    throw ParseError(path.string() + ":1: header must be node,sig_0,...", 1);
  const std::size_t m = header.size() - 1;

  std::map<Index, std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line);
    auto fail = [&](const std::string& why) {
      return ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why,
                        line_no);
    };
    if (fields.size() != m + 1)
      throw fail("expected " + std::to_string(m + 1) + " fields");
    std::vector<double> values(m);
    Index node = 0;
    try {
      node = std::stoll(fields[0]);
      for (std::size_t c = 0; c < m; ++c) values[c] = std::stod(fields[c + 1]);
    } catch (const std::exception&) {
      throw fail("malformed number");
    }
    if (node < 0) throw fail("negative node id");
    if (!rows.emplace(node, std::move(values)).second)
      throw fail("duplicate node " + std::to_string(node));
  }
  const Index n = static_cast<Index>(rows.size());
  Matrix out(n, static_cast<Index>(m));
  Index expected = 0;
  for (const auto& [node, values] : rows) {
    if (node != expected)
      throw ParseError(path.string() + ": node ids must be 0.." +
                           std::to_string(n - 1) + " (missing " +
                           std::to_string(expected) + ")",
                       0);
    for (std::size_t c = 0; c < m; ++c) out(node, c) = values[c];
    ++expected;
  }
  return out;
}

void write_signals(const std::filesystem::path& path, const Matrix& signals) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "node";
  for (Index c = 0; c < signals.cols(); ++c) out << ",sig_" << c;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < signals.rows(); ++i) {
    out << i;
    for (Index c = 0; c < signals.cols(); ++c) out << ',' << signals(i, c);
    out << '\n';
  }
}

}  // namespace tasksample
