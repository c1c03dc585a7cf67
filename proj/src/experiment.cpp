#include "tasksample/experiment.hpp"

#include "tasksample/classifier.hpp"
#include "tasksample/linalg.hpp"
#include "tasksample/losses.hpp"
#include "tasksample/parallel.hpp"
#include "tasksample/rng.hpp"
#include "tasksample/sampler.hpp"
#include "tasksample/signal.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <variant>

namespace tasksample {

namespace {

// Seed streams, one per consumer of randomness.
enum Stream : std::uint64_t {
  kGraphStream = 1,
  kClassifierStream = 2,
  kRandomSamplerStream = 3,
  kMonteCarloStream = 4,
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Instance {
  Graph graph;
  SpectralBasis basis;
  Matrix laplacian;
  Index bandwidth = 0;
  Matrix sigma;
  ClassifierModel model;
};

ClassifierModel make_classifier(const ExperimentConfig& c, const Graph& g,
                                std::uint64_t seed) {
  const auto& spec = c.classifier;
  const Index n = g.node_count();
  if (spec.kind == ClassifierKind::Identity)
    return explicit_model(Matrix::Identity(n, n), Vector::Ones(c.signal.dim));

  const Matrix adjacency = normalized_adjacency(g, spec.gamma);
  if (spec.kind == ClassifierKind::Sgc)
    return build_sgc(adjacency, spec.layers, spec.widths, seed);

  // Polynomial filter; the readout weights are drawn like the SGC's.
  const ClassifierModel weights =
      build_sgc(Matrix::Identity(n, n), 1, spec.widths, seed);
  return build_polynomial(adjacency, spec.coefficients, weights.w);
}

Instance prepare(const ExperimentConfig& c, Graph graph, Index graph_id,
                 std::ostream* log) {
  const Index n = graph.node_count();
  validate_for_nodes(c, n);
  Matrix lap = laplacian(graph);
  SpectralBasis basis = eigendecompose(lap);
  const Index k = c.signal.bandwidth.resolve(n);
  if (bandwidth_is_degenerate(basis, k) && log)
    *log << "warning: graph " << graph_id << ": degeneracy_warning: eigenvalues "
         << k - 1 << " and " << k << " coincide within " << kDegeneracyGap
         << "; the bandlimiting projector is not unique\n";

  CovarianceSpec spec;
  if (c.signal.covariance == CovarianceKind::Bandlimited)
    spec.kind = Bandlimited{k};
  else
    spec.kind = LaplacianPseudoinverse{};
  Matrix sigma = realize_covariance(spec, basis);
  ClassifierModel model =
      make_classifier(c, graph, derive_seed(c.seed, {kClassifierStream, (std::uint64_t)graph_id}));
  return Instance{std::move(graph), std::move(basis), std::move(lap), k,
                  std::move(sigma), std::move(model)};
}

ReconstructionMethod make_method(MethodKind kind, const Instance& inst) {
  if (kind == MethodKind::LeastSquares)
    return LeastSquaresMethod{inst.basis.low_band(inst.bandwidth), kDefaultRcond};
  return FeaturePropagationMethod{inst.laplacian};
}

SampleSet random_draw(const ExperimentConfig& c, Index graph_id, Index n, Index size,
                      int draw) {
  return random_sample(
      n, size,
      derive_seed(c.seed, {kRandomSamplerStream, (std::uint64_t)graph_id,
                           (std::uint64_t)size, (std::uint64_t)draw}));
}

struct InstanceResult {
  std::vector<ResultRow> rows;
  Index nodes = 0;
};

InstanceResult run_instance(const ExperimentConfig& c, Index graph_id, int threads,
                            std::ostream* log) {
  const Instance inst = prepare(c, make_graph(c, graph_id), graph_id, log);
  const Index n = inst.graph.node_count();
  const Index d = inst.model.feature_dim();
  const auto sizes = sweep_sizes(c, n, inst.bandwidth);
  const Index max_size = sizes.back();
  const bool mc = c.trials > 0;
  std::optional<GaussianSource> source;
  if (mc) source.emplace(inst.sigma);

  InstanceResult out;
  out.nodes = n;
  const auto random_si = std::find(c.samplers.begin(), c.samplers.end(), SamplerKind::Random);
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    const ReconstructionMethod method = make_method(c.methods[mi], inst);
    const bool fp = std::holds_alternative<FeaturePropagationMethod>(method);
    std::vector<SamplingObjective> cls, rec;
    for (const double eta2 : c.signal.noise) {
      cls.push_back(SamplingObjective::classification(inst.model.g, inst.sigma, method, eta2));
      rec.push_back(SamplingObjective::reconstruction(inst.sigma, method, eta2, d));
    }
    const auto base_row = [&](SamplerKind sampler, std::size_t ei, Index size) {
      ResultRow row;
      row.graph_id = graph_id;
      row.sampler = to_string(sampler);
      row.reconstruction_method = to_string(c.methods[mi]);
      row.eta2 = c.signal.noise[ei];
      row.sample_size = size;
      return row;
    };
    const auto add_mc = [&](const ReconstructionOperator& op, std::size_t ei,
                            std::size_t si, Index size, int draw, double* sums) {
      const auto est = monte_carlo_losses(
          inst.model, *source, op, c.signal.noise[ei], c.trials,
          derive_seed(c.seed, {kMonteCarloStream, (std::uint64_t)graph_id, mi, ei, si,
                               (std::uint64_t)size, (std::uint64_t)draw}),
          threads);
      sums[0] += est.classification.mean;
      sums[1] += est.classification.standard_error * est.classification.standard_error;
      sums[2] += est.reconstruction.mean;
      sums[3] += est.reconstruction.standard_error * est.reconstruction.standard_error;
    };

    // Random rows for all noise levels in one pass: each draw's operator is
    // built once and shared. Wall time is split evenly across noise levels.
    std::vector<std::vector<ResultRow>> random_rows(c.signal.noise.size());
    if (random_si != c.samplers.end()) {
      const auto si = static_cast<std::size_t>(random_si - c.samplers.begin());
      const std::size_t levels = c.signal.noise.size();
      for (const Index size : sizes) {
        const auto start = Clock::now();
        std::vector<std::array<double, 6>> sums(levels, std::array<double, 6>{});
        for (int draw = 0; draw < c.random_draws; ++draw) {
          const SampleSet s = random_draw(c, graph_id, n, size, draw);
          std::optional<ReconstructionOperator> op;
          if (fp || mc) op = build_operator(method, s);
          for (std::size_t ei = 0; ei < levels; ++ei) {
            sums[ei][0] += fp ? cls[ei].evaluate(*op) : cls[ei].evaluate(s);
            sums[ei][1] += fp ? rec[ei].evaluate(*op) : rec[ei].evaluate(s);
            if (mc) add_mc(*op, ei, si, size, draw, sums[ei].data() + 2);
          }
        }
        const double ms = elapsed_ms(start) / static_cast<double>(levels);
        const double draws = c.random_draws;
        for (std::size_t ei = 0; ei < levels; ++ei) {
          ResultRow row = base_row(SamplerKind::Random, ei, size);
          row.analytic_classification_loss = sums[ei][0] / draws;
          row.analytic_reconstruction_loss = sums[ei][1] / draws;
          if (mc) {
            row.mc_classification_mean = sums[ei][2] / draws;
            row.mc_classification_se = std::sqrt(sums[ei][3]) / draws;
            row.mc_reconstruction_mean = sums[ei][4] / draws;
            row.mc_reconstruction_se = std::sqrt(sums[ei][5]) / draws;
          }
          row.wall_time_ms = ms;
          random_rows[ei].push_back(std::move(row));
        }
      }
    }

    for (std::size_t ei = 0; ei < c.signal.noise.size(); ++ei) {
      const double eta2 = c.signal.noise[ei];
      for (std::size_t si = 0; si < c.samplers.size(); ++si) {
        const SamplerKind sampler = c.samplers[si];
        if (sampler == SamplerKind::Random) {
          for (auto& row : random_rows[ei]) out.rows.push_back(std::move(row));
          continue;
        }
        const auto trace_start = Clock::now();
        const GreedyTrace trace = greedy_sample(
            sampler == SamplerKind::GreedyClassification ? cls[ei] : rec[ei], max_size, threads);
        if (log)
          *log << "graph " << graph_id << " " << to_string(c.methods[mi]) << " eta2=" << eta2
               << " " << to_string(sampler) << ": trace of " << max_size << " in "
               << std::fixed << std::setprecision(1) << elapsed_ms(trace_start) << " ms\n"
               << std::defaultfloat << std::setprecision(6);

        for (const Index size : sizes) {
          const auto start = Clock::now();
          ResultRow row = base_row(sampler, ei, size);
          const SampleSet s = trace.chosen.prefix(size);
          const auto op = build_operator(method, s);
          row.analytic_classification_loss = cls[ei].evaluate(op);
          row.analytic_reconstruction_loss = rec[ei].evaluate(op);
          if (mc) {
            double sums[4] = {0.0, 0.0, 0.0, 0.0};
            add_mc(op, ei, si, size, 0, sums);
            row.mc_classification_mean = sums[0];
            row.mc_classification_se = std::sqrt(sums[1]);
            row.mc_reconstruction_mean = sums[2];
            row.mc_reconstruction_se = std::sqrt(sums[3]);
          }
          row.wall_time_ms = elapsed_ms(start);
          out.rows.push_back(std::move(row));
        }
      }
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string fmt_ms(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

Graph make_graph(const ExperimentConfig& c, Index graph_id) {
  const auto seed = derive_seed(c.seed, {kGraphStream, (std::uint64_t)graph_id});
  switch (c.graph.model) {
    case GraphModel::BarabasiAlbert: return generate_ba(c.graph.nodes, c.graph.attach, seed);
    case GraphModel::StochasticBlock:
      return generate_sbm({c.graph.nodes, c.graph.blocks, c.graph.p_in, c.graph.p_out}, seed);
    case GraphModel::File: return load_graph(c.graph.file);
  }
  throw InvalidParameter("unknown graph model");
}

ExperimentSummary run_experiment(const ExperimentConfig& c, std::ostream* log) {
  validate(c);
  ExperimentSummary summary;
  summary.instances = c.graph.count;

  // Parallelize across graphs when there are enough of them, otherwise
  // inside each instance.
  const bool outer = c.threads > 1 && c.graph.count > 1;
  const int inner_threads = outer ? 1 : c.threads;
  std::vector<std::optional<InstanceResult>> results(c.graph.count);
  std::vector<std::string> errors(c.graph.count);
  parallel_for(static_cast<std::size_t>(c.graph.count), outer ? c.threads : 1,
               [&](std::size_t g) {
                 try {
                   results[g] = run_instance(c, static_cast<Index>(g), inner_threads,
                                             outer ? nullptr : log);
                 } catch (const Error& e) {
                   errors[g] = e.what();
                 }
               });

  Index mc_rows = 0, mc_agree = 0;
  for (int g = 0; g < c.graph.count; ++g) {
    if (!results[g]) {
      ++summary.failed_instances;
      const std::string msg = "graph " + std::to_string(g) + " skipped: " + errors[g];
      summary.failures.push_back(msg);
      if (log) *log << "error: " << msg << '\n';
      continue;
    }
    const double floor = 1e-6 * static_cast<double>(results[g]->nodes);
    for (auto& row : results[g]->rows) {
      if (row.mc_classification_mean) {
        ++mc_rows;
        if (std::abs(*row.mc_classification_mean - row.analytic_classification_loss) <=
            4.0 * *row.mc_classification_se + floor)
          ++mc_agree;
      }
      summary.rows.push_back(std::move(row));
    }
  }
  if (mc_rows > 0) {
    summary.mc_agreement = static_cast<double>(mc_agree) / static_cast<double>(mc_rows);
    if (*summary.mc_agreement < 0.95 && log)
      *log << "alarm: only " << 100.0 * *summary.mc_agreement
           << "% of rows have MC classification within 4 SE of the analytic loss\n";
  }
  summary.exit_code = summary.failed_instances > 0 ? kExitPartialFailure : kExitOk;
  return summary;
}

ExperimentSummary run_real_dataset(const ExperimentConfig& c, std::ostream* log) {
  validate(c);
  if (c.graph.model != GraphModel::File)
    throw ValidationError("real-dataset runs need graph.model = file");
  if (c.signal.file.empty()) throw ValidationError("real-dataset runs need signal.file");

  Graph graph = load_graph(c.graph.file);
  Matrix x = load_signals(c.signal.file);
  if (x.rows() != graph.node_count())
    throw DimensionMismatch("signal file has " + std::to_string(x.rows()) +
                            " nodes but the graph has " +
                            std::to_string(graph.node_count()));
  if (c.signal.center) x.rowwise() -= x.colwise().mean();

  const Instance inst = prepare(c, std::move(graph), 0, log);
  const Index n = inst.graph.node_count();
  const Index m = x.cols();
  const Matrix& g = inst.model.g;
  const Matrix clean = g * x;
  const auto sizes = sweep_sizes(c, n, inst.bandwidth);

  ExperimentSummary summary;
  summary.instances = 1;
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    const ReconstructionMethod method = make_method(c.methods[mi], inst);
    for (double eta2 : c.signal.noise) {
      const auto cls = SamplingObjective::classification(g, inst.sigma, method, eta2);
      const auto rec = SamplingObjective::reconstruction(inst.sigma, method, eta2, 1);
      for (const SamplerKind sampler : c.samplers) {
        std::optional<GreedyTrace> trace;
        if (sampler != SamplerKind::Random)
          trace = greedy_sample(sampler == SamplerKind::GreedyClassification ? cls : rec,
                                sizes.back(), c.threads);
        for (const Index size : sizes) {
          const auto start = Clock::now();
          const int draws = trace ? 1 : c.random_draws;
          RealResultRow row;
          row.sampler = to_string(sampler);
          row.reconstruction_method = to_string(c.methods[mi]);
          row.eta2 = eta2;
          row.sample_size = size;
          row.signals = m;
          double cls_var = 0.0, rec_var = 0.0;
          for (int draw = 0; draw < draws; ++draw) {
            const SampleSet s = trace ? trace->chosen.prefix(size)
                                      : random_draw(c, 0, n, size, draw);
            const auto op = build_operator(method, s);
            row.analytic_classification_loss += cls.evaluate(op) / draws;
            row.analytic_reconstruction_loss += rec.evaluate(op) / draws;
            const Matrix x_hat = op.matrix * select_rows(x, s.indices());
            const Matrix rebuilt = g * x_hat;
            std::vector<double> mismatches(m), errors(m);
            for (Index j = 0; j < m; ++j) {
              double count = 0.0;
              for (Index i = 0; i < n; ++i)
                if ((clean(i, j) < 0.0) != (rebuilt(i, j) < 0.0)) count += 1.0;
              mismatches[j] = count;
              errors[j] = (x.col(j) - x_hat.col(j)).squaredNorm();
            }
            const auto cls_est = summarize(mismatches);
            const auto rec_est = summarize(errors);
            row.empirical_classification_mean += cls_est.mean / draws;
            row.empirical_reconstruction_mean_per_signal += rec_est.mean / draws;
            cls_var += cls_est.standard_error * cls_est.standard_error;
            rec_var += rec_est.standard_error * rec_est.standard_error;
          }
          row.empirical_classification_se = std::sqrt(cls_var) / draws;
          row.empirical_reconstruction_se = std::sqrt(rec_var) / draws;
          row.empirical_reconstruction_total =
              row.empirical_reconstruction_mean_per_signal * static_cast<double>(m);
          row.wall_time_ms = elapsed_ms(start);
          summary.real_rows.push_back(std::move(row));
        }
      }
    }
  }
  summary.exit_code = kExitOk;
  return summary;
}

std::string describe(const ExperimentConfig& c) {
  validate(c);
  Index n = c.graph.nodes;
  if (c.graph.model == GraphModel::File) {
    n = load_graph(c.graph.file).node_count();
    validate_for_nodes(c, n);
  }
  const Index k = c.signal.bandwidth.resolve(n);
  const auto sizes = sweep_sizes(c, n, k);
  const Index max_size = sizes.back();

  std::ostringstream out;
  out << "graphs:       " << c.graph.count << " x " << to_string(c.graph.model) << " (N="
      << n;
  if (c.graph.model == GraphModel::BarabasiAlbert) out << ", attach=" << c.graph.attach;
  if (c.graph.model == GraphModel::StochasticBlock)
    out << ", blocks=" << c.graph.blocks << ", p_in=" << c.graph.p_in
        << ", p_out=" << c.graph.p_out;
  if (c.graph.model == GraphModel::File) out << ", file=" << c.graph.file.string();
  out << ")\n";
  out << "signal:       "
      << (c.signal.covariance == CovarianceKind::Bandlimited ? "bandlimited" : "laplacian pinv")
      << ", k=" << k << " (rule " << c.signal.bandwidth.str() << "), d=" << c.signal.dim
      << ", eta2=";
  for (std::size_t i = 0; i < c.signal.noise.size(); ++i)
    out << (i ? "," : "") << c.signal.noise[i];
  out << "\n";
  out << "classifier:   ";
  switch (c.classifier.kind) {
    case ClassifierKind::Sgc:
      out << "sgc (gamma=" << c.classifier.gamma << ", layers=" << c.classifier.layers << ")";
      break;
    case ClassifierKind::Polynomial:
      out << "polynomial (gamma=" << c.classifier.gamma << ", degree="
          << c.classifier.coefficients.size() - 1 << ")";
      break;
    case ClassifierKind::Identity: out << "identity"; break;
  }
  out << "\nmethods:      ";
  for (std::size_t i = 0; i < c.methods.size(); ++i)
    out << (i ? ", " : "") << to_string(c.methods[i]);
  out << "\nsamplers:     ";
  for (std::size_t i = 0; i < c.samplers.size(); ++i)
    out << (i ? ", " : "") << to_string(c.samplers[i]);
  out << " (random draws per size: " << c.random_draws << ")\n";
  out << "sample sizes: " << sizes.front() << ".." << max_size << " step " << c.sweep.step
      << " (" << sizes.size() << " sizes)\n";

  const Index rows = static_cast<Index>(c.graph.count) * c.methods.size() *
                     c.signal.noise.size() * c.samplers.size() * sizes.size();
  out << "plan:         " << c.graph.count << " graphs x " << c.methods.size() << " methods x "
      << c.samplers.size() << " samplers x " << c.signal.noise.size() << " noise levels x "
      << sizes.size() << " sizes = " << rows << " rows\n";

  Index greedy_evals = 0;
  for (Index s = 0; s < max_size; ++s) greedy_evals += n - s;
  Index per_block = 0, mc_calls = 0;
  for (auto sampler : c.samplers) {
    if (sampler == SamplerKind::Random) {
      per_block += 2 * c.random_draws * static_cast<Index>(sizes.size());
      mc_calls += c.random_draws * static_cast<Index>(sizes.size());
    } else {
      per_block += greedy_evals + 2 * static_cast<Index>(sizes.size());
      mc_calls += static_cast<Index>(sizes.size());
    }
  }
  const Index blocks = static_cast<Index>(c.graph.count) * c.methods.size() * c.signal.noise.size();
  out << "evaluations:  " << blocks * per_block << " analytic loss evaluations";
  if (c.trials > 0) out << ", " << blocks * mc_calls * c.trials << " Monte-Carlo trials";
  else out << ", Monte-Carlo disabled";
  out << "\n";
  const int workers = std::max(1, std::min(c.threads, c.graph.count));
  const double bytes = static_cast<double>(workers) * 8.0 *
                       (12.0 * n * n + 4.0 * n * static_cast<double>(max_size));
  out << "memory:       ~" << std::fixed << std::setprecision(1) << bytes / (1024.0 * 1024.0)
      << " MiB (" << workers << " worker" << (workers > 1 ? "s" : "") << ")\n";
  out << "seed:         " << c.seed << ", output: " << c.output.string() << "\n";
  return out.str();
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << '\n';
  for (const auto& r : rows)
    out << r.graph_id << ',' << r.sampler << ',' << r.reconstruction_method << ','
        << fmt(r.eta2) << ',' << r.sample_size << ',' << fmt(r.analytic_classification_loss)
        << ',' << fmt(r.analytic_reconstruction_loss) << ',' << fmt(r.mc_classification_mean)
        << ',' << fmt(r.mc_classification_se) << ',' << fmt(r.mc_reconstruction_mean) << ','
        << fmt(r.mc_reconstruction_se) << ',' << fmt_ms(r.wall_time_ms) << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<RealResultRow>& rows) {
  out << kRealResultHeader << '\n';
  for (const auto& r : rows)
    out << r.graph_id << ',' << r.sampler << ',' << r.reconstruction_method << ','
        << fmt(r.eta2) << ',' << r.sample_size << ',' << fmt(r.analytic_classification_loss)
        << ',' << fmt(r.analytic_reconstruction_loss) << ','
        << fmt(r.empirical_classification_mean) << ',' << fmt(r.empirical_classification_se)
        << ',' << fmt(r.empirical_reconstruction_mean_per_signal) << ','
        << fmt(r.empirical_reconstruction_se) << ',' << fmt(r.empirical_reconstruction_total)
        << ',' << r.signals << ',' << fmt_ms(r.wall_time_ms) << '\n';
}

void write_results_csv(const std::filesystem::path& path, const ExperimentSummary& summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  if (!summary.real_rows.empty())
    write_results_csv(out, summary.real_rows);
  else
    write_results_csv(out, summary.rows);
}

void write_graph(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "# " << g.node_count() << " nodes, " << g.edges().size() << " edges\n";
  for (const auto& e : g.edges()) out << e.source << ',' << e.target << ',' << fmt(e.weight) << '\n';
}

}  // namespace tasksample
