#include "tasksample/config.hpp"

#include "tasksample/losses.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tasksample {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Index parse_int(const std::string& key, const std::string& v) {
  Index out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ValidationError(key + ": expected an integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ValidationError(key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  const auto s = lower(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError(key + ": expected true/false, got '" + v + "'");
}

LayerShape parse_shape(const std::string& key, const std::string& v) {
  const auto x = lower(v).find('x');
  if (x == std::string::npos)
    throw ValidationError(key + ": layer shape must look like 64x32, got '" + v + "'");
  return LayerShape{parse_int(key, trim(v.substr(0, x))),
                    parse_int(key, trim(v.substr(x + 1)))};
}

MethodKind parse_method(const std::string& key, const std::string& v) {
  const auto s = lower(v);
  if (s == "ls") return MethodKind::LeastSquares;
  if (s == "fp") return MethodKind::FeaturePropagation;
  throw ValidationError(key + ": unknown reconstruction method '" + v + "'");
}

SamplerKind parse_sampler(const std::string& key, const std::string& v) {
  const auto s = lower(v);
  if (s == "random") return SamplerKind::Random;
  if (s == "greedy_classification") return SamplerKind::GreedyClassification;
  if (s == "greedy_reconstruction") return SamplerKind::GreedyReconstruction;
  throw ValidationError(key + ": unknown sampler '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"graph.model",
       [](auto& c, auto& k, auto& v) {
         const auto s = lower(v);
         if (s == "ba") c.graph.model = GraphModel::BarabasiAlbert;
         else if (s == "sbm") c.graph.model = GraphModel::StochasticBlock;
         else if (s == "file") c.graph.model = GraphModel::File;
         else throw ValidationError(k + ": unknown graph model '" + v + "'");
       }},
      {"graph.nodes", [](auto& c, auto& k, auto& v) { c.graph.nodes = parse_int(k, v); }},
      {"graph.count",
       [](auto& c, auto& k, auto& v) { c.graph.count = static_cast<int>(parse_int(k, v)); }},
      {"graph.attach", [](auto& c, auto& k, auto& v) { c.graph.attach = parse_int(k, v); }},
      {"graph.blocks", [](auto& c, auto& k, auto& v) { c.graph.blocks = parse_int(k, v); }},
      {"graph.p_in", [](auto& c, auto& k, auto& v) { c.graph.p_in = parse_double(k, v); }},
      {"graph.p_out", [](auto& c, auto& k, auto& v) { c.graph.p_out = parse_double(k, v); }},
      {"graph.file", [](auto& c, auto&, auto& v) { c.graph.file = v; }},
      {"signal.covariance",
       [](auto& c, auto& k, auto& v) {
         const auto s = lower(v);
         if (s == "bandlimited") c.signal.covariance = CovarianceKind::Bandlimited;
         else if (s == "pinv") c.signal.covariance = CovarianceKind::LaplacianPseudoinverse;
         else throw ValidationError(k + ": unknown covariance '" + v + "'");
       }},
      {"signal.bandwidth",
       [](auto& c, auto& k, auto& v) {
         try {
           c.signal.bandwidth = CountRule::parse(v);
         } catch (const Error& e) {
           throw ValidationError(k + ": " + e.what());
         }
         if (c.signal.bandwidth.kind == CountRule::Kind::BandwidthMultiple)
           throw ValidationError(k + ": bandwidth cannot refer to itself");
       }},
      {"signal.dim", [](auto& c, auto& k, auto& v) { c.signal.dim = parse_int(k, v); }},
      {"signal.noise",
       [](auto& c, auto& k, auto& v) {
         c.signal.noise.clear();
         for (const auto& item : split_list(v)) c.signal.noise.push_back(parse_double(k, item));
       }},
      {"signal.file", [](auto& c, auto&, auto& v) { c.signal.file = v; }},
      {"signal.center", [](auto& c, auto& k, auto& v) { c.signal.center = parse_bool(k, v); }},
      {"classifier.kind",
       [](auto& c, auto& k, auto& v) {
         const auto s = lower(v);
         if (s == "sgc") c.classifier.kind = ClassifierKind::Sgc;
         else if (s == "polynomial") c.classifier.kind = ClassifierKind::Polynomial;
         else if (s == "identity") c.classifier.kind = ClassifierKind::Identity;
         else throw ValidationError(k + ": unknown classifier '" + v + "'");
       }},
      {"classifier.gamma",
       [](auto& c, auto& k, auto& v) { c.classifier.gamma = parse_double(k, v); }},
      {"classifier.layers",
       [](auto& c, auto& k, auto& v) {
         c.classifier.layers = static_cast<int>(parse_int(k, v));
       }},
      {"classifier.widths",
       [](auto& c, auto& k, auto& v) {
         c.classifier.widths.clear();
         for (const auto& item : split_list(v))
           c.classifier.widths.push_back(parse_shape(k, item));
       }},
      {"classifier.coefficients",
       [](auto& c, auto& k, auto& v) {
         c.classifier.coefficients.clear();
         for (const auto& item : split_list(v))
           c.classifier.coefficients.push_back(parse_double(k, item));
       }},
      {"reconstruction.methods",
       [](auto& c, auto& k, auto& v) {
         c.methods.clear();
         for (const auto& item : split_list(v)) c.methods.push_back(parse_method(k, item));
       }},
      {"sampler.methods",
       [](auto& c, auto& k, auto& v) {
         c.samplers.clear();
         for (const auto& item : split_list(v))
           c.samplers.push_back(parse_sampler(k, item));
       }},
      {"sampler.random_draws",
       [](auto& c, auto& k, auto& v) { c.random_draws = static_cast<int>(parse_int(k, v)); }},
      {"sweep.min",
       [](auto& c, auto& k, auto& v) {
         try {
           c.sweep.min = CountRule::parse(v);
         } catch (const Error& e) {
           throw ValidationError(k + ": " + e.what());
         }
       }},
      {"sweep.max",
       [](auto& c, auto& k, auto& v) {
         try {
           c.sweep.max = CountRule::parse(v);
         } catch (const Error& e) {
           throw ValidationError(k + ": " + e.what());
         }
       }},
      {"sweep.step", [](auto& c, auto& k, auto& v) { c.sweep.step = parse_int(k, v); }},
      {"mc.trials", [](auto& c, auto& k, auto& v) { c.trials = parse_int(k, v); }},
      {"run.seed",
       [](auto& c, auto& k, auto& v) {
         c.seed = static_cast<std::uint64_t>(parse_int(k, v));
       }},
      {"run.output", [](auto& c, auto&, auto& v) { c.output = v; }},
      {"run.threads",
       [](auto& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_int(k, v)); }},
  };
  return table;
}

}  // namespace

CountRule CountRule::parse(const std::string& raw) {
  const std::string text = lower(trim(raw));
  auto number = [&](const std::string& digits) {
    Index out = 0;
    const auto* end = digits.data() + digits.size();
    auto [ptr, ec] = std::from_chars(digits.data(), end, out);
    if (digits.empty() || ec != std::errc() || ptr != end || out < 1)
      throw InvalidParameter("cannot parse count rule '" + raw + "'");
    return out;
  };
  if (text.rfind("n/", 0) == 0) return {Kind::NodeFraction, number(text.substr(2))};
  if (!text.empty() && text.back() == 'k') {
    const auto head = text.substr(0, text.size() - 1);
    return {Kind::BandwidthMultiple, head.empty() ? 1 : number(head)};
  }
  return {Kind::Absolute, number(text)};
}

Index CountRule::resolve(Index nodes, Index bandwidth) const {
  switch (kind) {
    case Kind::Absolute: return value;
    case Kind::NodeFraction: return nodes / value;
    case Kind::BandwidthMultiple: return value * bandwidth;
  }
  return value;
}

std::string CountRule::str() const {
  switch (kind) {
    case Kind::Absolute: return std::to_string(value);
    case Kind::NodeFraction: return "N/" + std::to_string(value);
    case Kind::BandwidthMultiple: return std::to_string(value) + "k";
  }
  return {};
}

std::string to_string(GraphModel m) {
  switch (m) {
    case GraphModel::BarabasiAlbert: return "ba";
    case GraphModel::StochasticBlock: return "sbm";
    case GraphModel::File: return "file";
  }
  return {};
}

std::string to_string(SamplerKind s) {
  switch (s) {
    case SamplerKind::Random: return "random";
    case SamplerKind::GreedyClassification: return "greedy_classification";
    case SamplerKind::GreedyReconstruction: return "greedy_reconstruction";
  }
  return {};
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ValidationError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (auto [pos, fresh] = seen.emplace(key, line_no); !fresh)
      throw ValidationError("line " + std::to_string(line_no) + ": key '" + key +
                            "' already set on line " + std::to_string(pos->second));
    it->second(config, key, value);
  }
  auto rebase = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
  };
  rebase(config.graph.file);
  rebase(config.signal.file);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  const auto& g = c.graph;
  if (g.count < 1) fail("graph.count must be >= 1");
  switch (g.model) {
    case GraphModel::BarabasiAlbert:
      if (g.attach < 1) fail("graph.attach must be >= 1");
      if (g.nodes <= g.attach) fail("graph.nodes must exceed graph.attach");
      break;
    case GraphModel::StochasticBlock:
      if (g.blocks < 1) fail("graph.blocks must be >= 1");
      if (g.nodes < g.blocks) fail("graph.nodes must be >= graph.blocks");
      if (!(g.p_out >= 0.0 && g.p_out <= g.p_in && g.p_in <= 1.0))
        fail("need 0 <= graph.p_out <= graph.p_in <= 1");
      break;
    case GraphModel::File:
      if (g.file.empty()) fail("graph.file is required when graph.model = file");
      if (!std::filesystem::exists(g.file)) fail("graph.file not found: " + g.file.string());
      if (g.count != 1) fail("graph.count must be 1 when graph.model = file");
      break;
  }
  if (c.signal.dim < 1) fail("signal.dim must be >= 1");
  if (c.signal.noise.empty()) fail("signal.noise needs at least one value");
  for (double e : c.signal.noise)
    if (!(e >= 0.0)) fail("signal.noise values must be >= 0");

  const auto& cl = c.classifier;
  if (!(cl.gamma >= 0.0)) fail("classifier.gamma must be >= 0");
  if (cl.kind != ClassifierKind::Identity) {
    if (cl.widths.empty()) fail("classifier.widths must list at least one layer");
    for (std::size_t l = 0; l < cl.widths.size(); ++l) {
      if (cl.widths[l].rows < 1 || cl.widths[l].cols < 1)
        fail("classifier.widths entries must be positive");
      if (l + 1 < cl.widths.size() && cl.widths[l].cols != cl.widths[l + 1].rows)
        fail("classifier.widths do not chain at layer " + std::to_string(l));
    }
    if (cl.widths.back().cols != 1) fail("classifier.widths must end in a single output");
    if (cl.widths.front().rows != c.signal.dim)
      fail("classifier.widths input (" + std::to_string(cl.widths.front().rows) +
           ") must equal signal.dim (" + std::to_string(c.signal.dim) + ")");
  }
  if (cl.kind == ClassifierKind::Sgc && cl.layers < 1) fail("classifier.layers must be >= 1");
  if (cl.kind == ClassifierKind::Polynomial && cl.coefficients.empty())
    fail("classifier.coefficients must not be empty");

  if (c.methods.empty()) fail("reconstruction.methods must not be empty");
  if (c.samplers.empty()) fail("sampler.methods must not be empty");
  if (c.random_draws < 1) fail("sampler.random_draws must be >= 1");
  if (c.sweep.step < 1) fail("sweep.step must be >= 1");
  if (c.trials != 0 && c.trials < kMinMonteCarloTrials)
    fail("mc.trials must be 0 or >= " + std::to_string(kMinMonteCarloTrials));
  if (c.threads < 1) fail("run.threads must be >= 1");

  if (g.model != GraphModel::File) validate_for_nodes(c, g.nodes);
}

void validate_for_nodes(const ExperimentConfig& c, Index nodes) {
  const Index k = c.signal.bandwidth.resolve(nodes);
  if (k < 1 || k > nodes)
    throw ValidationError("signal.bandwidth " + c.signal.bandwidth.str() + " resolves to " +
                          std::to_string(k) + ", outside [1, " + std::to_string(nodes) + "]");
  const Index lo = c.sweep.min.resolve(nodes, k);
  const Index hi = c.sweep.max.resolve(nodes, k);
  if (lo < 1 || hi > nodes || lo > hi)
    throw ValidationError("sweep [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] must satisfy 1 <= min <= max <= " + std::to_string(nodes));
}

std::vector<Index> sweep_sizes(const ExperimentConfig& c, Index nodes, Index bandwidth) {
  std::vector<Index> out;
  const Index hi = c.sweep.max.resolve(nodes, bandwidth);
  for (Index s = c.sweep.min.resolve(nodes, bandwidth); s <= hi; s += c.sweep.step)
    out.push_back(s);
  return out;
}

}  // namespace tasksample
