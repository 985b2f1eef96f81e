// enhg: command-line driver for elastic-net hypergraph experiments.
//
//   enhg cluster  --synth blobs:k=3 --k 3 --seed 7 --out run1
//   enhg classify --synth blobs:k=3 --label-fraction 0.3 --out run2
//   enhg sweep    --synth blobs:k=3 --param l2 --grid 0.1:100:7:log --out run3
//
// Exit status: 0 on success, 2 for invalid configuration, 1 for pipeline errors.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "enhg/enhg.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using enhg::Index;

namespace {

/// Invalid configuration; `field` names the offending option.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string f, const std::string& msg) : std::runtime_error(msg), field(std::move(f)) {}
};

/// Reads a flat JSON object as CLI11 config items. Keys may use '_' or '-'.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config", std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config", "top level must be an object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.name = key;
      for (auto& ch : item.name) {
        if (ch == '_') ch = '-';
      }
      if (value.is_string()) {
        item.inputs = {value.get<std::string>()};
      } else if (value.is_boolean()) {
        item.inputs = {value.get<bool>() ? "true" : "false"};
      } else if (value.is_number_integer()) {
        item.inputs = {std::to_string(value.get<long long>())};
      } else if (value.is_number()) {
        item.inputs = {enhg::detail::format_double(value.get<double>())};
      } else {
        throw CLI::ConversionError(key, "config values must be strings, numbers or booleans");
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct RunConfig {
  std::string command;

  std::string csv, idx, idx_labels, synth, labels;
  bool header = false;
  bool no_normalize = false;
  std::string corrupt_mode;
  double corrupt_fraction = 0.25;
  double corrupt_magnitude = 0.1;

  std::optional<double> lambda, gamma, l1, l2;
  std::string threshold_rule = "mean_all";
  std::string baseline = "enhg";

  int k = 0;
  double alpha = 0.99;
  double label_fraction = 0.1;
  std::optional<std::uint64_t> label_seed;
  std::uint64_t seed = 0;
  int restarts = 20;
  bool row_normalize = false;

  std::string param, grid, task = "cluster";
  std::string pred, truth;
  long sample = 0;

  std::string out = "enhg_out";
};

constexpr double kDefaultL1 = 0.1;
constexpr double kDefaultL2 = 20.0;
// Label propagation at alpha near 1 needs a sparser graph than spectral clustering.
constexpr double kClassifyL1 = 0.4;
constexpr double kClassifyL2 = 1.0;
constexpr double kDefaultLambda = 0.01;
constexpr double kDefaultGamma = 0.18;

// ---- configuration -------------------------------------------------------

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ConfigError(field, msg);
}

double parse_number(const std::string& field, std::string_view text) {
  const auto v = enhg::detail::parse_double(text);
  require(v.has_value() && std::isfinite(*v), field, "'" + std::string(text) + "' is not a number");
  return *v;
}

enhg::ElasticNetWeights resolve_weights(const RunConfig& c) {
  const bool direct = c.l1 || c.l2;
  const bool model = c.lambda || c.gamma;
  require(!(direct && model), "lambda", "use either --lambda/--gamma or --l1/--l2, not both");
  if (model) {
    const double lambda = c.lambda.value_or(kDefaultLambda);
    const double gamma = c.gamma.value_or(kDefaultGamma);
    require(gamma > 0.0, "gamma", "must be > 0");
    require(lambda >= 0.0, "lambda", "must be >= 0");
    return enhg::ElasticNetWeights::from_model(lambda, gamma);
  }
  const bool classify = c.command == "classify" || (c.command == "sweep" && c.task == "classify");
  const double l1 = c.l1.value_or(classify ? kClassifyL1 : kDefaultL1);
  const double l2 = c.l2.value_or(classify ? kClassifyL2 : kDefaultL2);
  require(l1 > 0.0, "l1", "must be > 0");
  require(l2 >= 0.0, "l2", "must be >= 0");
  return {l1, l2};
}

void validate(const RunConfig& c) {
  const bool needs_input = c.command != "eval";
  if (needs_input) {
    const int sources = !c.csv.empty() + !c.idx.empty() + !c.synth.empty();
    require(sources == 1, "input", "give exactly one of --csv, --idx, --synth");
  }
  require(c.idx_labels.empty() || !c.idx.empty(), "idx-labels", "requires --idx");
  require(c.labels.empty() || !c.csv.empty(), "labels", "requires --csv");
  require(c.k == 0 || c.k >= 2, "k", "must be >= 2");
  require(c.alpha > 0.0 && c.alpha < 1.0, "alpha", "must lie in (0, 1)");
  require(c.label_fraction > 0.0 && c.label_fraction <= 1.0, "label-fraction", "must lie in (0, 1]");
  require(c.restarts >= 1, "restarts", "must be >= 1");
  require(c.corrupt_fraction >= 0.0 && c.corrupt_fraction <= 1.0, "corrupt-fraction", "must lie in [0, 1]");
  require(c.corrupt_magnitude >= 0.0, "corrupt-magnitude", "must be >= 0");
  if (!c.corrupt_mode.empty()) {
    try {
      enhg::parse_corruption_mode(c.corrupt_mode);
    } catch (const enhg::Error& e) {
      throw ConfigError("corrupt", e.what());
    }
  }
  require(c.baseline == "enhg" || c.baseline == "gauss" || c.baseline == "knn8", "baseline",
          "must be enhg, gauss or knn8");
  try {
    enhg::ThresholdRule::parse(c.threshold_rule);
  } catch (const enhg::Error& e) {
    throw ConfigError("threshold-rule", e.what());
  }
  require(c.task == "cluster" || c.task == "classify", "task", "must be cluster or classify");
  require(!c.out.empty(), "out", "must not be empty");
  resolve_weights(c);
  if (c.command == "eval") {
    require(!c.pred.empty(), "pred", "is required");
    require(!c.truth.empty(), "truth", "is required");
  }
  if (c.command == "sweep") {
    require(!c.param.empty(), "param", "is required");
  }
  require(c.sample >= 0, "sample", "must be >= 0");
}

/// "name:key=value,key=value"
std::pair<std::string, std::map<std::string, double>> parse_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  std::pair<std::string, std::map<std::string, double>> out;
  out.first = spec.substr(0, colon);
  if (colon == std::string::npos) return out;
  for (const auto field : enhg::detail::split_commas(std::string_view(spec).substr(colon + 1))) {
    const auto body = enhg::detail::trim(field);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    require(eq != std::string_view::npos, "synth", "expected key=value, got '" + std::string(body) + "'");
    out.second[std::string(enhg::detail::trim(body.substr(0, eq)))] = parse_number("synth", body.substr(eq + 1));
  }
  return out;
}

struct Grid {
  std::vector<double> values;
  std::string text;
};

/// "start:stop[:count]:log|lin"
Grid parse_grid(const std::string& param, const std::string& text) {
  std::string spec = text;
  if (spec.empty()) {
    if (param == "lambda") spec = "0:1000:11:lin";
    else if (param == "gamma") spec = "0.01:10:10:log";
    else throw ConfigError("grid", "is required for --param " + param);
  }
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  require(parts.size() == 3 || parts.size() == 4, "grid", "expected start:stop[:count]:log|lin");
  const double start = parse_number("grid", parts[0]);
  const double stop = parse_number("grid", parts[1]);
  const double count_d = parts.size() == 4 ? parse_number("grid", parts[2]) : 10.0;
  const std::string& scale = parts.back();
  require(scale == "log" || scale == "lin", "grid", "scale must be log or lin");
  require(count_d >= 1.0 && count_d == std::floor(count_d) && count_d <= 1000, "grid", "count must be in [1, 1000]");
  require(scale == "lin" || (start > 0.0 && stop > 0.0), "grid", "log grids need positive bounds");
  const int count = static_cast<int>(count_d);
  Grid g{{}, spec};
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    if (i == 0 || i == count - 1) {
      g.values.push_back(i == 0 ? start : stop);
      continue;
    }
    g.values.push_back(scale == "lin" ? start + t * (stop - start)
                                      : std::exp(std::log(start) + t * (std::log(stop) - std::log(start))));
  }
  return g;
}

void apply_param(RunConfig& c, const std::string& param, double value) {
  if (param == "lambda") c.lambda = value;
  else if (param == "gamma") c.gamma = value;
  else if (param == "l1") c.l1 = value;
  else if (param == "l2") c.l2 = value;
  else if (param == "alpha") c.alpha = value;
  else if (param == "label-fraction") c.label_fraction = value;
  else throw ConfigError("param", "unknown sweep parameter '" + param + "' (lambda, gamma, l1, l2, alpha, label-fraction)");
}

// ---- input ---------------------------------------------------------------

struct Dataset {
  enhg::SampleMatrix x;
  std::optional<enhg::LabelVector> labels;
  std::string source;
};

Dataset load_input(const RunConfig& c) {
  Dataset d;
  if (!c.csv.empty()) {
    d.x = enhg::load_matrix_csv(c.csv, c.header);
    if (!c.labels.empty()) d.labels = enhg::load_labels_csv(c.labels);
    d.source = "csv:" + c.csv;
  } else if (!c.idx.empty()) {
    auto loaded = enhg::load_idx(c.idx, c.idx_labels.empty() ? std::nullopt : std::optional<std::string>(c.idx_labels));
    d.x = std::move(loaded.first);
    d.labels = std::move(loaded.second);
    d.source = "idx:" + c.idx;
  } else {
    const auto [kind, kv] = parse_spec(c.synth);
    auto get = [&](const std::string& key, double fallback) {
      const auto it = kv.find(key);
      return it == kv.end() ? fallback : it->second;
    };
    const std::vector<std::string> blob_keys = {"k", "d", "n_per", "sep", "sigma"};
    const std::vector<std::string> sub_keys = {"k", "d", "dim", "n_per", "sigma"};
    const auto& allowed = kind == "blobs" ? blob_keys : sub_keys;
    require(kind == "blobs" || kind == "subspaces", "synth", "unknown generator '" + kind + "' (blobs, subspaces)");
    for (const auto& [key, value] : kv) {
      require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(), "synth",
              "unknown key '" + key + "' for " + kind);
    }
    const int k = static_cast<int>(get("k", 3));
    const int dim = static_cast<int>(get("d", 20));
    const int n_per = static_cast<int>(get("n_per", 30));
    std::pair<enhg::SampleMatrix, enhg::LabelVector> s;
    try {
      if (kind == "blobs") {
        const double sigma = get("sigma", 1.0);
        s = enhg::synth_blobs(k, dim, n_per, get("sep", 10.0 * sigma), sigma, c.seed);
      } else {
        s = enhg::synth_subspaces(k, dim, static_cast<int>(get("dim", 3)), n_per, get("sigma", 0.05), c.seed);
      }
    } catch (const enhg::InvalidArgument& e) {
      throw ConfigError("synth", e.what());
    }
    d.x = std::move(s.first);
    d.labels = std::move(s.second);
    d.source = "synth:" + c.synth;
  }
  if (d.labels && d.labels->size() != static_cast<std::size_t>(d.x.count())) {
    throw enhg::IoError("label count " + std::to_string(d.labels->size()) + " does not match sample count " +
                        std::to_string(d.x.count()));
  }
  return d;
}

/// Normalizes (unless disabled) and applies the requested corruption.
enhg::SampleMatrix prepare(const RunConfig& c, const enhg::SampleMatrix& raw) {
  enhg::SampleMatrix x = c.no_normalize ? raw : enhg::normalize_columns(raw);
  if (!c.corrupt_mode.empty() && c.corrupt_fraction > 0.0) {
    x = enhg::corrupt(x, enhg::parse_corruption_mode(c.corrupt_mode), c.corrupt_fraction, c.corrupt_magnitude,
                      c.seed);
  }
  return x;
}

// ---- pipeline ------------------------------------------------------------

struct GraphRun {
  enhg::Hypergraph graph;
  std::optional<enhg::EnhgModel> model;
};

GraphRun make_graph(const RunConfig& c, const enhg::SampleMatrix& x, unsigned threads) {
  GraphRun run;
  if (c.baseline == "enhg") {
    enhg::EnhgOptions opts;
    opts.threshold = enhg::ThresholdRule::parse(c.threshold_rule);
    opts.normalize = !c.no_normalize;
    opts.solver.threads = threads;
    run.model = enhg::build_enhg(x, resolve_weights(c), opts);
    run.graph = run.model->graph;
  } else {
    const enhg::SampleMatrix xn = c.no_normalize ? x : enhg::normalize_columns(x);
    run.graph = c.baseline == "gauss" ? enhg::gaussian_graph(xn) : enhg::knn_hypergraph(xn, 8);
  }
  return run;
}

struct TaskResult {
  std::vector<json> metrics;
  std::vector<int> output;  // assignments or predictions
  std::vector<bool> labeled;
};

int resolve_k(const RunConfig& c, const Dataset& d) {
  if (c.k) return c.k;
  require(d.labels.has_value(), "k", "is required when the input has no labels");
  return d.labels->num_classes();
}

TaskResult cluster_task(const RunConfig& c, const Dataset& d, const enhg::Hypergraph& g, unsigned threads) {
  enhg::SpectralClusteringOptions opts;
  opts.kmeans.seed = c.seed;
  opts.kmeans.restarts = c.restarts;
  opts.kmeans.threads = threads;
  opts.row_normalize = c.row_normalize;
  const auto r = enhg::spectral_clustering(g, resolve_k(c, d), opts);
  TaskResult out;
  out.output = r.assignments;
  const std::size_t n = r.assignments.size();
  if (d.labels && d.labels->fully_known()) {
    const enhg::LabelVector pred(r.assignments);
    out.metrics.push_back(enhg::metric_record("ac", enhg::clustering_accuracy(pred, *d.labels), n, c.seed));
    out.metrics.push_back(enhg::metric_record("nmi", enhg::nmi(pred, *d.labels), n, c.seed));
  }
  return out;
}

TaskResult classify_task(const RunConfig& c, const Dataset& d, const enhg::Hypergraph& g) {
  require(d.labels.has_value() && d.labels->fully_known(), "labels", "classify needs fully labeled input");
  const auto mask = enhg::stratified_label_mask(*d.labels, c.label_fraction, c.label_seed.value_or(c.seed));
  const auto f = enhg::propagate_labels(g, enhg::label_matrix(mask, d.labels->num_classes()), c.alpha);
  auto pred = enhg::predict_labels(f);
  std::vector<bool> eval(mask.known.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    eval[i] = !mask.known[i];
    if (mask.known[i]) pred.labels[i] = mask.labels[i];
  }
  TaskResult out;
  out.output = pred.labels;
  out.labeled = mask.known;
  const std::size_t unlabeled = static_cast<std::size_t>(std::count(eval.begin(), eval.end(), true));
  if (unlabeled > 0) {
    out.metrics.push_back(enhg::metric_record("accuracy", enhg::classification_accuracy(pred, *d.labels, eval),
                                              unlabeled, c.seed));
  }
  return out;
}

// ---- output --------------------------------------------------------------

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw enhg::IoError("cannot create output directory " + dir + ": " + ec.message());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw enhg::IoError("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return f;
  }

  void matrix(const std::string& name, const Eigen::MatrixXd& m) {
    auto f = open(name);
    enhg::write_matrix_csv(f, m);
  }

  void json_file(const std::string& name, const json& doc) {
    auto f = open(name);
    f << doc.dump(2) << '\n';
  }

  void append_ledger(const std::string& command, const std::vector<json>& metrics) {
    const fs::path p = dir_ / "ledger.csv";
    const bool fresh = !fs::exists(p);
    std::ofstream f(p, std::ios::binary | std::ios::app);
    if (!f) throw enhg::IoError("cannot write " + p.string());
    if (fresh) f << "command,metric,value,n,seed\n";
    for (const auto& m : metrics) {
      f << command << ',' << m["metric"].get<std::string>() << ','
        << enhg::detail::format_double(m["value"].get<double>()) << ',' << m["n"].get<std::size_t>() << ','
        << m["seed"].get<std::uint64_t>() << '\n';
    }
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

json params_json(const RunConfig& c, const std::string& source) {
  json p;
  p["source"] = source;
  p["normalize"] = !c.no_normalize;
  if (!c.corrupt_mode.empty()) {
    p["corrupt"] = c.corrupt_mode;
    p["corrupt_fraction"] = c.corrupt_fraction;
    p["corrupt_magnitude"] = c.corrupt_magnitude;
  }
  p["baseline"] = c.baseline;
  if (c.baseline == "enhg") {
    const auto w = resolve_weights(c);
    if (c.lambda || c.gamma) {
      p["lambda"] = c.lambda.value_or(kDefaultLambda);
      p["gamma"] = c.gamma.value_or(kDefaultGamma);
    }
    p["l1"] = w.l1;
    p["l2"] = w.l2;
    p["threshold_rule"] = c.threshold_rule;
  }
  p["k"] = c.k;
  p["alpha"] = c.alpha;
  p["label_fraction"] = c.label_fraction;
  if (c.label_seed) p["label_seed"] = *c.label_seed;
  p["restarts"] = c.restarts;
  p["row_normalize"] = c.row_normalize;
  return p;
}

void write_model(OutputDir& out, const enhg::EnhgModel& model, bool full) {
  const auto& rep = model.representation;
  out.matrix("Z.csv", rep.z.values());
  if (full) out.matrix("Z_abs.csv", rep.z.values().cwiseAbs());
  out.matrix("S.csv", rep.error);
  if (full) out.matrix("X0.csv", rep.clean);
}

double worst_kkt(const enhg::EnhgModel& model) {
  double worst = 0.0;
  for (const auto& k : model.representation.kkt) worst = std::max(worst, k.max_violation);
  return worst;
}

std::vector<json> graph_metrics(const enhg::Hypergraph& g, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(g.vertex_count());
  double sizes = 0.0;
  for (const auto& e : g.edges()) {
    if (e.kept) sizes += static_cast<double>(e.members.size());
  }
  const double kept = static_cast<double>(g.kept_count());
  return {enhg::metric_record("kept_hyperedges", kept, n, seed),
          enhg::metric_record("mean_hyperedge_size", kept > 0 ? sizes / kept : 0.0, n, seed)};
}

/// Reads one label per row from the last comma-separated field; a
/// non-numeric first row is treated as a header.
enhg::LabelVector read_label_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw enhg::IoError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto body = enhg::detail::trim(line);
    if (body.empty()) continue;
    const auto fields = enhg::detail::split_commas(body);
    const auto v = enhg::detail::parse_double(fields.back());
    if (!v || *v != std::floor(*v)) {
      if (row == 1) continue;
      throw enhg::IoError(path + ": invalid label at row " + std::to_string(row));
    }
    labels.push_back(static_cast<int>(*v));
  }
  if (labels.empty()) throw enhg::IoError(path + ": no data rows");
  return enhg::LabelVector(std::move(labels));
}

// ---- commands ------------------------------------------------------------

struct Outcome {
  json extra = json::object();
  std::vector<json> metrics;
};

Outcome run_pipeline(const RunConfig& c, OutputDir& out, unsigned threads, const std::string& task) {
  const Dataset d = load_input(c);
  const auto x = prepare(c, d.x);
  const auto run = make_graph(c, x, threads);
  Outcome o;
  if (run.model) {
    write_model(out, *run.model, true);
    o.extra["kkt_max_violation"] = worst_kkt(*run.model);
  }
  out.json_file("hypergraph.json", enhg::to_json(run.graph));
  const auto result = task == "cluster" ? cluster_task(c, d, run.graph, threads) : classify_task(c, d, run.graph);
  auto f = out.open(task == "cluster" ? "assignments.csv" : "predictions.csv");
  if (task == "cluster") {
    enhg::write_labels_csv(f, "cluster", result.output);
  } else {
    f << "index,label,labeled\n";
    for (std::size_t i = 0; i < result.output.size(); ++i) {
      f << i << ',' << result.output[i] << ',' << (result.labeled[i] ? 1 : 0) << '\n';
    }
  }
  o.metrics = result.metrics;
  o.extra["n"] = d.x.count();
  o.extra["d"] = d.x.dim();
  return o;
}

Outcome run_sweep(const RunConfig& c, OutputDir& out, unsigned threads) {
  const Grid grid = parse_grid(c.param, c.grid);
  RunConfig probe = c;
  apply_param(probe, c.param, grid.values.front());
  validate(probe);

  const Dataset d = load_input(c);
  const auto x = prepare(c, d.x);
  Outcome o;
  json points = json::array();
  auto csv = out.open("sweep.csv");
  const bool cluster = c.task == "cluster";
  csv << "param,value,status," << (cluster ? "ac,nmi" : "accuracy") << '\n';
  for (const double value : grid.values) {
    RunConfig point = c;
    apply_param(point, c.param, value);
    json entry{{"value", value}};
    try {
      validate(point);
      const auto run = make_graph(point, x, threads);
      const auto result = cluster ? cluster_task(point, d, run.graph, threads) : classify_task(point, d, run.graph);
      entry["status"] = "ok";
      entry["metrics"] = result.metrics;
      csv << c.param << ',' << enhg::detail::format_double(value) << ",ok";
      for (const auto& m : result.metrics) csv << ',' << enhg::detail::format_double(m["value"].get<double>());
      csv << '\n';
      for (auto m : result.metrics) {
        m["metric"] = m["metric"].get<std::string>() + "@" + c.param + "=" + enhg::detail::format_double(value);
        o.metrics.push_back(m);
      }
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
      csv << c.param << ',' << enhg::detail::format_double(value) << ",failed," << (cluster ? "," : "") << '\n';
    }
    points.push_back(entry);
  }
  o.extra["param"] = c.param;
  o.extra["grid"] = grid.text;
  o.extra["task"] = c.task;
  o.extra["points"] = points;
  o.extra["n"] = d.x.count();
  return o;
}

Outcome run_solve(const RunConfig& c, OutputDir& out, unsigned threads) {
  const Dataset d = load_input(c);
  const auto x = prepare(c, d.x);
  enhg::RmenOptions opts;
  opts.threads = threads;
  const enhg::SampleMatrix xs = c.no_normalize ? x : enhg::normalize_columns(x);
  const auto rep = enhg::robust_matrix_elastic_net(xs, resolve_weights(c), opts);
  out.matrix("Z.csv", rep.z.values());
  out.matrix("Z_abs.csv", rep.z.values().cwiseAbs());
  out.matrix("S.csv", rep.error);
  out.matrix("X0.csv", rep.clean);
  Outcome o;
  double worst = 0.0;
  for (const auto& k : rep.kkt) worst = std::max(worst, k.max_violation);
  const auto n = static_cast<std::size_t>(xs.count());
  o.metrics.push_back(enhg::metric_record("kkt_max_violation", worst, n, c.seed));
  o.metrics.push_back(enhg::metric_record("nonzero_coefficients",
                                          static_cast<double>((rep.z.values().array() != 0.0).count()), n, c.seed));
  o.extra["n"] = xs.count();
  return o;
}

Outcome run_build(const RunConfig& c, OutputDir& out, unsigned threads) {
  const Dataset d = load_input(c);
  const auto x = prepare(c, d.x);
  const auto run = make_graph(c, x, threads);
  if (run.model) write_model(out, *run.model, false);
  out.json_file("hypergraph.json", enhg::to_json(run.graph));
  Outcome o;
  o.metrics = graph_metrics(run.graph, c.seed);
  o.extra["n"] = d.x.count();
  return o;
}

Outcome run_eval(const RunConfig& c) {
  const auto pred = read_label_column(c.pred);
  const auto truth = read_label_column(c.truth);
  Outcome o;
  o.metrics.push_back(enhg::metric_record("ac", enhg::clustering_accuracy(pred, truth), pred.size(), c.seed));
  o.metrics.push_back(enhg::metric_record("nmi", enhg::nmi(pred, truth), pred.size(), c.seed));
  o.extra["n"] = pred.size();
  return o;
}

Outcome run_export_path(const RunConfig& c, OutputDir& out) {
  const Dataset d = load_input(c);
  const auto x = prepare(c, d.x);
  const enhg::SampleMatrix xs = c.no_normalize ? x : enhg::normalize_columns(x);
  require(c.sample < xs.count(), "sample", "must be < sample count " + std::to_string(xs.count()));
  const auto atoms = enhg::detail::dictionary_without(xs.count(), c.sample);
  Eigen::MatrixXd b(xs.dim(), xs.count() - 1);
  for (Index p = 0; p < b.cols(); ++p) b.col(p) = xs.sample(atoms[static_cast<std::size_t>(p)]);
  const auto weights = resolve_weights(c);
  const auto path = enhg::lars_en_path(b, xs.sample(c.sample), weights.l2, enhg::StopRule::full_path());
  auto f = out.open("path.csv");
  enhg::write_path_csv(f, path, atoms);
  Outcome o;
  o.extra["sample"] = c.sample;
  o.extra["knots"] = path.knots.size();
  o.extra["skipped_atoms"] = path.skipped.size();
  return o;
}

int execute(const RunConfig& c) {
  const auto started = std::chrono::steady_clock::now();
  const unsigned threads = enhg::default_thread_count();
  OutputDir out(c.out);
  Outcome o;
  if (c.command == "cluster" || c.command == "classify") o = run_pipeline(c, out, threads, c.command);
  else if (c.command == "sweep") o = run_sweep(c, out, threads);
  else if (c.command == "solve") o = run_solve(c, out, threads);
  else if (c.command == "build") o = run_build(c, out, threads);
  else if (c.command == "eval") o = run_eval(c);
  else o = run_export_path(c, out);

  json results;
  results["schema"] = 1;
  results["command"] = c.command;
  results["seed"] = c.seed;
  results["params"] = params_json(c, c.command == "eval" ? "labels:" + c.pred + "," + c.truth
                                                         : (!c.csv.empty() ? "csv:" + c.csv
                                                            : !c.idx.empty() ? "idx:" + c.idx
                                                                             : "synth:" + c.synth));
  results["metrics"] = o.metrics;
  for (auto& [key, value] : o.extra.items()) results[key] = value;
  auto files = out.files();
  files.push_back("results.json");
  results["outputs"] = files;
  results["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.json_file("results.json", results);
  out.append_ledger(c.command, o.metrics);

  for (const auto& m : o.metrics) {
    std::cout << m["metric"].get<std::string>() << " = " << enhg::detail::format_double(m["value"].get<double>())
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic-net hypergraph clustering and label propagation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file of option values; flags override it");

  RunConfig c;
  app.add_option("--csv", c.csv, "CSV matrix, one feature per row and one sample per column");
  app.add_flag("--header", c.header, "CSV has a header row");
  app.add_option("--idx", c.idx, "IDX image file");
  app.add_option("--idx-labels", c.idx_labels, "IDX label file");
  app.add_option("--synth", c.synth, "blobs:k=3,d=20,n_per=30,sep=10,sigma=1 or subspaces:k=3,d=20,dim=3,n_per=30,sigma=0.05");
  app.add_option("--labels", c.labels, "label CSV for --csv input");
  app.add_flag("--no-normalize", c.no_normalize, "skip column centering and unit scaling");
  app.add_option("--corrupt", c.corrupt_mode, "gaussian_columns | sparse_entries | block_missing");
  app.add_option("--corrupt-fraction", c.corrupt_fraction, "fraction of columns (or entries) corrupted");
  app.add_option("--corrupt-magnitude", c.corrupt_magnitude, "noise variance or replacement magnitude");
  app.add_option("--lambda", c.lambda, "model weight on ||Z||_F^2 (mapped: l2 = lambda/gamma)");
  app.add_option("--gamma", c.gamma, "model weight on the residual (mapped: l1 = 1/gamma)");
  app.add_option("--l1", c.l1, "l1 weight (default 0.1, classify 0.4)");
  app.add_option("--l2", c.l2, "l2 weight (default 20, classify 1)");
  app.add_option("--threshold-rule", c.threshold_rule, "mean_all | mean_nonzero | fixed:<v>");
  app.add_option("--baseline", c.baseline, "graph construction: enhg | gauss | knn8");
  app.add_option("--k", c.k, "number of clusters (default: number of classes)");
  app.add_option("--alpha", c.alpha, "propagation weight in (0, 1)");
  app.add_option("--label-fraction", c.label_fraction, "fraction of labeled samples per class");
  app.add_option("--label-seed", c.label_seed, "seed of the label draw (default: --seed)");
  app.add_option("--seed", c.seed, "seed for data generation, corruption and k-means");
  app.add_option("--restarts", c.restarts, "k-means restarts");
  app.add_flag("--row-normalize", c.row_normalize, "unit-normalize embedding rows before k-means");
  app.add_option("--param", c.param, "sweep parameter: lambda, gamma, l1, l2, alpha, label-fraction");
  app.add_option("--grid", c.grid, "sweep grid start:stop[:count]:log|lin");
  app.add_option("--task", c.task, "sweep task: cluster | classify");
  app.add_option("--pred", c.pred, "predicted labels CSV (eval)");
  app.add_option("--truth", c.truth, "true labels CSV (eval)");
  app.add_option("--sample", c.sample, "sample whose path is exported (export-path)");
  app.add_option("--out", c.out, "output directory");

  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"cluster", "spectral clustering on the hypergraph"},
           {"classify", "semi-supervised label propagation"},
           {"sweep", "repeat cluster/classify over a parameter grid"},
           {"solve", "robust matrix elastic net only (Z, S, X0)"},
           {"build", "construct and export the hypergraph"},
           {"eval", "AC and NMI of a prediction file"},
           {"export-path", "coefficient path of one sample"}}) {
    app.add_subcommand(name, help)->callback([&c, n = name] { c.command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    validate(c);
    return execute(c);
  } catch (const ConfigError& e) {
    std::cerr << "error: --" << e.field << ": " << e.what() << '\n';
    return 2;
  } catch (const enhg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
