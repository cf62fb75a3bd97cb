#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pronog/encoder.hpp"
#include "pronog/error.hpp"
#include "pronog/fewshot.hpp"
#include "pronog/graph.hpp"
#include "pronog/graph_io.hpp"
#include "pronog/pretrain.hpp"
#include "pronog/prompt.hpp"

namespace pronog {

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string dataset;
  InstanceKind task = InstanceKind::node;
  PretrainTaskKind pretrain_task = PretrainTaskKind::graphcl;
  std::size_t k = 5;
  std::size_t q = 10;  // per-class queries, clipped to availability per task
  std::size_t num_tasks = 100;
  std::size_t seeds = 5;
  std::size_t encoder_hidden = 64;
  std::size_t encoder_layers = 2;
  std::size_t condnet_hidden = 64;
  std::size_t delta = 2;
  double tau = 0.5;
  double lr = 1e-3;
  std::size_t pretrain_epochs = 2000;
  std::size_t pretrain_patience = 50;
  std::size_t tune_epochs = 2000;
  std::size_t tune_patience = 50;
  double edge_drop_ratio = 0.2;
  std::size_t pretrain_negatives = 1;
  std::size_t pretrain_delta = 1;  // ego radius for graphcl on a single graph
  PromptVariant variant = PromptVariant::pronog;
  std::uint64_t seed = 39;
  std::string encoder_in;   // optional: load instead of pre-training
  std::string encoder_out;  // optional: checkpoint target for `pretrain`
  std::string condnet_out;  // optional: checkpoint target for `tune`
  std::string output = "results.csv";
  std::string format = "csv";
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::size_t parse_count(const std::string& key, const std::string& val) {
  std::size_t out = 0;
  if (!parse_size(val, out)) throw config_error("config key '" + key + "': expected a count");
  return out;
}

inline double parse_double(const std::string& key, const std::string& val) {
  double out = 0.0;
  if (!parse_real(val, out) || !std::isfinite(out))
    throw config_error("config key '" + key + "': expected a number");
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = detail::trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw config_error(source + ":" + std::to_string(lineno) +
                         ": expected 'key = value', got '" + content + "'");
    const std::string key = detail::trim(content.substr(0, eq));
    const std::string val = detail::trim(content.substr(eq + 1));
    if (key.empty() || val.empty())
      throw config_error(source + ":" + std::to_string(lineno) + ": empty key or value");

    if (key == "dataset") {
      cfg.dataset = val;
    } else if (key == "task") {
      if (val == "node") {
        cfg.task = InstanceKind::node;
      } else if (val == "graph") {
        cfg.task = InstanceKind::graph;
      } else {
        throw config_error("config key 'task': expected node or graph, got '" + val + "'");
      }
    } else if (key == "pretrain_task") {
      if (val == "link_prediction") {
        cfg.pretrain_task = PretrainTaskKind::link_prediction;
      } else if (val == "graphcl") {
        cfg.pretrain_task = PretrainTaskKind::graphcl;
      } else if (val == "dgi") {
        cfg.pretrain_task = PretrainTaskKind::dgi;
      } else {
        throw config_error("config key 'pretrain_task': unknown task '" + val + "'");
      }
    } else if (key == "k") {
      cfg.k = detail::parse_count(key, val);
    } else if (key == "q") {
      cfg.q = detail::parse_count(key, val);
    } else if (key == "num_tasks") {
      cfg.num_tasks = detail::parse_count(key, val);
    } else if (key == "seeds") {
      cfg.seeds = detail::parse_count(key, val);
    } else if (key == "encoder_hidden") {
      cfg.encoder_hidden = detail::parse_count(key, val);
    } else if (key == "encoder_layers") {
      cfg.encoder_layers = detail::parse_count(key, val);
    } else if (key == "condnet_hidden") {
      cfg.condnet_hidden = detail::parse_count(key, val);
    } else if (key == "delta") {
      cfg.delta = detail::parse_count(key, val);
    } else if (key == "tau") {
      cfg.tau = detail::parse_double(key, val);
    } else if (key == "lr") {
      cfg.lr = detail::parse_double(key, val);
    } else if (key == "pretrain_epochs") {
      cfg.pretrain_epochs = detail::parse_count(key, val);
    } else if (key == "pretrain_patience") {
      cfg.pretrain_patience = detail::parse_count(key, val);
    } else if (key == "tune_epochs") {
      cfg.tune_epochs = detail::parse_count(key, val);
    } else if (key == "tune_patience") {
      cfg.tune_patience = detail::parse_count(key, val);
    } else if (key == "edge_drop_ratio") {
      cfg.edge_drop_ratio = detail::parse_double(key, val);
    } else if (key == "pretrain_negatives") {
      cfg.pretrain_negatives = detail::parse_count(key, val);
    } else if (key == "pretrain_delta") {
      cfg.pretrain_delta = detail::parse_count(key, val);
    } else if (key == "variant") {
      cfg.variant = parse_variant(val);
    } else if (key == "seed") {
      cfg.seed = detail::parse_count(key, val);
    } else if (key == "encoder_in") {
      cfg.encoder_in = val;
    } else if (key == "encoder_out") {
      cfg.encoder_out = val;
    } else if (key == "condnet_out") {
      cfg.condnet_out = val;
    } else if (key == "output") {
      cfg.output = val;
    } else if (key == "format") {
      if (val != "csv" && val != "json")
        throw config_error("config key 'format': expected csv or json");
      cfg.format = val;
    } else {
      throw config_error(source + ":" + std::to_string(lineno) + ": unknown config key '" + key +
                         "'");
    }
  }

  if (cfg.k == 0 || cfg.q == 0 || cfg.num_tasks == 0 || cfg.seeds == 0)
    throw config_error("config: k, q, num_tasks and seeds must be positive");
  if (cfg.encoder_hidden == 0 || cfg.encoder_layers == 0 || cfg.condnet_hidden == 0)
    throw config_error("config: encoder and condition-net dims must be positive");
  if (cfg.tau <= 0.0) throw config_error("config: tau must be positive");
  if (cfg.lr <= 0.0) throw config_error("config: lr must be positive");
  if (cfg.pretrain_epochs == 0 || cfg.tune_epochs == 0)
    throw config_error("config: epoch counts must be positive");
  if (cfg.edge_drop_ratio < 0.0 || cfg.edge_drop_ratio >= 1.0)
    throw config_error("config: edge_drop_ratio must lie in [0,1)");
  if (cfg.pretrain_negatives == 0)
    throw config_error("config: pretrain_negatives must be positive");
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  return parse_config(in, path);
}

// ---------------------------------------------------------------------------
// Parameter counting

struct ParameterCount {
  std::size_t with_bias = 0;
  std::size_t without_bias = 0;
};

inline ParameterCount count_tunable_parameters(PromptVariant variant, std::size_t d,
                                               std::size_t m) {
  switch (variant) {
    case PromptVariant::no_prompt: return {0, 0};
    case PromptVariant::single_prompt: return {d, d};
    default: return {d * m + m + m * d + d, 2 * d * m};
  }
}

// ---------------------------------------------------------------------------
// Reports

struct RunRecord {
  std::size_t task_index = 0;
  std::size_t seed_index = 0;
  double accuracy = 0.0;  // fraction in [0,1]
};

struct BucketAccuracy {
  int bucket = 0;
  std::size_t queries = 0;
  std::size_t correct = 0;
};

struct QueryOutcome {
  std::size_t instance = 0;
  bool correct = false;
};

struct EvalReport {
  std::string variant = "pronog";
  std::size_t num_tasks = 0;
  std::size_t seeds = 0;
  std::vector<RunRecord> runs;  // sorted by (task, seed)
  double mean_percent = 0.0;
  double std_percent = 0.0;  // population standard deviation
  std::vector<BucketAccuracy> buckets;
  std::size_t tunable_with_bias = 0;
  std::size_t tunable_without_bias = 0;
  double pretrain_seconds = 0.0;
  double tune_seconds = 0.0;
  double eval_seconds = 0.0;
};

// Aggregates query outcomes by the query node's homophily bucket. Buckets
// that received no queries are omitted from the table.
inline std::vector<BucketAccuracy> bucket_accuracy(const std::vector<QueryOutcome>& outcomes,
                                                   const Graph& g,
                                                   const std::vector<int>& labels,
                                                   InstanceKind kind) {
  if (kind != InstanceKind::node) throw data_error("bucket analysis requires node task");
  const std::vector<int> buckets = homophily_buckets(g, labels);
  std::map<int, BucketAccuracy> agg;
  for (const auto& o : outcomes) {
    if (o.instance >= buckets.size()) throw data_error("bucket_accuracy: query out of range");
    const int b = buckets[o.instance];
    if (b == kIsolatedBucket) continue;
    auto& entry = agg[b];
    entry.bucket = b;
    entry.queries += 1;
    entry.correct += o.correct ? 1 : 0;
  }
  std::vector<BucketAccuracy> out;
  for (const auto& [b, entry] : agg) out.push_back(entry);
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineContext {
  ExperimentConfig cfg;
  InstanceKind kind = InstanceKind::node;
  Graph graph;                 // node tasks
  GraphCollection collection;  // graph tasks
  GcnEncoder encoder;          // frozen after preparation
  std::string encoder_digest;
  Matrix node_embeddings;
  std::vector<Matrix> graph_embeddings;
  std::vector<int> instance_labels;
  std::vector<int> classes;
  std::size_t embed_dim = 0;
  std::size_t q_effective = 0;
  double pretrain_seconds = 0.0;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void finish_context(PipelineContext& ctx, std::size_t feature_dim) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::size_t> dims{feature_dim};
  for (std::size_t l = 0; l < ctx.cfg.encoder_layers; ++l)
    dims.push_back(ctx.cfg.encoder_hidden);

  if (!ctx.cfg.encoder_in.empty()) {
    ctx.encoder = load_encoder(ctx.cfg.encoder_in);
    if (ctx.encoder.input_dim() != feature_dim)
      throw data_error("encoder checkpoint input dim does not match dataset features");
  } else {
    ctx.encoder = GcnEncoder(dims, derive_seed(ctx.cfg.seed, 0));
    PretrainConfig pcfg;
    pcfg.task = ctx.cfg.pretrain_task;
    pcfg.epochs = ctx.cfg.pretrain_epochs;
    pcfg.patience = ctx.cfg.pretrain_patience;
    pcfg.adam.lr = ctx.cfg.lr;
    pcfg.tau = ctx.cfg.tau;
    pcfg.edge_drop_ratio = ctx.cfg.edge_drop_ratio;
    pcfg.negatives_per_anchor = ctx.cfg.pretrain_negatives;
    pcfg.ego_delta = ctx.cfg.pretrain_delta;
    pcfg.seed = ctx.cfg.seed;
    if (ctx.graph.num_nodes > 0) {
      pretrain(ctx.encoder, ctx.graph, pcfg);
    } else {
      pretrain(ctx.encoder, ctx.collection, pcfg);
    }
  }
  freeze(ctx.encoder);
  ctx.encoder_digest = parameter_digest(ctx.encoder);
  ctx.pretrain_seconds = seconds_since(t0);

  if (ctx.kind == InstanceKind::node) {
    ctx.node_embeddings = encode(ctx.encoder, ctx.graph);
    ctx.embed_dim = ctx.node_embeddings.cols;
    ctx.instance_labels = ctx.graph.labels;
  } else {
    for (const auto& g : ctx.collection.graphs)
      ctx.graph_embeddings.push_back(encode(ctx.encoder, g));
    ctx.embed_dim = ctx.graph_embeddings.front().cols;
    ctx.instance_labels = ctx.collection.graph_labels;
  }
  if (ctx.instance_labels.empty()) throw data_error("evaluation requires labeled instances");

  std::map<int, std::size_t> counts;
  for (int y : ctx.instance_labels) counts[y] += 1;
  std::size_t min_count = std::numeric_limits<std::size_t>::max();
  for (const auto& [cls, cnt] : counts) {
    ctx.classes.push_back(cls);
    min_count = std::min(min_count, cnt);
  }
  if (min_count < ctx.cfg.k + 1)
    throw data_error("every class needs at least k+1 labeled instances, smallest has " +
                     std::to_string(min_count));
  ctx.q_effective = std::min(ctx.cfg.q, min_count - ctx.cfg.k);
}

}  // namespace detail

// Builds the context for a node-classification run on a single graph, or a
// graph-classification run over its ego-network dataset.
inline PipelineContext prepare_pipeline(const ExperimentConfig& cfg, const Graph& g) {
  PipelineContext ctx;
  ctx.cfg = cfg;
  ctx.kind = cfg.task;
  if (!g.has_labels()) throw data_error("dataset graph has no labels");
  ctx.graph = g;
  if (cfg.task == InstanceKind::graph) ctx.collection = build_ego_dataset(g, cfg.delta);
  detail::finish_context(ctx, g.features.cols);
  return ctx;
}

inline PipelineContext prepare_pipeline(const ExperimentConfig& cfg,
                                        const GraphCollection& col) {
  if (cfg.task != InstanceKind::graph)
    throw config_error("node-classification task requires a single graph dataset");
  if (col.graphs.empty()) throw data_error("empty graph collection");
  PipelineContext ctx;
  ctx.cfg = cfg;
  ctx.kind = InstanceKind::graph;
  ctx.collection = col;
  detail::finish_context(ctx, col.graphs.front().features.cols);
  return ctx;
}

inline PipelineContext prepare_pipeline(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) throw config_error("config: dataset path is required");
  if (std::filesystem::is_directory(cfg.dataset))
    return prepare_pipeline(cfg, load_collection(cfg.dataset));
  return prepare_pipeline(cfg, load_graph(cfg.dataset));
}

struct RunOutput {
  RunRecord record;
  std::vector<QueryOutcome> outcomes;
  double tune_seconds = 0.0;
  double eval_seconds = 0.0;
};

// One downstream episode: sample the task, tune the prompt side against the
// frozen encoder, classify the queries. Pure in (ctx, task_index, seed_index),
// so tasks may run in any order.
inline RunOutput run_single_task(const PipelineContext& ctx, std::size_t task_index,
                                 std::size_t seed_index) {
  const ExperimentConfig& cfg = ctx.cfg;
  const FewShotTask task =
      sample_kshot_task(ctx.instance_labels, cfg.k, ctx.q_effective,
                        derive_seed(cfg.seed, seed_stream::fewshot_task, task_index), ctx.kind);
  const std::uint64_t run_seed =
      derive_seed(cfg.seed, seed_stream::run, task_index * 100003ull + seed_index);

  PromptModel model(cfg.variant, ctx.embed_dim, cfg.condnet_hidden, run_seed);
  TuneConfig tcfg;
  tcfg.delta = cfg.delta;
  tcfg.tau = cfg.tau;
  tcfg.epochs = cfg.tune_epochs;
  tcfg.patience = cfg.tune_patience;
  tcfg.adam.lr = cfg.lr;
  tcfg.seed = run_seed;

  auto build = [&](const std::vector<std::pair<std::size_t, int>>& instances) {
    return ctx.kind == InstanceKind::node
               ? build_node_instance_inputs(ctx.graph, ctx.node_embeddings, instances, cfg.delta,
                                            cfg.variant)
               : build_graph_instance_inputs(ctx.collection, ctx.graph_embeddings, instances,
                                             cfg.delta, cfg.variant);
  };

  RunOutput out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto supports = build(task.support);
  tune_on_inputs(model, supports, task.classes, tcfg);
  out.tune_seconds = detail::seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::vector<double>, int>> support_emb;
  for (const auto& in : supports) support_emb.emplace_back(instance_embedding(model, in), in.label);
  const Prototypes protos = class_prototypes(support_emb, task.classes);

  const auto queries = build(task.query);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const int predicted = predict(instance_embedding(model, queries[i]), protos);
    const bool ok = predicted == queries[i].label;
    correct += ok ? 1 : 0;
    out.outcomes.push_back({task.query[i].first, ok});
  }
  out.eval_seconds = detail::seconds_since(t1);

  out.record.task_index = task_index;
  out.record.seed_index = seed_index;
  out.record.accuracy =
      queries.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(queries.size());
  return out;
}

inline EvalReport aggregate_report(const PipelineContext& ctx, std::vector<RunOutput> outputs) {
  std::sort(outputs.begin(), outputs.end(), [](const RunOutput& a, const RunOutput& b) {
    return std::pair(a.record.task_index, a.record.seed_index) <
           std::pair(b.record.task_index, b.record.seed_index);
  });

  EvalReport report;
  report.variant = to_string(ctx.cfg.variant);
  report.num_tasks = ctx.cfg.num_tasks;
  report.seeds = ctx.cfg.seeds;
  report.pretrain_seconds = ctx.pretrain_seconds;

  std::vector<QueryOutcome> all_outcomes;
  double sum = 0.0;
  for (const auto& o : outputs) {
    report.runs.push_back(o.record);
    report.tune_seconds += o.tune_seconds;
    report.eval_seconds += o.eval_seconds;
    sum += o.record.accuracy;
    all_outcomes.insert(all_outcomes.end(), o.outcomes.begin(), o.outcomes.end());
  }
  const double n = static_cast<double>(report.runs.size());
  const double mean = report.runs.empty() ? 0.0 : sum / n;
  double sq = 0.0;
  for (const auto& r : report.runs) sq += (r.accuracy - mean) * (r.accuracy - mean);
  report.mean_percent = 100.0 * mean;
  report.std_percent = report.runs.empty() ? 0.0 : 100.0 * std::sqrt(sq / n);

  if (ctx.kind == InstanceKind::node)
    report.buckets = bucket_accuracy(all_outcomes, ctx.graph, ctx.graph.labels, ctx.kind);

  const ParameterCount pc =
      count_tunable_parameters(ctx.cfg.variant, ctx.embed_dim, ctx.cfg.condnet_hidden);
  report.tunable_with_bias = pc.with_bias;
  report.tunable_without_bias = pc.without_bias;
  return report;
}

inline EvalReport run_pipeline(const PipelineContext& ctx) {
  std::vector<RunOutput> outputs;
  outputs.reserve(ctx.cfg.num_tasks * ctx.cfg.seeds);
  for (std::size_t t = 0; t < ctx.cfg.num_tasks; ++t) {
    for (std::size_t r = 0; r < ctx.cfg.seeds; ++r) outputs.push_back(run_single_task(ctx, t, r));
  }
  return aggregate_report(ctx, std::move(outputs));
}

inline EvalReport run_pipeline(const ExperimentConfig& cfg) {
  return run_pipeline(prepare_pipeline(cfg));
}

inline EvalReport run_variant(ExperimentConfig cfg, PromptVariant variant) {
  cfg.variant = variant;
  return run_pipeline(cfg);
}

// ---------------------------------------------------------------------------
// Report serialization: sectioned CSV and JSON, round-trip safe.

inline void emit_report_csv(const EvalReport& report, std::ostream& out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# runs\n";
  out << "task,seed,accuracy\n";
  for (const auto& r : report.runs)
    out << r.task_index << ',' << r.seed_index << ',' << r.accuracy << "\n";
  out << "# summary\n";
  out << "variant,num_tasks,seeds,runs,mean_percent,std_percent,tunable_with_bias,"
         "tunable_without_bias,pretrain_seconds,tune_seconds,eval_seconds\n";
  out << report.variant << ',' << report.num_tasks << ',' << report.seeds << ','
      << report.runs.size() << ',' << report.mean_percent << ',' << report.std_percent << ','
      << report.tunable_with_bias << ',' << report.tunable_without_bias << ','
      << report.pretrain_seconds << ',' << report.tune_seconds << ',' << report.eval_seconds
      << "\n";
  out << "# buckets\n";
  out << "bucket,queries,correct,accuracy\n";
  for (const auto& b : report.buckets) {
    out << b.bucket << ',' << b.queries << ',' << b.correct << ','
        << (b.queries == 0 ? 0.0 : static_cast<double>(b.correct) / static_cast<double>(b.queries))
        << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline EvalReport read_report_csv(std::istream& in, const std::string& source) {
  EvalReport report;
  std::string line, section;
  bool header_pending = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      section = detail::trim(line.substr(1));
      header_pending = true;
      continue;
    }
    if (header_pending) {  // column header row
      header_pending = false;
      continue;
    }
    const auto fields = detail::split_csv(line);
    auto bad = [&](const std::string& what) {
      return data_error(source + ":" + std::to_string(lineno) + ": " + what);
    };
    if (section == "runs") {
      if (fields.size() != 3) throw bad("expected task,seed,accuracy");
      RunRecord r;
      double acc = 0.0;
      if (!detail::parse_size(fields[0], r.task_index) ||
          !detail::parse_size(fields[1], r.seed_index) || !detail::parse_real(fields[2], acc))
        throw bad("malformed run row");
      r.accuracy = acc;
      report.runs.push_back(r);
    } else if (section == "summary") {
      if (fields.size() != 11) throw bad("expected 11 summary fields");
      report.variant = fields[0];
      std::size_t runs_declared = 0;
      if (!detail::parse_size(fields[1], report.num_tasks) ||
          !detail::parse_size(fields[2], report.seeds) ||
          !detail::parse_size(fields[3], runs_declared) ||
          !detail::parse_real(fields[4], report.mean_percent) ||
          !detail::parse_real(fields[5], report.std_percent) ||
          !detail::parse_size(fields[6], report.tunable_with_bias) ||
          !detail::parse_size(fields[7], report.tunable_without_bias) ||
          !detail::parse_real(fields[8], report.pretrain_seconds) ||
          !detail::parse_real(fields[9], report.tune_seconds) ||
          !detail::parse_real(fields[10], report.eval_seconds))
        throw bad("malformed summary row");
    } else if (section == "buckets") {
      if (fields.size() != 4) throw bad("expected bucket,queries,correct,accuracy");
      BucketAccuracy b;
      std::size_t bucket = 0;
      if (!detail::parse_size(fields[0], bucket) || !detail::parse_size(fields[1], b.queries) ||
          !detail::parse_size(fields[2], b.correct))
        throw bad("malformed bucket row");
      b.bucket = static_cast<int>(bucket);
      report.buckets.push_back(b);
    } else {
      throw bad("row outside any known section");
    }
  }
  return report;
}

inline void emit_report_json(const EvalReport& report, std::ostream& out);
inline EvalReport read_report_json(std::istream& in, const std::string& source);

inline void emit_report(const EvalReport& report, const std::string& path,
                        const std::string& format) {
  std::ofstream out(path);
  if (!out) throw data_error("emit_report: cannot open " + path + " for writing");
  if (format == "csv") {
    emit_report_csv(report, out);
  } else if (format == "json") {
    emit_report_json(report, out);
  } else {
    throw config_error("emit_report: unknown format '" + format + "'");
  }
  if (!out) throw data_error("emit_report: write failed for " + path);
}

inline EvalReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("read_report: cannot open " + path);
  int first = in.peek();
  while (first != std::ifstream::traits_type::eof() &&
         std::isspace(static_cast<unsigned char>(first))) {
    in.get();
    first = in.peek();
  }
  if (first == '{') return read_report_json(in, path);
  return read_report_csv(in, path);
}

}  // namespace pronog

#include "pronog/eval_json.hpp"
