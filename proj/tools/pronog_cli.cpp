// Command-line front end: pre-train encoders, tune prompts, run few-shot
// evaluations, inspect label agreement, and check the two analytical claims.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pronog/pronog.hpp"

namespace {

using namespace pronog;

PretrainConfig pretrain_config(const ExperimentConfig& cfg) {
  PretrainConfig pcfg;
  pcfg.task = cfg.pretrain_task;
  pcfg.epochs = cfg.pretrain_epochs;
  pcfg.patience = cfg.pretrain_patience;
  pcfg.adam.lr = cfg.lr;
  pcfg.tau = cfg.tau;
  pcfg.edge_drop_ratio = cfg.edge_drop_ratio;
  pcfg.negatives_per_anchor = cfg.pretrain_negatives;
  pcfg.ego_delta = cfg.pretrain_delta;
  pcfg.seed = cfg.seed;
  return pcfg;
}

void cmd_pretrain(const std::string& config_path) {
  const ExperimentConfig cfg = parse_config_file(config_path);
  if (cfg.dataset.empty()) throw config_error("config: dataset path is required");

  PretrainResult res;
  GcnEncoder enc;
  auto dims_for = [&](std::size_t feature_dim) {
    std::vector<std::size_t> dims{feature_dim};
    for (std::size_t l = 0; l < cfg.encoder_layers; ++l) dims.push_back(cfg.encoder_hidden);
    return dims;
  };
  if (std::filesystem::is_directory(cfg.dataset)) {
    const GraphCollection col = load_collection(cfg.dataset);
    enc = GcnEncoder(dims_for(col.graphs.front().features.cols), derive_seed(cfg.seed, 0));
    res = pretrain(enc, col, pretrain_config(cfg));
  } else {
    const Graph g = load_graph(cfg.dataset);
    enc = GcnEncoder(dims_for(g.features.cols), derive_seed(cfg.seed, 0));
    res = pretrain(enc, g, pretrain_config(cfg));
  }

  const std::string out = cfg.encoder_out.empty() ? "encoder.ckpt" : cfg.encoder_out;
  save_encoder(enc, out);
  std::cout << "pretrained with " << to_string(cfg.pretrain_task) << " for " << res.epochs_run
            << " epochs, best eval loss " << res.best_loss << "\n";
  std::cout << "encoder digest " << parameter_digest(enc) << " -> " << out << "\n";
}

void cmd_tune(const std::string& config_path) {
  const ExperimentConfig cfg = parse_config_file(config_path);
  const PipelineContext ctx = prepare_pipeline(cfg);

  const FewShotTask task =
      sample_kshot_task(ctx.instance_labels, cfg.k, ctx.q_effective,
                        derive_seed(cfg.seed, seed_stream::fewshot_task, 0), ctx.kind);
  const std::uint64_t run_seed = derive_seed(cfg.seed, seed_stream::run, 0);
  PromptModel model(cfg.variant, ctx.embed_dim, cfg.condnet_hidden, run_seed);

  TuneConfig tcfg;
  tcfg.delta = cfg.delta;
  tcfg.tau = cfg.tau;
  tcfg.epochs = cfg.tune_epochs;
  tcfg.patience = cfg.tune_patience;
  tcfg.adam.lr = cfg.lr;
  tcfg.seed = run_seed;

  const auto supports =
      ctx.kind == InstanceKind::node
          ? build_node_instance_inputs(ctx.graph, ctx.node_embeddings, task.support, cfg.delta,
                                       cfg.variant)
          : build_graph_instance_inputs(ctx.collection, ctx.graph_embeddings, task.support,
                                        cfg.delta, cfg.variant);
  const TuneResult res = tune_on_inputs(model, supports, task.classes, tcfg);

  std::cout << "tuned " << to_string(cfg.variant) << " on a " << cfg.k << "-shot task for "
            << res.epochs_run << " epochs, best support loss " << res.best_loss << "\n";
  if (uses_condition_net(cfg.variant)) {
    const std::string out = cfg.condnet_out.empty() ? "condnet.ckpt" : cfg.condnet_out;
    save_condition_net(model.cn, out);
    std::cout << "condition net digest " << parameter_digest(model.cn) << " -> " << out << "\n";
  } else {
    std::cout << "variant has no condition net; nothing to checkpoint\n";
  }
}

void cmd_evaluate(const std::string& config_path) {
  const ExperimentConfig cfg = parse_config_file(config_path);
  const EvalReport report = run_pipeline(cfg);
  emit_report(report, cfg.output, cfg.format);

  std::cout << std::fixed << std::setprecision(2);
  std::cout << report.variant << ": " << report.mean_percent << "% +/- " << report.std_percent
            << "% over " << report.runs.size() << " runs -> " << cfg.output << "\n";
  for (const auto& b : report.buckets) {
    const double acc =
        b.queries == 0 ? 0.0 : 100.0 * static_cast<double>(b.correct) / static_cast<double>(b.queries);
    std::cout << "  bucket " << b.bucket << ": " << acc << "% on " << b.queries << " queries\n";
  }
}

void cmd_analyze(const std::string& graph_path) {
  const Graph g = load_graph(graph_path);
  const double ratio = graph_homophily_ratio(g);
  const std::vector<int> buckets = homophily_buckets(g, g.labels);

  std::map<int, std::size_t> counts;
  for (int b : buckets) counts[b] += 1;
  static const char* kRanges[] = {"[0.0,0.2)", "[0.2,0.4)", "[0.4,0.6)", "[0.6,0.8)",
                                  "[0.8,1.0]"};

  std::cout << "nodes " << g.num_nodes << ", undirected edges " << g.num_undirected_edges()
            << "\n";
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "edge label agreement " << ratio << "\n";
  std::cout << "node-level buckets:\n";
  for (int b = 0; b < 5; ++b)
    std::cout << "  " << kRanges[b] << " : " << counts[b] << "\n";
  std::cout << "  isolated  : " << counts[kIsolatedBucket] << "\n";
}

void cmd_verify(std::size_t trials, const std::vector<double>& grid, std::size_t grid_seeds,
                std::uint64_t seed, const std::string& out_path) {
  const TheoremReport ordering = verify_theorem1(trials, seed);
  std::cout << "loss ordering: " << ordering.violations << " violations in " << ordering.trials
            << " trials\n";

  const TheoremReport counts = verify_theorem2(grid, grid_seeds, seed);
  std::cout << std::fixed << std::setprecision(3);
  std::cout << "sample counts by planted ratio:\n";
  for (const auto& [h, mean] : counts.mean_counts)
    std::cout << "  h=" << h << " -> " << mean << "\n";
  if (!std::isnan(counts.rank_correlation))
    std::cout << "rank correlation " << counts.rank_correlation << "\n";

  if (!out_path.empty()) {
    TheoremReport merged = ordering;
    for (TheoremTrial rec : counts.records) {
      rec.trial = merged.trials;
      merged.records.push_back(rec);
      merged.trials += 1;
    }
    write_theorem_csv(merged, out_path);
    std::cout << "wrote " << merged.records.size() << " records -> " << out_path << "\n";
  }
}

void cmd_report(const std::string& results_path, const std::string& format,
                const std::string& out_path) {
  const EvalReport report = read_report(results_path);
  if (out_path.empty()) {
    if (format == "json") {
      emit_report_json(report, std::cout);
    } else {
      emit_report_csv(report, std::cout);
    }
  } else {
    emit_report(report, out_path, format);
    std::cout << "rewrote " << results_path << " -> " << out_path << " (" << format << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot graph learning with pre-trained encoders and conditional prompts"};
  app.require_subcommand(1);

  std::string pre_cfg;
  auto* pre = app.add_subcommand("pretrain", "pre-train an encoder and write its checkpoint");
  pre->add_option("config", pre_cfg, "experiment config file")->required();
  pre->callback([&]() { cmd_pretrain(pre_cfg); });

  std::string tune_cfg;
  auto* tune = app.add_subcommand("tune", "tune a prompt model on one sampled task");
  tune->add_option("config", tune_cfg, "experiment config file")->required();
  tune->callback([&]() { cmd_tune(tune_cfg); });

  std::string eval_cfg;
  auto* eval = app.add_subcommand("evaluate", "run the full few-shot evaluation");
  eval->add_option("config", eval_cfg, "experiment config file")->required();
  eval->callback([&]() { cmd_evaluate(eval_cfg); });

  std::string graph_path;
  auto* analyze = app.add_subcommand("analyze-homophily", "label agreement profile of a graph");
  analyze->add_option("graph", graph_path, "graph file")->required();
  analyze->callback([&]() { cmd_analyze(graph_path); });

  std::size_t trials = 1000;
  std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t grid_seeds = 10;
  std::uint64_t seed = 39;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify-theorems", "empirical checks of the loss analysis");
  verify->add_option("--trials", trials, "random trials for the loss ordering check");
  verify->add_option("--h-grid", grid, "planted label-agreement grid")->expected(-1);
  verify->add_option("--grid-seeds", grid_seeds, "graphs per grid point");
  verify->add_option("--seed", seed, "base seed");
  verify->add_option("--out", verify_out, "write all trial records as csv");
  verify->callback([&]() { cmd_verify(trials, grid, grid_seeds, seed, verify_out); });

  std::string results_path, report_format = "csv", report_out;
  auto* report = app.add_subcommand("report", "re-emit a results file as csv or json");
  report->add_option("results", results_path, "results file (csv or json)")->required();
  report->add_option("--format", report_format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out", report_out, "output path (default: stdout)");
  report->callback([&]() { cmd_report(results_path, report_format, report_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const pronog::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const pronog::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const pronog::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
