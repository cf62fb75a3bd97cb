#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "pronog/pronog.hpp"

using namespace pronog;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "pronog_eval_tests";

ExperimentConfig config_from(const std::string& text, const std::string& source = "<test>") {
  std::istringstream in(text);
  return parse_config(in, source);
}

}  // namespace

TEST_CASE("experiment config parsing") {
  SECTION("empty input keeps the defaults") {
    const ExperimentConfig cfg = config_from("");
    REQUIRE(cfg.task == InstanceKind::node);
    REQUIRE(cfg.pretrain_task == PretrainTaskKind::graphcl);
    REQUIRE(cfg.k == 5);
    REQUIRE(cfg.q == 10);
    REQUIRE(cfg.num_tasks == 100);
    REQUIRE(cfg.seeds == 5);
    REQUIRE(cfg.encoder_hidden == 64);
    REQUIRE(cfg.encoder_layers == 2);
    REQUIRE(cfg.condnet_hidden == 64);
    REQUIRE(cfg.delta == 2);
    REQUIRE(cfg.tau == 0.5);
    REQUIRE(cfg.lr == 1e-3);
    REQUIRE(cfg.variant == PromptVariant::pronog);
    REQUIRE(cfg.seed == 39);
    REQUIRE(cfg.output == "results.csv");
    REQUIRE(cfg.format == "csv");
  }
  SECTION("every key is settable") {
    const ExperimentConfig cfg = config_from(
        "dataset = data/toy.graph\n"
        "task = graph\n"
        "pretrain_task = dgi\n"
        "k = 3\n"
        "q = 7\n"
        "num_tasks = 12\n"
        "seeds = 2\n"
        "encoder_hidden = 16\n"
        "encoder_layers = 3\n"
        "condnet_hidden = 8\n"
        "delta = 1\n"
        "tau = 0.25\n"
        "lr = 0.01\n"
        "pretrain_epochs = 9\n"
        "pretrain_patience = 4\n"
        "tune_epochs = 11\n"
        "tune_patience = 6\n"
        "edge_drop_ratio = 0.4\n"
        "pretrain_negatives = 5\n"
        "pretrain_delta = 2\n"
        "variant = no_sim\n"
        "seed = 123\n"
        "encoder_in = enc.ckpt\n"
        "encoder_out = out.ckpt\n"
        "condnet_out = cn.ckpt\n"
        "output = run.json\n"
        "format = json\n");
    REQUIRE(cfg.dataset == "data/toy.graph");
    REQUIRE(cfg.task == InstanceKind::graph);
    REQUIRE(cfg.pretrain_task == PretrainTaskKind::dgi);
    REQUIRE(cfg.k == 3);
    REQUIRE(cfg.q == 7);
    REQUIRE(cfg.num_tasks == 12);
    REQUIRE(cfg.seeds == 2);
    REQUIRE(cfg.encoder_hidden == 16);
    REQUIRE(cfg.encoder_layers == 3);
    REQUIRE(cfg.condnet_hidden == 8);
    REQUIRE(cfg.delta == 1);
    REQUIRE(cfg.tau == 0.25);
    REQUIRE(cfg.lr == 0.01);
    REQUIRE(cfg.pretrain_epochs == 9);
    REQUIRE(cfg.pretrain_patience == 4);
    REQUIRE(cfg.tune_epochs == 11);
    REQUIRE(cfg.tune_patience == 6);
    REQUIRE(cfg.edge_drop_ratio == 0.4);
    REQUIRE(cfg.pretrain_negatives == 5);
    REQUIRE(cfg.pretrain_delta == 2);
    REQUIRE(cfg.variant == PromptVariant::no_sim);
    REQUIRE(cfg.seed == 123);
    REQUIRE(cfg.encoder_in == "enc.ckpt");
    REQUIRE(cfg.encoder_out == "out.ckpt");
    REQUIRE(cfg.condnet_out == "cn.ckpt");
    REQUIRE(cfg.output == "run.json");
    REQUIRE(cfg.format == "json");
  }
  SECTION("comments and blanks are ignored") {
    const ExperimentConfig cfg = config_from(
        "# full-line comment\n"
        "\n"
        "k = 2   # trailing comment\n"
        "   \n"
        "q = 4\n");
    REQUIRE(cfg.k == 2);
    REQUIRE(cfg.q == 4);
  }
  SECTION("errors carry the source location") {
    REQUIRE_THROWS_WITH(config_from("k = 1\nnot a pair\n", "test.cfg"),
                        ContainsSubstring("test.cfg:2"));
    REQUIRE_THROWS_WITH(config_from("mystery = 3\n", "test.cfg"),
                        ContainsSubstring("unknown config key 'mystery'"));
    REQUIRE_THROWS_AS(config_from("k =\n"), config_error);
  }
  SECTION("value validation") {
    REQUIRE_THROWS_AS(config_from("task = hypergraph\n"), config_error);
    REQUIRE_THROWS_AS(config_from("pretrain_task = jigsaw\n"), config_error);
    REQUIRE_THROWS_AS(config_from("variant = fancy\n"), config_error);
    REQUIRE_THROWS_AS(config_from("format = xml\n"), config_error);
    REQUIRE_THROWS_AS(config_from("k = 0\n"), config_error);
    REQUIRE_THROWS_AS(config_from("k = -3\n"), config_error);
    REQUIRE_THROWS_AS(config_from("tau = 0\n"), config_error);
    REQUIRE_THROWS_AS(config_from("lr = 0\n"), config_error);
    REQUIRE_THROWS_AS(config_from("pretrain_epochs = 0\n"), config_error);
    REQUIRE_THROWS_AS(config_from("edge_drop_ratio = 1.0\n"), config_error);
    REQUIRE_THROWS_AS(config_from("edge_drop_ratio = -0.2\n"), config_error);
    REQUIRE_THROWS_AS(config_from("pretrain_negatives = 0\n"), config_error);
    REQUIRE_THROWS_AS(config_from("encoder_layers = 0\n"), config_error);
  }
  SECTION("config files load through the same path") {
    fs::create_directories(kScratch);
    const fs::path p = kScratch / "exp.cfg";
    std::ofstream(p) << "k = 4\nseeds = 3\n";
    const ExperimentConfig cfg = parse_config_file(p.string());
    REQUIRE(cfg.k == 4);
    REQUIRE(cfg.seeds == 3);
    REQUIRE_THROWS_AS(parse_config_file((kScratch / "absent.cfg").string()), config_error);
  }
}

TEST_CASE("tunable parameter counts") {
  const ParameterCount full = count_tunable_parameters(PromptVariant::pronog, 256, 64);
  REQUIRE(full.without_bias == 32768);  // 2 * 256 * 64
  REQUIRE(full.with_bias == 33088);     // + 64 + 256

  const ParameterCount cond = count_tunable_parameters(PromptVariant::node_cond, 256, 64);
  REQUIRE(cond.without_bias == full.without_bias);
  REQUIRE(count_tunable_parameters(PromptVariant::no_sim, 256, 64).with_bias == full.with_bias);

  const ParameterCount single = count_tunable_parameters(PromptVariant::single_prompt, 256, 64);
  REQUIRE(single.with_bias == 256);
  REQUIRE(single.without_bias == 256);

  const ParameterCount none = count_tunable_parameters(PromptVariant::no_prompt, 256, 64);
  REQUIRE(none.with_bias == 0);
  REQUIRE(none.without_bias == 0);
}

TEST_CASE("per-bucket accuracy") {
  // path 0-1-2 plus isolated node 3; same-label shares 0/1, 1/2, 1/1
  Matrix x(4, 1);
  const Graph g = Graph::build(4, {{0, 1}, {1, 2}}, x, {0, 1, 1, 0});

  SECTION("hand tally") {
    const std::vector<QueryOutcome> outcomes{
        {0, true}, {1, true}, {1, false}, {2, false}, {3, true}};
    const auto rows = bucket_accuracy(outcomes, g, g.labels, InstanceKind::node);
    REQUIRE(rows.size() == 3);  // isolated node is skipped
    REQUIRE(rows[0].bucket == 0);
    REQUIRE(rows[0].queries == 1);
    REQUIRE(rows[0].correct == 1);
    REQUIRE(rows[1].bucket == 2);  // ratio 1/2 lands in the middle bucket
    REQUIRE(rows[1].queries == 2);
    REQUIRE(rows[1].correct == 1);
    REQUIRE(rows[2].bucket == 4);
    REQUIRE(rows[2].queries == 1);
    REQUIRE(rows[2].correct == 0);
  }
  SECTION("empty buckets are omitted") {
    const auto rows = bucket_accuracy({{0, true}}, g, g.labels, InstanceKind::node);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].bucket == 0);
  }
  SECTION("validation") {
    REQUIRE_THROWS_WITH(bucket_accuracy({}, g, g.labels, InstanceKind::graph),
                        ContainsSubstring("node task"));
    REQUIRE_THROWS_AS(bucket_accuracy({{9, true}}, g, g.labels, InstanceKind::node),
                      data_error);
  }
}

namespace {

EvalReport sample_report() {
  EvalReport r;
  r.variant = "single_prompt";
  r.num_tasks = 2;
  r.seeds = 2;
  r.runs = {{0, 0, 1.0 / 3.0}, {0, 1, 0.5}, {1, 0, 2.0 / 3.0}, {1, 1, 0.9}};
  double sum = 0.0;
  for (const auto& run : r.runs) sum += run.accuracy;
  const double mean = sum / 4.0;
  double sq = 0.0;
  for (const auto& run : r.runs) sq += (run.accuracy - mean) * (run.accuracy - mean);
  r.mean_percent = 100.0 * mean;
  r.std_percent = 100.0 * std::sqrt(sq / 4.0);
  r.buckets = {{0, 5, 2}, {4, 7, 6}};
  r.tunable_with_bias = 8;
  r.tunable_without_bias = 8;
  r.pretrain_seconds = 0.125;
  r.tune_seconds = 1.0 / 7.0;
  r.eval_seconds = 0.25;
  return r;
}

void require_reports_equal(const EvalReport& a, const EvalReport& b) {
  REQUIRE(a.variant == b.variant);
  REQUIRE(a.num_tasks == b.num_tasks);
  REQUIRE(a.seeds == b.seeds);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    REQUIRE(a.runs[i].task_index == b.runs[i].task_index);
    REQUIRE(a.runs[i].seed_index == b.runs[i].seed_index);
    REQUIRE(a.runs[i].accuracy == b.runs[i].accuracy);  // bit-exact round trip
  }
  REQUIRE(a.mean_percent == b.mean_percent);
  REQUIRE(a.std_percent == b.std_percent);
  REQUIRE(a.buckets.size() == b.buckets.size());
  for (std::size_t i = 0; i < a.buckets.size(); ++i) {
    REQUIRE(a.buckets[i].bucket == b.buckets[i].bucket);
    REQUIRE(a.buckets[i].queries == b.buckets[i].queries);
    REQUIRE(a.buckets[i].correct == b.buckets[i].correct);
  }
  REQUIRE(a.tunable_with_bias == b.tunable_with_bias);
  REQUIRE(a.tunable_without_bias == b.tunable_without_bias);
  REQUIRE(a.pretrain_seconds == b.pretrain_seconds);
  REQUIRE(a.tune_seconds == b.tune_seconds);
  REQUIRE(a.eval_seconds == b.eval_seconds);
}

}  // namespace

TEST_CASE("report round trips") {
  fs::create_directories(kScratch);
  const EvalReport report = sample_report();

  SECTION("csv through a stream") {
    std::stringstream buf;
    emit_report_csv(report, buf);
    const EvalReport back = read_report_csv(buf, "<buf>");
    require_reports_equal(report, back);
  }
  SECTION("csv through a file") {
    const std::string path = (kScratch / "report.csv").string();
    emit_report(report, path, "csv");
    require_reports_equal(report, read_report(path));
  }
  SECTION("json through a file") {
    const std::string path = (kScratch / "report.json").string();
    emit_report(report, path, "json");
    require_reports_equal(report, read_report(path));
  }
  SECTION("json detection tolerates leading whitespace") {
    const std::string path = (kScratch / "padded.json").string();
    {
      std::stringstream buf;
      emit_report_json(report, buf);
      std::ofstream out(path);
      out << "\n  " << buf.str();
    }
    require_reports_equal(report, read_report(path));
  }
  SECTION("empty sections survive") {
    EvalReport bare;
    bare.variant = "no_prompt";
    std::stringstream buf;
    emit_report_csv(bare, buf);
    const EvalReport back = read_report_csv(buf, "<buf>");
    REQUIRE(back.runs.empty());
    REQUIRE(back.buckets.empty());
    REQUIRE(back.variant == "no_prompt");
  }
  SECTION("errors") {
    REQUIRE_THROWS_AS(emit_report(report, (kScratch / "x.csv").string(), "yaml"), config_error);
    REQUIRE_THROWS_AS(read_report((kScratch / "absent.csv").string()), data_error);

    std::stringstream stray("1,2,3\n");
    REQUIRE_THROWS_WITH(read_report_csv(stray, "bad.csv"),
                        ContainsSubstring("bad.csv:1"));
    std::stringstream short_row("# runs\ntask,seed,accuracy\n1,2\n");
    REQUIRE_THROWS_AS(read_report_csv(short_row, "bad.csv"), data_error);
    std::stringstream bad_num("# runs\ntask,seed,accuracy\n1,2,banana\n");
    REQUIRE_THROWS_AS(read_report_csv(bad_num, "bad.csv"), data_error);

    const std::string path = (kScratch / "broken.json").string();
    std::ofstream(path) << "{ not json";
    REQUIRE_THROWS_AS(read_report(path), data_error);
  }
}

namespace {

ExperimentConfig smoke_config() {
  ExperimentConfig cfg;
  cfg.k = 2;
  cfg.q = 2;
  cfg.num_tasks = 2;
  cfg.seeds = 2;
  cfg.encoder_hidden = 8;
  cfg.encoder_layers = 2;
  cfg.condnet_hidden = 4;
  cfg.delta = 1;
  cfg.pretrain_epochs = 3;
  cfg.pretrain_patience = 3;
  cfg.tune_epochs = 5;
  cfg.tune_patience = 5;
  cfg.seed = 39;
  return cfg;
}

}  // namespace

TEST_CASE("pipeline smoke run") {
  const Graph g = planted_homophily_graph(60, 2, 0.7, 4.0, 17);
  const ExperimentConfig cfg = smoke_config();
  const PipelineContext ctx = prepare_pipeline(cfg, g);

  REQUIRE(ctx.encoder.frozen());
  REQUIRE(ctx.encoder_digest.size() == 16);
  REQUIRE(ctx.embed_dim == 8);
  REQUIRE(ctx.q_effective == 2);
  REQUIRE(ctx.classes == std::vector<int>{0, 1});

  const EvalReport report = run_pipeline(ctx);
  REQUIRE(report.runs.size() == 4);
  REQUIRE(report.num_tasks == 2);
  REQUIRE(report.seeds == 2);
  for (const auto& r : report.runs) {
    REQUIRE(r.accuracy >= 0.0);
    REQUIRE(r.accuracy <= 1.0);
  }

  SECTION("summary statistics match the run table") {
    double sum = 0.0;
    for (const auto& r : report.runs) sum += r.accuracy;
    const double mean = sum / 4.0;
    double sq = 0.0;
    for (const auto& r : report.runs) sq += (r.accuracy - mean) * (r.accuracy - mean);
    REQUIRE(report.mean_percent == Catch::Approx(100.0 * mean));
    REQUIRE(report.std_percent == Catch::Approx(100.0 * std::sqrt(sq / 4.0)).margin(1e-9));

    std::size_t bucket_queries = 0;
    for (const auto& b : report.buckets) bucket_queries += b.queries;
    REQUIRE(bucket_queries == 4 * ctx.q_effective * 2);  // runs x queries per run
  }
  SECTION("repeat preparation reproduces every run") {
    const PipelineContext again = prepare_pipeline(cfg, g);
    REQUIRE(again.encoder_digest == ctx.encoder_digest);
    const EvalReport second = run_pipeline(again);
    REQUIRE(second.runs.size() == report.runs.size());
    for (std::size_t i = 0; i < report.runs.size(); ++i)
      REQUIRE(second.runs[i].accuracy == report.runs[i].accuracy);
    REQUIRE(second.mean_percent == report.mean_percent);
  }
  SECTION("task order does not matter") {
    std::vector<RunOutput> outs;
    for (std::size_t t = cfg.num_tasks; t-- > 0;)
      for (std::size_t s = cfg.seeds; s-- > 0;) outs.push_back(run_single_task(ctx, t, s));
    const EvalReport shuffled = aggregate_report(ctx, std::move(outs));
    REQUIRE(shuffled.runs.size() == report.runs.size());
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      REQUIRE(shuffled.runs[i].task_index == report.runs[i].task_index);
      REQUIRE(shuffled.runs[i].seed_index == report.runs[i].seed_index);
      REQUIRE(shuffled.runs[i].accuracy == report.runs[i].accuracy);
    }
    REQUIRE(shuffled.mean_percent == report.mean_percent);
    REQUIRE(shuffled.std_percent == report.std_percent);
  }
  SECTION("saved encoders short-circuit pre-training") {
    fs::create_directories(kScratch);
    const std::string path = (kScratch / "smoke_enc.ckpt").string();
    save_encoder(ctx.encoder, path);
    ExperimentConfig loaded = cfg;
    loaded.encoder_in = path;
    const PipelineContext ctx2 = prepare_pipeline(loaded, g);
    REQUIRE(ctx2.encoder_digest == ctx.encoder_digest);

    const Graph wide = planted_homophily_graph(40, 3, 0.6, 4.0, 23);  // 3 feature columns
    REQUIRE_THROWS_AS(prepare_pipeline(loaded, wide), data_error);
  }
  SECTION("parameter counts follow the variant") {
    REQUIRE(report.tunable_without_bias ==
            count_tunable_parameters(PromptVariant::pronog, 8, 4).without_bias);
    ExperimentConfig frozen_cfg = cfg;
    frozen_cfg.variant = PromptVariant::no_prompt;
    const EvalReport none = run_pipeline(prepare_pipeline(frozen_cfg, g));
    REQUIRE(none.tunable_with_bias == 0);
    REQUIRE(none.variant == "no_prompt");
  }
}

TEST_CASE("pipeline guards") {
  const Graph g = planted_homophily_graph(30, 2, 0.6, 3.0, 11);

  SECTION("k beyond the smallest class") {
    ExperimentConfig cfg = smoke_config();
    cfg.k = 20;
    REQUIRE_THROWS_WITH(prepare_pipeline(cfg, g), ContainsSubstring("k+1"));
  }
  SECTION("unlabeled graphs are rejected") {
    const Graph bare = Graph::build(3, {{0, 1}, {1, 2}}, Matrix(3, 2));
    ExperimentConfig cfg = smoke_config();
    REQUIRE_THROWS_AS(prepare_pipeline(cfg, bare), data_error);
  }
  SECTION("collections demand a graph task") {
    const GraphCollection col = build_ego_dataset(g, 1);
    ExperimentConfig cfg = smoke_config();
    REQUIRE_THROWS_AS(prepare_pipeline(cfg, col), config_error);
  }
}

TEST_CASE("graph-instance pipeline") {
  const Graph g = planted_homophily_graph(30, 2, 0.7, 3.0, 29);
  ExperimentConfig cfg = smoke_config();
  cfg.task = InstanceKind::graph;
  cfg.num_tasks = 1;
  cfg.seeds = 1;
  cfg.delta = 1;

  const PipelineContext ctx = prepare_pipeline(cfg, g);
  REQUIRE(ctx.kind == InstanceKind::graph);
  REQUIRE(ctx.collection.graphs.size() == 30);  // one ego network per node
  REQUIRE(ctx.graph_embeddings.size() == 30);
  REQUIRE(ctx.instance_labels == g.labels);

  const EvalReport report = run_pipeline(ctx);
  REQUIRE(report.runs.size() == 1);
  REQUIRE(report.buckets.empty());  // bucket table only applies to node tasks
}
