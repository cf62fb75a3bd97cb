#pragma once

// JSON side of report serialization, kept separate so the heavy vendor header
// only gets pulled in once.

#include <istream>
#include <ostream>

#include <json.hpp>

#include "pronog/error.hpp"
#include "pronog/eval.hpp"

namespace pronog {

inline void emit_report_json(const EvalReport& report, std::ostream& out) {
  nlohmann::json j;
  j["variant"] = report.variant;
  j["num_tasks"] = report.num_tasks;
  j["seeds"] = report.seeds;
  j["mean_percent"] = report.mean_percent;
  j["std_percent"] = report.std_percent;
  j["tunable_with_bias"] = report.tunable_with_bias;
  j["tunable_without_bias"] = report.tunable_without_bias;
  j["timings"] = {{"pretrain_seconds", report.pretrain_seconds},
                  {"tune_seconds", report.tune_seconds},
                  {"eval_seconds", report.eval_seconds}};
  j["runs"] = nlohmann::json::array();
  for (const auto& r : report.runs)
    j["runs"].push_back(
        {{"task", r.task_index}, {"seed", r.seed_index}, {"accuracy", r.accuracy}});
  j["buckets"] = nlohmann::json::array();
  for (const auto& b : report.buckets)
    j["buckets"].push_back(
        {{"bucket", b.bucket}, {"queries", b.queries}, {"correct", b.correct}});
  out << j.dump(2) << "\n";
}

inline EvalReport read_report_json(std::istream& in, const std::string& source) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(source + ": invalid JSON report: " + e.what());
  }
  EvalReport report;
  try {
    report.variant = j.at("variant").get<std::string>();
    report.num_tasks = j.at("num_tasks").get<std::size_t>();
    report.seeds = j.at("seeds").get<std::size_t>();
    report.mean_percent = j.at("mean_percent").get<double>();
    report.std_percent = j.at("std_percent").get<double>();
    report.tunable_with_bias = j.at("tunable_with_bias").get<std::size_t>();
    report.tunable_without_bias = j.at("tunable_without_bias").get<std::size_t>();
    const auto& t = j.at("timings");
    report.pretrain_seconds = t.at("pretrain_seconds").get<double>();
    report.tune_seconds = t.at("tune_seconds").get<double>();
    report.eval_seconds = t.at("eval_seconds").get<double>();
    for (const auto& r : j.at("runs")) {
      report.runs.push_back({r.at("task").get<std::size_t>(), r.at("seed").get<std::size_t>(),
                             r.at("accuracy").get<double>()});
    }
    for (const auto& b : j.at("buckets")) {
      report.buckets.push_back({b.at("bucket").get<int>(), b.at("queries").get<std::size_t>(),
                                b.at("correct").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error(source + ": malformed report JSON: " + e.what());
  }
  return report;
}

}  // namespace pronog
