#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pronog/error.hpp"
#include "pronog/rng.hpp"

namespace pronog {

enum class InstanceKind { node, graph };

// A k-shot episode over labeled instances (nodes or whole graphs).
struct FewShotTask {
  std::vector<int> classes;  // ascending, distinct
  std::vector<std::pair<std::size_t, int>> support;  // (instance id, class)
  std::vector<std::pair<std::size_t, int>> query;
  InstanceKind instance_kind = InstanceKind::node;
};

// Uniformly samples k support + q query instances per class, disjoint,
// deterministic in the seed.
inline FewShotTask sample_kshot_task(const std::vector<int>& labels, std::size_t k, std::size_t q,
                                     std::uint64_t seed,
                                     InstanceKind kind = InstanceKind::node) {
  if (k == 0) throw data_error("sample_kshot_task: k must be positive");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  if (by_class.empty()) throw data_error("sample_kshot_task: no labeled instances");

  FewShotTask task;
  task.instance_kind = kind;
  Rng rng(seed);
  for (const auto& [cls, ids] : by_class) {
    if (ids.size() < k + q)
      throw data_error("sample_kshot_task: class " + std::to_string(cls) + " has only " +
                       std::to_string(ids.size()) + " instances, need " + std::to_string(k + q));
    task.classes.push_back(cls);
    const auto picks = rng.sample_without_replacement(ids.size(), k + q);
    for (std::size_t j = 0; j < k; ++j) task.support.emplace_back(ids[picks[j]], cls);
    for (std::size_t j = k; j < k + q; ++j) task.query.emplace_back(ids[picks[j]], cls);
  }
  return task;
}

}  // namespace pronog
