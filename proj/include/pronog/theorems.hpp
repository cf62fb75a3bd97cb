#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pronog/contrastive.hpp"
#include "pronog/error.hpp"
#include "pronog/graph.hpp"
#include "pronog/pretrain.hpp"
#include "pronog/rng.hpp"

namespace pronog {

struct TheoremTrial {
  std::size_t trial = 0;
  double h = std::numeric_limits<double>::quiet_NaN();      // blank in CSV when NaN
  double count = std::numeric_limits<double>::quiet_NaN();  // homophily-sample count
  bool violation = false;
};

struct TheoremReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  // Rank correlation between homophily ratio and mean sample count;
  // NaN means not applicable (fewer than two grid points).
  double rank_correlation = std::numeric_limits<double>::quiet_NaN();
  std::vector<TheoremTrial> records;
  std::vector<std::pair<double, double>> mean_counts;  // (h, mean count)
};

// Average ranks (1-based, ties averaged).
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

inline double spearman_rank_correlation(const std::vector<double>& xs,
                                        const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw numeric_error("spearman: length mismatch");
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

// Checks empirically that extending a contrastive task with a homophily
// sample yields a strictly smaller loss than extending it with a
// non-homophily sample at the same anchor. Trials where the anchor offers
// only one kind of candidate are vacuous and skipped without counting.
inline TheoremReport verify_theorem1(std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw config_error("verify_theorem1: need at least one trial");
  const SimilarityKernel kernel = SimilarityKernel::exp_cos();

  TheoremReport report;
  const std::size_t max_attempts = 200 * trials + 1000;
  for (std::size_t attempt = 0; attempt < max_attempts && report.trials < trials; ++attempt) {
    const std::uint64_t aseed = derive_seed(seed, seed_stream::theorem1, attempt);
    Rng rng(aseed);
    const std::size_t n = 8 + rng.bounded(9);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (rng.uniform(0.0, 1.0) < 0.3) edges.emplace_back(u, v);
      }
    }
    Graph g;
    ContrastiveTask base;
    try {
      g = Graph::build(n, edges, Matrix(n, 1));
      base = build_link_prediction_task(g, 1, derive_seed(aseed, 1));
    } catch (const data_error&) {
      continue;  // infeasible draw, does not count as a trial
    }
    const Matrix emb = random_uniform_matrix(n, 8, -1.0, 1.0, derive_seed(aseed, 2));

    const std::size_t u = rng.bounded(n);
    std::vector<std::pair<std::size_t, std::size_t>> hom, non;
    for (std::size_t a : g.neighbors(u)) {
      for (std::size_t b = 0; b < n; ++b) {
        if (b == u || g.has_edge(u, b)) continue;
        if (classify_sample(g, u, a, b, emb) == SampleClass::homophily)
          hom.emplace_back(a, b);
        else
          non.emplace_back(a, b);
      }
    }
    if (hom.empty() || non.empty()) continue;  // vacuous comparison

    const auto [ah, bh] = hom[rng.bounded(hom.size())];
    const auto [an, bn] = non[rng.bounded(non.size())];
    auto extended = [&](std::size_t a, std::size_t b) {
      ContrastiveTask t = base;
      t.anchors.push_back(InstanceHandle::node_of(0, u));
      t.positives.push_back({InstanceHandle::node_of(0, a)});
      t.negatives.push_back({InstanceHandle::node_of(0, b)});
      return standardized_contrastive_loss({emb}, t, kernel).loss;
    };
    const double loss_hom = extended(ah, bh);
    const double loss_non = extended(an, bn);

    TheoremTrial rec;
    rec.trial = report.trials;
    rec.violation = loss_hom >= loss_non;
    report.records.push_back(rec);
    report.trials += 1;
    report.violations += rec.violation ? 1 : 0;
  }
  if (report.trials < trials)
    throw numeric_error("verify_theorem1: could not generate enough non-vacuous trials");
  return report;
}

// Counts, on planted graphs spanning a homophily grid, how many triplets of a
// fixed link-prediction task are homophily samples under the graphs'
// label-aligned features, and correlates the per-ratio means with the ratios.
inline TheoremReport verify_theorem2(const std::vector<double>& h_grid, std::size_t seeds,
                                     std::uint64_t base_seed = 39) {
  if (h_grid.empty()) throw config_error("verify_theorem2: empty ratio grid");
  if (seeds == 0) throw config_error("verify_theorem2: need at least one seed");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (h_grid[i] < 0.0 || h_grid[i] > 1.0)
      throw config_error("verify_theorem2: ratios must lie in [0,1]");
    if (i > 0 && h_grid[i] <= h_grid[i - 1])
      throw config_error("verify_theorem2: ratio grid must be strictly increasing");
  }

  TheoremReport report;
  std::vector<double> means;
  for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
    double sum = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const std::uint64_t gseed =
          derive_seed(base_seed, seed_stream::theorem2, hi * 100003ull + s);
      const Graph g = planted_homophily_graph(300, 3, h_grid[hi], 8.0, gseed);
      const ContrastiveTask task = build_link_prediction_task(g, 1, derive_seed(gseed, 1));
      std::size_t count = 0;
      for (std::size_t i = 0; i < task.anchors.size(); ++i) {
        const std::size_t u = task.anchors[i].node;
        const std::size_t a = task.positives[i][0].node;
        const std::size_t b = task.negatives[i][0].node;
        if (classify_sample(g, u, a, b, g.features) == SampleClass::homophily) ++count;
      }
      TheoremTrial rec;
      rec.trial = report.trials;
      rec.h = h_grid[hi];
      rec.count = static_cast<double>(count);
      report.records.push_back(rec);
      report.trials += 1;
      sum += static_cast<double>(count);
    }
    const double mean = sum / static_cast<double>(seeds);
    means.push_back(mean);
    report.mean_counts.emplace_back(h_grid[hi], mean);
  }
  if (h_grid.size() >= 2) {
    std::vector<double> hs(h_grid.begin(), h_grid.end());
    report.rank_correlation = spearman_rank_correlation(hs, means);
  }
  return report;
}

inline void write_theorem_csv(const TheoremReport& report, std::ostream& out) {
  out << "trial,h,count,violation\n";
  for (const auto& rec : report.records) {
    out << rec.trial << ',';
    if (!std::isnan(rec.h)) out << rec.h;
    out << ',';
    if (!std::isnan(rec.count)) out << rec.count;
    out << ',' << (rec.violation ? 1 : 0) << "\n";
  }
}

inline void write_theorem_csv(const TheoremReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("write_theorem_csv: cannot open " + path);
  write_theorem_csv(report, out);
  if (!out) throw data_error("write_theorem_csv: write failed for " + path);
}

}  // namespace pronog
