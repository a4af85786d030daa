#pragma once

// Group-level train/test partitioning. Groups (for example hospitals, each
// tagged with a level) are assigned wholesale to one side, so no group leaks
// rows across the split. A plan is valid when the test side holds the target
// sample fraction within tolerance and both sides keep at least
// min_per_level_per_side groups of every level.
//
// Up to 22 groups the search is exhaustive over all assignments, so an empty
// result proves infeasibility. Beyond that a seeded random search runs and an
// empty result only means the search was exhausted; the status field keeps
// the two outcomes distinguishable.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "glassgam/common.hpp"
#include "glassgam/dataset.hpp"

namespace glassgam {

struct GroupInfo {
  std::string id;
  int level = 0;
  std::size_t n_samples = 0;
};

struct PartitionPlan {
  std::vector<std::string> train_groups;
  std::vector<std::string> test_groups;
  double test_fraction = 0.0;  // realized, sample-weighted
};

enum class PartitionStatus { ok, infeasible, search_exhausted };

struct PartitionConfig {
  double target_test_fraction = 0.25;
  double tolerance = 0.03;
  int min_per_level_per_side = 2;
  std::size_t max_plans = 10000;  // also the random-search candidate budget
  std::uint64_t seed = 0;
};

struct PartitionResult {
  std::vector<PartitionPlan> plans;
  PartitionStatus status = PartitionStatus::ok;
  std::string diagnostic;
};

inline constexpr std::size_t kExhaustiveGroupLimit = 22;

namespace detail {

inline PartitionPlan make_plan(const std::vector<GroupInfo>& groups,
                               const std::vector<bool>& in_test, double total) {
  PartitionPlan plan;
  double test_samples = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (in_test[g]) {
      plan.test_groups.push_back(groups[g].id);
      test_samples += static_cast<double>(groups[g].n_samples);
    } else {
      plan.train_groups.push_back(groups[g].id);
    }
  }
  plan.test_fraction = test_samples / total;
  return plan;
}

inline bool assignment_valid(const std::vector<GroupInfo>& groups,
                             const std::vector<bool>& in_test, const PartitionConfig& cfg,
                             const std::map<int, std::size_t>& level_totals, double total) {
  std::map<int, std::size_t> test_per_level;
  double test_samples = 0.0;
  std::size_t n_test = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (in_test[g]) {
      ++test_per_level[groups[g].level];
      test_samples += static_cast<double>(groups[g].n_samples);
      ++n_test;
    }
  }
  if (n_test == 0 || n_test == groups.size()) return false;
  for (const auto& [level, count] : level_totals) {
    const std::size_t in = test_per_level.count(level) ? test_per_level.at(level) : 0;
    const auto need = static_cast<std::size_t>(cfg.min_per_level_per_side);
    if (in < need || count - in < need) return false;
  }
  const double frac = test_samples / total;
  // tiny slack absorbs representation error in the fraction arithmetic
  return std::abs(frac - cfg.target_test_fraction) <= cfg.tolerance + 1e-12;
}

}  // namespace detail

inline PartitionResult generate_partitions(const std::vector<GroupInfo>& groups,
                                           const PartitionConfig& cfg) {
  if (groups.empty()) throw ValueError("generate_partitions: no groups");
  if (!(cfg.target_test_fraction > 0.0 && cfg.target_test_fraction < 1.0)) {
    throw ConfigError("target_test_fraction must lie in (0, 1)");
  }
  if (cfg.tolerance < 0.0) throw ConfigError("tolerance must be non-negative");
  if (cfg.min_per_level_per_side < 0) {
    throw ConfigError("min_per_level_per_side must be non-negative");
  }
  if (cfg.max_plans == 0) throw ConfigError("max_plans must be positive");
  std::set<std::string> seen;
  double total = 0.0;
  std::map<int, std::size_t> level_totals;
  for (const auto& g : groups) {
    if (!seen.insert(g.id).second) {
      throw ValueError("generate_partitions: duplicate group id '" + g.id + "'");
    }
    if (g.n_samples == 0) {
      throw ValueError("generate_partitions: group '" + g.id + "' has no samples");
    }
    total += static_cast<double>(g.n_samples);
    ++level_totals[g.level];
  }

  PartitionResult result;
  // Pigeonhole: a level with fewer groups than both sides demand can never
  // satisfy the constraint, regardless of the fraction window.
  for (const auto& [level, count] : level_totals) {
    if (count < 2 * static_cast<std::size_t>(cfg.min_per_level_per_side)) {
      result.status = PartitionStatus::infeasible;
      result.diagnostic = "infeasible: level " + std::to_string(level) + " has " +
                          std::to_string(count) + " groups but both sides need " +
                          std::to_string(cfg.min_per_level_per_side);
      return result;
    }
  }

  const std::size_t G = groups.size();
  if (G <= kExhaustiveGroupLimit) {
    std::vector<bool> in_test(G, false);
    const std::uint64_t limit = 1ull << G;
    for (std::uint64_t mask = 1; mask + 1 < limit; ++mask) {
      for (std::size_t g = 0; g < G; ++g) in_test[g] = (mask >> g) & 1;
      if (detail::assignment_valid(groups, in_test, cfg, level_totals, total)) {
        result.plans.push_back(detail::make_plan(groups, in_test, total));
        if (result.plans.size() >= cfg.max_plans) {
          result.diagnostic = "plan list truncated at max_plans";
          break;
        }
      }
    }
    if (result.plans.empty()) {
      result.status = PartitionStatus::infeasible;
      result.diagnostic =
          "infeasible: exhaustive search found no assignment meeting the "
          "fraction window and per-level minimums";
    }
    return result;
  }

  // Random search: candidate assignments draw each group to the test side
  // with the target probability; duplicates are skipped.
  Rng rng(derive_seed(cfg.seed, streams::partition));
  std::set<std::vector<bool>> tried;
  std::vector<bool> in_test(G, false);
  for (std::size_t attempt = 0; attempt < cfg.max_plans * 10; ++attempt) {
    for (std::size_t g = 0; g < G; ++g) in_test[g] = rng.bernoulli(cfg.target_test_fraction);
    if (!tried.insert(in_test).second) continue;
    if (detail::assignment_valid(groups, in_test, cfg, level_totals, total)) {
      result.plans.push_back(detail::make_plan(groups, in_test, total));
      if (result.plans.size() >= cfg.max_plans) break;
    }
  }
  if (result.plans.empty()) {
    result.status = PartitionStatus::search_exhausted;
    result.diagnostic = "search exhausted: no valid assignment found in " +
                        std::to_string(cfg.max_plans * 10) +
                        " random candidates; feasibility unknown";
  }
  return result;
}

// Splits a dataset's rows by the plan's group assignment. Every observed
// group id must appear in the plan.
inline std::pair<Dataset, Dataset> materialize_split(const Dataset& d,
                                                     const PartitionPlan& plan) {
  if (!d.has_groups()) throw ValueError("materialize_split: dataset has no group column");
  std::map<std::string, bool> side;  // true = test
  for (const auto& g : plan.train_groups) side[g] = false;
  for (const auto& g : plan.test_groups) {
    if (!side.emplace(g, true).second) {
      throw ValueError("materialize_split: group '" + g + "' appears on both sides");
    }
  }
  std::vector<std::uint32_t> train_rows, test_rows;
  for (std::size_t r = 0; r < d.n_rows; ++r) {
    const auto it = side.find(d.group_ids[r]);
    if (it == side.end()) {
      throw ValueError("materialize_split: row group '" + d.group_ids[r] +
                       "' is absent from the plan");
    }
    if (it->second) {
      test_rows.push_back(static_cast<std::uint32_t>(r));
    } else {
      train_rows.push_back(static_cast<std::uint32_t>(r));
    }
  }
  return {take_rows(d, train_rows), take_rows(d, test_rows)};
}

}  // namespace glassgam
