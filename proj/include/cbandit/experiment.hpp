#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbandit/causal_model.hpp"

namespace cbandit {

enum class StrategyKind { kProposedPaper, kProposedPractical, kSuccessiveRejects, kUniform };

std::string_view strategy_name(StrategyKind kind);
/// Throws ParameterError for unknown names.
StrategyKind parse_strategy(std::string_view name);
const std::vector<StrategyKind>& all_strategies();

enum class SourceKind { kTree, kBif };

struct ExperimentConfig {
  SourceKind source = SourceKind::kTree;
  int tree_height = 4;
  std::string bif_path;
  std::vector<std::size_t> budgets{2, 4, 8};
  std::vector<std::size_t> multipliers{3, 4, 5, 6, 7, 8, 9};  ///< T = m * C
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::vector<StrategyKind> strategies{StrategyKind::kProposedPractical, StrategyKind::kSuccessiveRejects};
  bool fix_alpha = false;  ///< one alpha for every trial instead of a fresh one per trial
  bool timing = false;     ///< fill runtime_ms; off keeps the CSV reproducible
  std::size_t workers = 1;
  /// Defaults: exact for trees, up-to for BIF networks.
  std::optional<BudgetRule> budget_rule;
  std::string label;  ///< instance column; derived from the source when empty
};

/// Throws ParameterError describing the first problem.
void validate(const ExperimentConfig& config);

/// Applies `key = value` lines (blank lines and `#` comments ignored) on top
/// of `base`. Keys: source, tree_height, bif, budgets, multipliers, trials,
/// seed, strategies, fix_alpha, timing, workers, budget_rule, label.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig read_config_file(const std::string& path, ExperimentConfig base = {});
/// Applies a single key/value pair.
void apply_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Worker count from CBANDIT_WORKERS, or `fallback` when unset or invalid.
std::size_t workers_from_environment(std::size_t fallback = 1);

/// Graph, intervention targets and budget rule of a configured source.
struct SweepSource {
  std::string label;
  CausalDag dag;
  std::vector<NodeIndex> targets;
  BudgetRule rule = BudgetRule::kExact;
};

SweepSource load_source(const ExperimentConfig& config);
InterventionSet source_interventions(const SweepSource& source, std::size_t budget);

struct ReportRow {
  std::string instance;
  StrategyKind strategy = StrategyKind::kUniform;
  std::size_t budget = 0;
  std::size_t horizon = 0;
  std::size_t trials = 0;
  double mean_regret = 0.0;
  double std_err = 0.0;
  double runtime_ms = 0.0;
  std::optional<std::string> error;  ///< set when any trial of the row failed
};

struct RegretReport {
  std::vector<ReportRow> rows;

  std::string to_csv() const;
};

/// Seeds of one sweep cell.
std::uint64_t alpha_seed(const ExperimentConfig& config, std::size_t budget, std::size_t trial);
std::uint64_t environment_seed(std::uint64_t base, std::size_t budget, std::size_t multiplier, StrategyKind strategy,
                               std::size_t trial);

/// Rows ordered by (budget, multiplier, strategy). Cells run on
/// `config.workers` threads; the output does not depend on the worker count.
RegretReport run_sweep(const ExperimentConfig& config);

}  // namespace cbandit
