#include "cbandit/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "cbandit/bandit.hpp"
#include "cbandit/bif.hpp"
#include "cbandit/error.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParameterError("'" + std::string(key) + "' expects a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view text) {
  std::vector<std::size_t> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_unsigned(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ParameterError("'" + std::string(key) + "' expects a boolean, got '" + std::string(text) + "'");
}

std::size_t strategy_id(StrategyKind kind) { return static_cast<std::size_t>(kind); }

bool is_proposed(StrategyKind kind) {
  return kind == StrategyKind::kProposedPaper || kind == StrategyKind::kProposedPractical;
}

struct Cell {
  std::size_t budget_slot;
  std::size_t multiplier_slot;
  std::size_t strategy_slot;
  std::size_t trial;
};

struct CellResult {
  double regret = 0.0;
  double runtime_ms = 0.0;
  std::optional<std::string> error;
};

std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", x);
  return buffer;
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kProposedPaper: return "proposed-paper";
    case StrategyKind::kProposedPractical: return "proposed-practical";
    case StrategyKind::kSuccessiveRejects: return "successive-rejects";
    case StrategyKind::kUniform: return "uniform";
  }
  throw InternalError("unhandled strategy kind");
}

StrategyKind parse_strategy(std::string_view name) {
  for (StrategyKind kind : all_strategies()) {
    if (strategy_name(kind) == name) return kind;
  }
  throw ParameterError("unknown strategy '" + std::string(name) + "'");
}

const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> kinds{StrategyKind::kProposedPaper, StrategyKind::kProposedPractical,
                                               StrategyKind::kSuccessiveRejects, StrategyKind::kUniform};
  return kinds;
}

void validate(const ExperimentConfig& config) {
  if (config.trials < 1) throw ParameterError("trials must be at least 1");
  if (config.budgets.empty()) throw ParameterError("no budgets given");
  if (config.multipliers.empty()) throw ParameterError("no horizon multipliers given");
  if (config.strategies.empty()) throw ParameterError("no strategies given");
  if (config.workers < 1) throw ParameterError("workers must be at least 1");
  for (std::size_t b : config.budgets) {
    if (b == 0) throw ParameterError("budgets must be positive");
  }
  bool proposed = false;
  for (StrategyKind s : config.strategies) proposed = proposed || is_proposed(s);
  for (std::size_t m : config.multipliers) {
    if (m == 0) throw ParameterError("horizon multipliers must be positive");
    if (proposed && m < 3) {
      throw ParameterError("multiplier " + std::to_string(m) + " is below 3, which the proposed strategies need");
    }
  }
  if (config.source == SourceKind::kTree && (config.tree_height < 1 || config.tree_height > 20)) {
    throw ParameterError("tree height must lie in 1..20");
  }
  if (config.source == SourceKind::kBif && config.bif_path.empty()) throw ParameterError("no BIF path given");
}

void apply_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "source") {
    if (value == "tree") {
      config.source = SourceKind::kTree;
    } else if (value == "bif") {
      config.source = SourceKind::kBif;
    } else {
      throw ParameterError("source must be 'tree' or 'bif'");
    }
  } else if (key == "tree_height") {
    config.source = SourceKind::kTree;
    config.tree_height = static_cast<int>(parse_unsigned(key, value));
  } else if (key == "bif") {
    config.source = SourceKind::kBif;
    config.bif_path = std::string(value);
  } else if (key == "budgets") {
    config.budgets = parse_list(key, value);
  } else if (key == "multipliers") {
    config.multipliers = parse_list(key, value);
  } else if (key == "trials") {
    config.trials = parse_unsigned(key, value);
  } else if (key == "seed") {
    config.seed = parse_unsigned(key, value);
  } else if (key == "strategies") {
    config.strategies.clear();
    while (true) {
      const auto comma = value.find(',');
      config.strategies.push_back(parse_strategy(trim(value.substr(0, comma))));
      if (comma == std::string_view::npos) break;
      value.remove_prefix(comma + 1);
    }
  } else if (key == "fix_alpha") {
    config.fix_alpha = parse_bool(key, value);
  } else if (key == "timing") {
    config.timing = parse_bool(key, value);
  } else if (key == "workers") {
    config.workers = parse_unsigned(key, value);
  } else if (key == "budget_rule") {
    if (value == "exact") {
      config.budget_rule = BudgetRule::kExact;
    } else if (value == "up-to") {
      config.budget_rule = BudgetRule::kUpTo;
    } else {
      throw ParameterError("budget_rule must be 'exact' or 'up-to'");
    }
  } else if (key == "label") {
    config.label = std::string(value);
  } else {
    throw ParameterError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ParameterError& e) {
      throw ParameterError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig read_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::size_t workers_from_environment(std::size_t fallback) {
  const char* raw = std::getenv("CBANDIT_WORKERS");
  if (raw == nullptr) return fallback;
  const std::string_view text(raw);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) return fallback;
  return value;
}

SweepSource load_source(const ExperimentConfig& config) {
  SweepSource source;
  if (config.source == SourceKind::kTree) {
    BinaryTree tree = make_binary_tree(config.tree_height);
    source.label = "tree-h" + std::to_string(config.tree_height);
    source.dag = std::move(tree.dag);
    source.targets = std::move(tree.leaves);
    source.rule = BudgetRule::kExact;
  } else {
    const BifNetwork net = read_bif_file(config.bif_path);
    BifDag bif = to_causal_dag(net);
    source.label = net.name;
    const auto slash = config.bif_path.find_last_of('/');
    std::string stem = config.bif_path.substr(slash == std::string::npos ? 0 : slash + 1);
    if (const auto dot = stem.rfind('.'); dot != std::string::npos) stem.resize(dot);
    if (net.name.empty() || net.name == "unknown") source.label = stem;
    source.dag = std::move(bif.dag);
    source.targets = std::move(bif.targets);
    source.rule = BudgetRule::kUpTo;
  }
  if (config.budget_rule) source.rule = *config.budget_rule;
  if (!config.label.empty()) source.label = config.label;
  return source;
}

InterventionSet source_interventions(const SweepSource& source, std::size_t budget) {
  return enumerate_budget_interventions(source.dag, source.targets, budget, source.rule);
}

std::uint64_t alpha_seed(const ExperimentConfig& config, std::size_t budget, std::size_t trial) {
  if (config.fix_alpha) return derive_seed(config.seed, {0xa1fa});
  return derive_seed(config.seed, {0xa1fa, budget, trial});
}

std::uint64_t environment_seed(std::uint64_t base, std::size_t budget, std::size_t multiplier, StrategyKind strategy,
                               std::size_t trial) {
  return derive_seed(base, {budget, multiplier, strategy_id(strategy), trial});
}

std::string RegretReport::to_csv() const {
  std::string out = "instance,strategy,budget,horizon,trials,mean_regret,std_err,runtime_ms\n";
  for (const auto& row : rows) {
    out += row.instance + "," + std::string(strategy_name(row.strategy)) + "," + std::to_string(row.budget) + "," +
           std::to_string(row.horizon) + "," + std::to_string(row.trials) + ",";
    if (row.error) {
      out += "NA,NA,NA\n";
    } else {
      out += format_double(row.mean_regret) + "," + format_double(row.std_err) + "," +
             format_double(row.runtime_ms) + "\n";
    }
  }
  return out;
}

RegretReport run_sweep(const ExperimentConfig& config) {
  validate(config);
  const SweepSource source = load_source(config);
  const std::size_t c = source.dag.total_rows();

  std::vector<Structure> structures;
  std::vector<std::optional<std::string>> structure_errors;
  for (std::size_t b : config.budgets) {
    structures.push_back({source.dag, {}});
    try {
      structures.back().interventions = source_interventions(source, b);
      structure_errors.emplace_back();
    } catch (const Error& e) {
      structure_errors.emplace_back(e.what());
    }
  }

  std::vector<Cell> cells;
  for (std::size_t bi = 0; bi < config.budgets.size(); ++bi) {
    for (std::size_t mi = 0; mi < config.multipliers.size(); ++mi) {
      for (std::size_t si = 0; si < config.strategies.size(); ++si) {
        for (std::size_t t = 0; t < config.trials; ++t) cells.push_back({bi, mi, si, t});
      }
    }
  }

  auto run_cell = [&](const Cell& cell) {
    CellResult result;
    const std::size_t budget = config.budgets[cell.budget_slot];
    const std::size_t multiplier = config.multipliers[cell.multiplier_slot];
    const StrategyKind strategy = config.strategies[cell.strategy_slot];
    const Structure& structure = structures[cell.budget_slot];
    const std::size_t horizon = multiplier * c;
    if (structure_errors[cell.budget_slot]) {
      result.error = structure_errors[cell.budget_slot];
      return result;
    }
    try {
      const AlphaTable alpha = random_alpha(source.dag, alpha_seed(config, budget, cell.trial));
      const Instance instance = make_instance(source.dag, alpha, structure.interventions);
      const std::uint64_t seed = environment_seed(config.seed, budget, multiplier, strategy, cell.trial);
      SimulatedEnvironment env(instance, seed, horizon);

      const auto start = std::chrono::steady_clock::now();
      StrategyResult chosen;
      switch (strategy) {
        case StrategyKind::kProposedPaper:
        case StrategyKind::kProposedPractical: {
          CausalBanditOptions options;
          options.mode = strategy == StrategyKind::kProposedPaper ? PipelineMode::kPaper : PipelineMode::kPractical;
          options.seed = derive_seed(seed, {1});
          chosen = run_causal_bandit(env, structure, horizon, options);
          break;
        }
        case StrategyKind::kSuccessiveRejects:
          chosen = run_successive_rejects(env, structure, horizon, ShortBudget::kUniformFallback);
          break;
        case StrategyKind::kUniform:
          chosen = run_uniform_baseline(env, structure, horizon);
          break;
      }
      const auto stop = std::chrono::steady_clock::now();
      if (config.timing) result.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      const std::size_t pick[] = {chosen.chosen};
      result.regret = simple_regret(instance, pick);
    } catch (const Error& e) {
      result.error = e.what();
    }
    return result;
  };

  std::vector<CellResult> results(cells.size());
  const std::size_t workers = std::min(config.workers, std::max<std::size_t>(cells.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) results[i] = run_cell(cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(cells[i]);
      });
    }
    for (auto& thread : pool) thread.join();
  }

  RegretReport report;
  const std::size_t k = config.trials;
  for (std::size_t start = 0; start < cells.size(); start += k) {
    const Cell& cell = cells[start];
    ReportRow row;
    row.instance = source.label;
    row.strategy = config.strategies[cell.strategy_slot];
    row.budget = config.budgets[cell.budget_slot];
    row.horizon = config.multipliers[cell.multiplier_slot] * c;
    row.trials = k;
    double sum = 0.0;
    double time = 0.0;
    for (std::size_t i = start; i < start + k; ++i) {
      if (results[i].error && !row.error) row.error = results[i].error;
      sum += results[i].regret;
      time += results[i].runtime_ms;
    }
    row.mean_regret = sum / static_cast<double>(k);
    row.runtime_ms = time / static_cast<double>(k);
    if (k > 1) {
      double ss = 0.0;
      for (std::size_t i = start; i < start + k; ++i) {
        const double d = results[i].regret - row.mean_regret;
        ss += d * d;
      }
      row.std_err = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace cbandit
