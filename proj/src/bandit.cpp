#include "cbandit/bandit.hpp"

#include <algorithm>
#include <cmath>

#include "cbandit/error.hpp"

namespace cbandit {

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

CausalBanditRun run_causal_bandit_detailed(Environment& env, const Structure& structure, std::size_t horizon,
                                           const CausalBanditOptions& options) {
  const CausalDag& dag = structure.dag;
  const std::size_t used_before = env.experiments_used();
  double lambda = 0.0;
  if (options.mode == PipelineMode::kPaper) {
    const double c = static_cast<double>(dag.total_rows());
    lambda = options.lambda.value_or(c * c * c / static_cast<double>(dag.node_count()));
  }

  Rng rng(options.seed);
  CausalBanditRun run{run_phase1(env, structure, lambda, horizon), {}, {}};
  run.phase2 = run_phase2(env, structure, run.phase1, horizon, options.mode, rng, options.solver);

  MarginalEngine engine(dag);
  run.result.mu_hat.reserve(structure.interventions.size());
  for (const Intervention& a : structure.interventions) {
    run.result.mu_hat.push_back(engine.mu(run.phase2.alpha_hat, a));
  }
  run.result.chosen = argmax_lowest(run.result.mu_hat);
  run.result.experiments_used = env.experiments_used() - used_before;
  return run;
}

StrategyResult run_causal_bandit(Environment& env, const Structure& structure, std::size_t horizon,
                                 const CausalBanditOptions& options) {
  return run_causal_bandit_detailed(env, structure, horizon, options).result;
}

StrategyResult run_uniform_baseline(Environment& env, const Structure& structure, std::size_t horizon) {
  const auto& arms = structure.interventions;
  if (arms.empty()) throw ParameterError("intervention set is empty");
  const NodeIndex target = structure.dag.target();
  const std::size_t used_before = env.experiments_used();
  std::vector<std::size_t> pulls(arms.size(), 0);
  std::vector<std::size_t> wins(arms.size(), 0);
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t a = t % arms.size();
    ++pulls[a];
    wins[a] += static_cast<std::size_t>(env.intervene(arms[a])[target]);
  }
  StrategyResult result;
  result.mu_hat.resize(arms.size(), 0.0);
  for (std::size_t a = 0; a < arms.size(); ++a) {
    if (pulls[a] > 0) result.mu_hat[a] = static_cast<double>(wins[a]) / static_cast<double>(pulls[a]);
  }
  result.chosen = argmax_lowest(result.mu_hat);
  result.experiments_used = env.experiments_used() - used_before;
  return result;
}

std::vector<std::size_t> successive_rejects_schedule(std::size_t arms, std::size_t horizon) {
  if (arms < 2) throw ParameterError("Successive Rejects needs at least two arms");
  if (horizon < arms) throw BudgetError("Successive Rejects needs T >= K");
  double log_bar = 0.5;
  for (std::size_t i = 2; i <= arms; ++i) log_bar += 1.0 / static_cast<double>(i);
  std::vector<std::size_t> n(arms - 1);
  const double spare = static_cast<double>(horizon - arms);
  for (std::size_t k = 1; k < arms; ++k) {
    n[k - 1] = static_cast<std::size_t>(std::ceil(spare / (log_bar * static_cast<double>(arms + 1 - k))));
  }
  return n;
}

StrategyResult run_successive_rejects(Environment& env, const Structure& structure, std::size_t horizon,
                                      ShortBudget short_budget) {
  const auto& arms = structure.interventions;
  const std::size_t k = arms.size();
  if (k == 0) throw ParameterError("intervention set is empty");
  if (horizon < k) {
    if (short_budget == ShortBudget::kUniformFallback) return run_uniform_baseline(env, structure, horizon);
    throw BudgetError("Successive Rejects needs T >= K (T = " + std::to_string(horizon) +
                      ", K = " + std::to_string(k) + ")");
  }
  StrategyResult result;
  result.mu_hat.assign(k, 0.0);
  if (k == 1) return result;

  const NodeIndex target = structure.dag.target();
  const std::size_t used_before = env.experiments_used();
  const auto schedule = successive_rejects_schedule(k, horizon);
  std::vector<std::size_t> pulls(k, 0);
  std::vector<std::size_t> wins(k, 0);
  std::vector<std::size_t> alive(k);
  for (std::size_t a = 0; a < k; ++a) alive[a] = a;

  auto mean = [&](std::size_t a) {
    return pulls[a] == 0 ? 0.0 : static_cast<double>(wins[a]) / static_cast<double>(pulls[a]);
  };

  std::size_t previous = 0;
  for (std::size_t phase = 0; phase + 1 < k; ++phase) {
    const std::size_t extra = schedule[phase] - previous;
    previous = schedule[phase];
    for (std::size_t a : alive) {
      for (std::size_t j = 0; j < extra; ++j) {
        ++pulls[a];
        wins[a] += static_cast<std::size_t>(env.intervene(arms[a])[target]);
      }
    }
    std::size_t worst = 0;
    for (std::size_t i = 1; i < alive.size(); ++i) {
      if (mean(alive[i]) < mean(alive[worst])) worst = i;
    }
    result.mu_hat[alive[worst]] = mean(alive[worst]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  result.chosen = alive.front();
  result.mu_hat[result.chosen] = mean(result.chosen);
  result.experiments_used = env.experiments_used() - used_before;
  return result;
}

std::vector<double> exact_mu_all(const Instance& instance) {
  MarginalEngine engine(instance.dag());
  std::vector<double> mu;
  mu.reserve(instance.interventions().size());
  for (const Intervention& a : instance.interventions()) mu.push_back(engine.mu(instance.alpha, a));
  return mu;
}

double simple_regret(std::span<const double> mu, std::span<const std::size_t> chosen) {
  if (mu.empty() || chosen.empty()) throw ParameterError("simple regret needs arms and at least one run");
  const double best = *std::max_element(mu.begin(), mu.end());
  double total = 0.0;
  for (std::size_t a : chosen) total += mu[a];
  return std::clamp(best - total / static_cast<double>(chosen.size()), 0.0, 1.0);
}

double simple_regret(const Instance& instance, std::span<const std::size_t> chosen) {
  const auto mu = exact_mu_all(instance);
  return simple_regret(mu, chosen);
}

}  // namespace cbandit
