#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cbandit/causal_model.hpp"
#include "cbandit/inference.hpp"
#include "cbandit/phase1.hpp"
#include "cbandit/phase2.hpp"
#include "cbandit/simplex_optimizer.hpp"

namespace cbandit {

/// Outcome of one best-arm identification run. Strategies only ever see a
/// Structure and an Environment, never the true alpha.
struct StrategyResult {
  std::size_t chosen = 0;  ///< index into the intervention set
  std::vector<double> mu_hat;
  std::size_t experiments_used = 0;
};

struct CausalBanditOptions {
  PipelineMode mode = PipelineMode::kPaper;
  /// Truncation parameter for kPaper; defaults to C^3 / N. Ignored by
  /// kPractical, which always runs without truncation.
  std::optional<double> lambda;
  SolverConfig solver;
  std::uint64_t seed = 0;  ///< drives the allocation sampling in phase 2
};

struct CausalBanditRun {
  Phase1Output phase1;
  Phase2Output phase2;
  StrategyResult result;
};

/// Index of the largest entry, lowest index on ties.
std::size_t argmax_lowest(std::span<const double> values);

/// Two-phase estimation, then argmax of mu-hat computed from alpha-hat.
CausalBanditRun run_causal_bandit_detailed(Environment& env, const Structure& structure, std::size_t horizon,
                                           const CausalBanditOptions& options = {});
StrategyResult run_causal_bandit(Environment& env, const Structure& structure, std::size_t horizon,
                                 const CausalBanditOptions& options = {});

/// Round-robin: arm t mod K on experiment t, for t < T. Unpulled arms keep
/// mu-hat = 0.
StrategyResult run_uniform_baseline(Environment& env, const Structure& structure, std::size_t horizon);

/// What Successive Rejects does when T < K.
enum class ShortBudget {
  kReject,          ///< throw BudgetError
  kUniformFallback  ///< pull the first T arms once each, as the uniform baseline would
};

/// Successive Rejects: K-1 phases with n_k = ceil((T-K) / (logbar(K) (K+1-k))).
/// The worst surviving arm (lowest index on ties) is dropped after each
/// phase. mu-hat of a rejected arm is its mean when rejected.
StrategyResult run_successive_rejects(Environment& env, const Structure& structure, std::size_t horizon,
                                      ShortBudget short_budget = ShortBudget::kReject);

/// Pull schedule n_1..n_{K-1} of Successive Rejects.
std::vector<std::size_t> successive_rejects_schedule(std::size_t arms, std::size_t horizon);

/// mu(A) for every arm of the instance.
std::vector<double> exact_mu_all(const Instance& instance);

/// mu(A*) - mean over runs of mu(chosen).
double simple_regret(const Instance& instance, std::span<const std::size_t> chosen);
double simple_regret(std::span<const double> mu, std::span<const std::size_t> chosen);

}  // namespace cbandit
