#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cbandit/causal_model.hpp"
#include "cbandit/inference.hpp"
#include "cbandit/phase1.hpp"
#include "cbandit/rng.hpp"
#include "cbandit/simplex_optimizer.hpp"

namespace cbandit {

/// kPaper: the allocation comes from the min-max program and phase-1 samples
/// are discarded. kPractical: truncation off, phase-1 samples reused, and the
/// allocation is the argmax-frequency heuristic.
enum class PipelineMode { kPaper, kPractical };

struct Phase2Output {
  AlphaTable alpha_hat;
  std::vector<CountPair> counts;  ///< t', t_bar' per pair (merged with phase 1 in kPractical)
  EtaDistribution eta;            ///< allocation actually sampled from
  std::optional<SolverResult> solver;
  std::size_t experiments_used = 0;
};

/// Terms for every arm A, node n free under A, and pi outside D_n-down, with
/// offsets r = beta-hat_n(pi, best arm) / C.
RatioObjective build_allocation_objective(const Phase1Output& phase1, const Structure& structure);

/// Weight of A = (number of pairs whose argmax arm is A) / C.
EtaDistribution heuristic_eta(const Phase1Output& phase1, std::size_t arm_count);

/// Clips weights below 1e-12 to zero and renormalizes.
EtaDistribution clip_for_sampling(const EtaDistribution& eta);

/// Inverse-CDF draw over the arm order.
std::size_t sample_arm(const EtaDistribution& eta, Rng& rng);

/// Re-estimates alpha: per-pair experiments with the phase-1 argmax arms, then
/// floor(T/3) experiments drawn from the allocation. Every experiment updates
/// the tallies of every node the applied arm leaves free. Consumes
/// C * floor(T/(3C)) + floor(T/3) experiments.
Phase2Output run_phase2(Environment& env, const Structure& structure, const Phase1Output& phase1,
                        std::size_t horizon, PipelineMode mode, Rng& rng, const SolverConfig& solver = {});

}  // namespace cbandit
