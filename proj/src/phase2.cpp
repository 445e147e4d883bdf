#include "cbandit/phase2.hpp"

#include <algorithm>

#include "cbandit/error.hpp"

namespace cbandit {

RatioObjective build_allocation_objective(const Phase1Output& phase1, const Structure& structure) {
  const CausalDag& dag = structure.dag;
  const auto& arms = structure.interventions;
  const double c = static_cast<double>(dag.total_rows());
  RatioObjective objective(arms.size());
  MarginalEngine engine(dag);

  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    bool any_open = false;
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      any_open = any_open || !phase1.truncation.pair_truncated(n, mask);
    }
    if (!any_open) continue;
    const auto columns = beta_hat_columns(phase1, structure, n, engine);
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      if (phase1.truncation.pair_truncated(n, mask)) continue;
      std::vector<double> coefficients(arms.size());
      for (std::size_t a = 0; a < arms.size(); ++a) coefficients[a] = columns[a][mask];
      const double offset = phase1.best_beta[phase1.pairs(n, mask)] / c;
      const std::size_t channel = objective.add_channel(coefficients, offset);
      for (std::size_t a = 0; a < arms.size(); ++a) {
        if (!arms[a].is_free(n)) continue;
        const bool kept = objective.add_term(a, channel, coefficients[a] * coefficients[a]);
        if (kept && !(offset > 0.0)) {
          throw InternalError("term for node " + std::to_string(n) + " survives with a zero best beta-hat");
        }
      }
    }
  }
  return objective;
}

EtaDistribution heuristic_eta(const Phase1Output& phase1, std::size_t arm_count) {
  std::vector<std::size_t> hits(arm_count, 0);
  for (std::size_t a : phase1.best_arm) ++hits.at(a);
  const double c = static_cast<double>(phase1.best_arm.size());
  EtaDistribution eta{std::vector<double>(arm_count, 0.0)};
  for (std::size_t a = 0; a < arm_count; ++a) eta.weights[a] = static_cast<double>(hits[a]) / c;
  return eta;
}

EtaDistribution clip_for_sampling(const EtaDistribution& eta) {
  EtaDistribution out = eta;
  double total = 0.0;
  for (double& w : out.weights) {
    if (w < 1e-12) w = 0.0;
    total += w;
  }
  if (!(total > 0.0)) throw ParameterError("allocation has no mass to sample from");
  for (double& w : out.weights) w /= total;
  return out;
}

std::size_t sample_arm(const EtaDistribution& eta, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < eta.size(); ++a) {
    if (eta.weights[a] <= 0.0) continue;
    cumulative += eta.weights[a];
    last_positive = a;
    if (u < cumulative) return a;
  }
  return last_positive;  // rounding left u above the final cumulative sum
}

Phase2Output run_phase2(Environment& env, const Structure& structure, const Phase1Output& phase1,
                        std::size_t horizon, PipelineMode mode, Rng& rng, const SolverConfig& solver) {
  const CausalDag& dag = structure.dag;
  const auto& arms = structure.interventions;
  const std::size_t c = dag.total_rows();
  if (horizon < 3 * c) {
    throw BudgetError("horizon " + std::to_string(horizon) + " is below 3C = " + std::to_string(3 * c));
  }
  if (phase1.pairs.size() != c) throw ParameterError("phase-1 output belongs to a different graph");
  const std::size_t per_pair = horizon / (3 * c);
  const std::size_t used_before = env.experiments_used();

  Phase2Output out;
  out.counts.assign(c, {});

  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      const Intervention& arm = arms[phase1.best_arm[phase1.pairs(n, mask)]];
      for (std::size_t j = 0; j < per_pair; ++j) {
        tally_shared(dag, phase1.pairs, arm, env.intervene(arm), out.counts);
      }
    }
  }

  if (mode == PipelineMode::kPaper) {
    SolverResult result = minimize(build_allocation_objective(phase1, structure), solver);
    out.eta = result.eta;
    out.solver = std::move(result);
  } else {
    out.eta = heuristic_eta(phase1, arms.size());
  }
  const EtaDistribution sampling = clip_for_sampling(out.eta);
  for (std::size_t t = 0; t < horizon / 3; ++t) {
    const Intervention& arm = arms[sample_arm(sampling, rng)];
    tally_shared(dag, phase1.pairs, arm, env.intervene(arm), out.counts);
  }

  if (mode == PipelineMode::kPractical) {
    for (std::size_t p = 0; p < c; ++p) out.counts[p] += phase1.shared_counts[p];
  }

  out.alpha_hat = AlphaTable(dag);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      const CountPair& counts = out.counts[phase1.pairs(n, mask)];
      for (int value = 0; value <= 1; ++value) {
        const double estimate =
            phase1.truncation.d.contains(n, mask, value) ? 0.0 : check_alpha_update(counts, value);
        out.alpha_hat.set(n, mask, value, estimate);
      }
    }
  }
  out.experiments_used = env.experiments_used() - used_before;
  return out;
}

}  // namespace cbandit
