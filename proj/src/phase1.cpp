#include "cbandit/phase1.hpp"

#include <cmath>
#include <numbers>

#include "cbandit/error.hpp"

namespace cbandit {

PairIndex::PairIndex(const CausalDag& dag) : offset_(dag.node_count()) {
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    offset_[n] = total_;
    total_ += dag.row_count(n);
  }
}

RowSet::RowSet(const CausalDag& dag) {
  member_.reserve(dag.node_count());
  for (NodeIndex n = 0; n < dag.node_count(); ++n) member_.emplace_back(2 * dag.row_count(n), 0);
}

std::size_t RowSet::size() const noexcept {
  std::size_t total = 0;
  for (const auto& row : member_) {
    for (auto m : row) total += m;
  }
  return total;
}

double s_lambda(double lambda, std::size_t n_nodes, std::size_t c, std::size_t horizon) {
  if (!(lambda > 0.0) || n_nodes == 0 || c == 0) throw ParameterError("S(lambda) needs positive lambda, N and C");
  if (horizon < 2) throw ParameterError("S(lambda) needs T >= 2");
  const double n = static_cast<double>(n_nodes);
  const double t = static_cast<double>(horizon);
  return 12.0 * lambda * n * n * static_cast<double>(c) * std::log(t) / t;
}

double check_alpha_update(const CountPair& counts, int value) {
  if (counts.t == 0) return 0.0;
  const double ratio = static_cast<double>(counts.t_bar) / static_cast<double>(counts.t);
  return value != 0 ? ratio : 1.0 - ratio;
}

void tally_shared(const CausalDag& dag, const PairIndex& pairs, const Intervention& a, const Realization& omega,
                  std::vector<CountPair>& counts) {
  for (NodeIndex m = 0; m < dag.node_count(); ++m) {
    if (!a.is_free(m)) continue;
    CountPair& c = counts[pairs(m, omega.mask(dag.parents(m)))];
    ++c.t;
    if (omega[m] == 1) ++c.t_bar;
  }
}

std::vector<std::vector<double>> beta_hat_columns(const Phase1Output& phase1, const Structure& structure,
                                                  NodeIndex n, MarginalEngine& engine) {
  std::vector<std::vector<double>> out;
  out.reserve(structure.interventions.size());
  for (const Intervention& a : structure.interventions) {
    out.push_back(engine.parent_marginals(phase1.check_alpha, n, a));
  }
  return out;
}

Phase1Output run_phase1(Environment& env, const Structure& structure, double lambda, std::size_t horizon) {
  const CausalDag& dag = structure.dag;
  const auto& arms = structure.interventions;
  if (arms.empty()) throw ParameterError("intervention set is empty");
  const std::size_t c = dag.total_rows();
  if (horizon < 3 * c) {
    throw BudgetError("horizon " + std::to_string(horizon) + " is below 3C = " + std::to_string(3 * c));
  }
  const std::size_t per_pair = horizon / (3 * c);
  const bool truncate = lambda > 0.0;

  Phase1Output out;
  out.pairs = PairIndex(dag);
  out.check_alpha = AlphaTable(dag);
  out.truncation = {RowSet(dag), RowSet(dag), RowSet(dag)};
  out.counts.assign(c, {});
  out.best_arm.assign(c, 0);
  out.best_beta.assign(c, 0.0);
  out.shared_counts.assign(c, {});
  out.lambda = truncate ? lambda : 0.0;
  if (truncate) {
    const double s = s_lambda(lambda, dag.node_count(), c, horizon);
    out.row_threshold = 2.0 * std::numbers::e * s;
    out.reach_threshold = 8.0 * std::numbers::e * static_cast<double>(c * c) * s;
  }

  MarginalEngine engine(dag);
  const std::size_t used_before = env.experiments_used();
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    // beta-hat_n only depends on check-alpha rows of nodes below n, which are final here.
    const auto columns = beta_hat_columns(out, structure, n, engine);
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      const std::size_t pair = out.pairs(n, mask);
      for (std::size_t a = 0; a < arms.size(); ++a) {
        if (columns[a][mask] > out.best_beta[pair]) {
          out.best_beta[pair] = columns[a][mask];
          out.best_arm[pair] = a;
        }
      }
    }

    const auto parents = dag.parents(n);
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      const std::size_t pair = out.pairs(n, mask);
      const Intervention& arm = arms[out.best_arm[pair]];
      CountPair& counts = out.counts[pair];
      for (std::size_t j = 0; j < per_pair; ++j) {
        const Realization omega = env.intervene(arm);
        tally_shared(dag, out.pairs, arm, omega, out.shared_counts);
        if (omega.mask(parents) != mask) continue;
        ++counts.t;
        if (omega[n] == 1) ++counts.t_bar;
      }
      for (int value = 0; value <= 1; ++value) {
        const double estimate = check_alpha_update(counts, value);
        if (truncate && estimate * out.best_beta[pair] <= out.row_threshold) {
          out.truncation.g.insert(n, mask, value);
          out.check_alpha.set(n, mask, value, 0.0);
        } else {
          out.check_alpha.set(n, mask, value, estimate);
        }
      }
    }
  }

  if (truncate) {
    for (NodeIndex n = 0; n < dag.node_count(); ++n) {
      for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
        const bool unreachable = out.best_beta[out.pairs(n, mask)] <= out.reach_threshold;
        for (int value = 0; value <= 1; ++value) {
          if (unreachable) out.truncation.h.insert(n, mask, value);
          if (unreachable || out.truncation.g.contains(n, mask, value)) out.truncation.d.insert(n, mask, value);
        }
      }
    }
  }
  out.experiments_used = env.experiments_used() - used_before;
  return out;
}

}  // namespace cbandit
