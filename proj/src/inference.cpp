#include "cbandit/inference.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "cbandit/error.hpp"

namespace cbandit {

namespace {

constexpr std::size_t kClamped = std::numeric_limits<std::size_t>::max();

}  // namespace

bool Realization::in_success_set(const Intervention& a) const {
  if (a.size() != bits_.size() || bits_.empty()) return false;
  for (NodeIndex n = 0; n < bits_.size(); ++n) {
    if (!a.is_free(n) && bits_[n] != a.value(n)) return false;
  }
  return bits_.back() == 1;
}

MarginalEngine::MarginalEngine(CausalDag dag, std::size_t capacity) : dag_(std::move(dag)), capacity_(capacity) {}

const MarginalEngine::Plan& MarginalEngine::plan_for(std::size_t cutoff, std::span<const NodeIndex> query,
                                                     const Intervention& a) {
  std::string key;
  key.reserve(cutoff + 2 + query.size() * 3);
  key.append(std::to_string(cutoff)).push_back('|');
  for (NodeIndex q : query) key.append(std::to_string(q)).push_back(',');
  key.push_back('|');
  for (NodeIndex m = 0; m < cutoff; ++m) key.push_back(a.is_free(m) ? '*' : '#');
  if (auto it = plans_.find(key); it != plans_.end()) return *it->second;

  auto plan = std::make_unique<Plan>();
  std::vector<bool> queried(cutoff, false);
  for (NodeIndex q : query) queried[q] = true;

  // Edges into clamped nodes are cut, so only free children keep a node alive.
  std::vector<std::size_t> open_children(cutoff, 0);
  std::vector<std::size_t> open_parents(cutoff, 0);
  for (NodeIndex m = 0; m < cutoff; ++m) {
    if (!a.is_free(m)) continue;
    for (NodeIndex p : dag_.parents(m)) {
      if (a.is_free(p)) {
        ++open_children[p];
        ++open_parents[m];
      }
    }
  }

  std::vector<NodeIndex> frontier;
  std::vector<bool> done(cutoff, false);
  std::size_t remaining = 0;
  for (NodeIndex m = 0; m < cutoff; ++m) remaining += a.is_free(m) ? 1 : 0;

  while (remaining > 0) {
    NodeIndex best = kClamped;
    std::ptrdiff_t best_width = std::numeric_limits<std::ptrdiff_t>::max();
    for (NodeIndex m = 0; m < cutoff; ++m) {
      if (done[m] || !a.is_free(m) || open_parents[m] != 0) continue;
      std::ptrdiff_t width = static_cast<std::ptrdiff_t>(frontier.size());
      if (open_children[m] > 0 || queried[m]) ++width;
      for (NodeIndex p : dag_.parents(m)) {
        if (a.is_free(p) && open_children[p] == 1 && !queried[p]) --width;
      }
      if (width < best_width) {
        best_width = width;
        best = m;
      }
    }
    if (best == kClamped) throw InternalError("no absorbable node; parent lists are not topologically sorted");

    const NodeIndex m = best;
    Step step;
    step.node = m;
    const auto parents = dag_.parents(m);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const NodeIndex p = parents[i];
      if (a.is_free(p)) {
        const auto pos = static_cast<std::size_t>(std::find(frontier.begin(), frontier.end(), p) - frontier.begin());
        step.parent_sources.emplace_back(pos, i);
      } else {
        step.clamped_parents.emplace_back(p, i);
      }
    }
    frontier.push_back(m);
    done[m] = true;
    --remaining;
    widest_ = std::max(widest_, frontier.size());
    if (frontier.size() > capacity_) throw CapacityError(frontier.size(), capacity_);

    for (NodeIndex p : parents) {
      if (a.is_free(p)) --open_children[p];
    }
    for (NodeIndex c : dag_.children(m)) {
      if (c < cutoff && a.is_free(c)) --open_parents[c];
    }
    for (std::size_t pos = frontier.size(); pos-- > 0;) {
      const NodeIndex f = frontier[pos];
      if (open_children[f] == 0 && !queried[f]) step.eliminate.push_back(pos);
    }
    for (std::size_t pos : step.eliminate) frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pos));
    plan->steps.push_back(std::move(step));
  }

  for (NodeIndex q : query) {
    if (!a.is_free(q)) {
      plan->query_positions.push_back(kClamped);
    } else {
      const auto pos = static_cast<std::size_t>(std::find(frontier.begin(), frontier.end(), q) - frontier.begin());
      plan->query_positions.push_back(pos);
    }
  }
  auto [it, inserted] = plans_.emplace(std::move(key), std::move(plan));
  return *it->second;
}

std::vector<double> MarginalEngine::run(const Plan& plan, const AlphaTable& alpha, std::span<const NodeIndex> query,
                                        const Intervention& a) {
  state_.assign(1, 1.0);
  std::size_t width = 0;
  for (const Step& step : plan.steps) {
    const std::size_t size = state_.size();
    state_.resize(2 * size);
    const auto row = alpha.row(step.node);
    const std::size_t half = row.size() / 2;
    std::uint64_t clamped_bits = 0;
    for (const auto& [p, bit] : step.clamped_parents) clamped_bits |= static_cast<std::uint64_t>(a.value(p)) << bit;
    for (std::size_t s = 0; s < size; ++s) {
      std::uint64_t mask = clamped_bits;
      for (const auto& [pos, bit] : step.parent_sources) mask |= static_cast<std::uint64_t>((s >> pos) & 1U) << bit;
      const double w = state_[s];
      state_[s + size] = w * row[mask + half];
      state_[s] = w * row[mask];
    }
    ++width;
    for (std::size_t j : step.eliminate) {
      const std::size_t new_size = std::size_t{1} << (width - 1);
      const std::size_t low = (std::size_t{1} << j) - 1;
      for (std::size_t s = 0; s < new_size; ++s) {
        const std::size_t base = ((s & ~low) << 1) | (s & low);
        state_[s] = state_[base] + state_[base | (std::size_t{1} << j)];
      }
      state_.resize(new_size);
      --width;
    }
  }

  std::uint64_t constant_query = 0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    if (plan.query_positions[i] == kClamped) constant_query |= static_cast<std::uint64_t>(a.value(query[i])) << i;
  }
  std::vector<double> out(std::size_t{1} << query.size(), 0.0);
  for (std::size_t s = 0; s < state_.size(); ++s) {
    std::uint64_t q = constant_query;
    for (std::size_t i = 0; i < query.size(); ++i) {
      const std::size_t pos = plan.query_positions[i];
      if (pos != kClamped) q |= static_cast<std::uint64_t>((s >> pos) & 1U) << i;
    }
    out[q] += state_[s];
  }
  return out;
}

std::vector<double> MarginalEngine::parent_marginals(const AlphaTable& alpha, NodeIndex n, const Intervention& a) {
  if (n >= dag_.node_count()) throw ParameterError("node index out of range");
  if (a.size() != dag_.node_count()) throw ParameterError("intervention length does not match the graph");
  const auto parents = dag_.parents(n);
  if (!a.is_free(n)) return std::vector<double>(std::size_t{1} << parents.size(), 0.0);
  const Plan& plan = plan_for(n, parents, a);
  return run(plan, alpha, parents, a);
}

double MarginalEngine::mu(const AlphaTable& alpha, const Intervention& a) {
  if (a.size() != dag_.node_count()) throw ParameterError("intervention length does not match the graph");
  const NodeIndex target = dag_.target();
  const std::array<NodeIndex, 1> query{target};
  const Plan& plan = plan_for(dag_.node_count(), query, a);
  return run(plan, alpha, query, a)[1];
}

namespace {

std::uint64_t parent_mask_of(const CausalDag& dag, NodeIndex n, const ParentRealization& pi) {
  const auto parents = dag.parents(n);
  if (!std::equal(parents.begin(), parents.end(), pi.scope.begin(), pi.scope.end())) {
    throw ScopeError("parent realization is not scoped to the parents of node " + std::to_string(n));
  }
  return pi.bits;
}

}  // namespace

double beta_from_alpha(const AlphaTable& alpha, const CausalDag& dag, NodeIndex n, const ParentRealization& pi,
                       const Intervention& a) {
  const std::uint64_t mask = parent_mask_of(dag, n, pi);
  MarginalEngine engine(dag);
  return engine.beta(alpha, n, mask, a);
}

double mu_from_alpha(const AlphaTable& alpha, const CausalDag& dag, const Intervention& a) {
  MarginalEngine engine(dag);
  return engine.mu(alpha, a);
}

double exact_mu(const Instance& instance, const Intervention& a) {
  return mu_from_alpha(instance.alpha, instance.dag(), a);
}

double exact_beta(const Instance& instance, NodeIndex n, const ParentRealization& pi, const Intervention& a) {
  return beta_from_alpha(instance.alpha, instance.dag(), n, pi, a);
}

Realization sample(const CausalDag& dag, const AlphaTable& alpha, const Intervention& a, Rng& rng) {
  if (a.size() != dag.node_count()) throw ParameterError("intervention length does not match the graph");
  Realization omega(dag.node_count());
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    if (!a.is_free(n)) {
      omega.set(n, a.value(n));
      continue;
    }
    const std::uint64_t mask = omega.mask(dag.parents(n));
    omega.set(n, rng.bernoulli(alpha(n, mask, 1)) ? 1 : 0);
  }
  return omega;
}

Realization sample(const Instance& instance, const Intervention& a, Rng& rng) {
  return sample(instance.dag(), instance.alpha, a, rng);
}

Realization Environment::intervene(const Intervention& a) {
  if (capacity_ && used_ >= *capacity_) {
    throw BudgetError("environment exhausted after " + std::to_string(used_) + " experiments");
  }
  ++used_;
  return do_intervene(a);
}

Realization SimulatedEnvironment::do_intervene(const Intervention& a) { return sample(dag_, alpha_, a, rng_); }

}  // namespace cbandit
