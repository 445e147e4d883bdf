#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbandit/causal_model.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

/// Largest number of free frontier nodes the exact engine will hold at once.
inline constexpr std::size_t kDefaultFrontierCapacity = 20;

/// Full observation omega in {0,1}^N.
class Realization {
 public:
  Realization() = default;
  explicit Realization(std::size_t n) : bits_(n, 0) {}

  std::size_t size() const noexcept { return bits_.size(); }
  int operator[](NodeIndex n) const { return bits_[n]; }
  void set(NodeIndex n, int value) { bits_[n] = static_cast<std::uint8_t>(value != 0); }

  /// Positional bit-mask of the values on `scope` (bit i = value of scope[i]).
  std::uint64_t mask(std::span<const NodeIndex> scope) const {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < scope.size(); ++i) m |= std::uint64_t{bits_[scope[i]]} << i;
    return m;
  }

  /// Membership in B(A): consistent with every clamp of `a` and V_N = 1.
  bool in_success_set(const Intervention& a) const;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Exact evaluator of the sums over realizations behind mu and beta, for an
/// arbitrary (possibly truncated or estimated) alpha table.
///
/// Free nodes below a cut-off are absorbed one at a time into a dense joint
/// over the "frontier": absorbed free nodes that still have unabsorbed free
/// children or are queried. Clamped nodes never enter the joint. The absorb
/// order is chosen greedily to keep the frontier narrow and is cached per
/// (cut-off, query, free-node pattern). Not thread-safe; use one engine per
/// worker.
class MarginalEngine {
 public:
  explicit MarginalEngine(CausalDag dag, std::size_t capacity = kDefaultFrontierCapacity);

  const CausalDag& dag() const noexcept { return dag_; }

  /// Sum over realizations of V_1..V_{n-1} consistent with `a`, of the
  /// product of alpha over the free nodes, split by the realization of P_n.
  /// Entry `mask` is beta_n(pi, A) for the positional parent mask of pi.
  /// All zeros when A_n is clamped.
  std::vector<double> parent_marginals(const AlphaTable& alpha, NodeIndex n, const Intervention& a);

  double beta(const AlphaTable& alpha, NodeIndex n, std::uint64_t parent_mask, const Intervention& a) {
    return parent_marginals(alpha, n, a)[parent_mask];
  }

  /// Sum over B(A) of the product of alpha over the free nodes.
  double mu(const AlphaTable& alpha, const Intervention& a);

  /// Widest frontier any plan built so far has needed.
  std::size_t widest_frontier() const noexcept { return widest_; }

 private:
  struct Step {
    NodeIndex node;
    std::vector<std::pair<NodeIndex, std::size_t>> clamped_parents;  // (node, parent bit); values come from A
    std::vector<std::pair<std::size_t, std::size_t>> parent_sources;  // (frontier pos, parent bit)
    std::vector<std::size_t> eliminate;  // frontier positions, descending
  };
  struct Plan {
    std::vector<Step> steps;
    std::vector<std::size_t> query_positions;  // per query node: frontier pos, or npos if clamped
  };

  const Plan& plan_for(std::size_t cutoff, std::span<const NodeIndex> query, const Intervention& a);
  std::vector<double> run(const Plan& plan, const AlphaTable& alpha, std::span<const NodeIndex> query,
                          const Intervention& a);

  CausalDag dag_;
  std::size_t capacity_;
  std::size_t widest_ = 0;
  std::unordered_map<std::string, std::unique_ptr<Plan>> plans_;
  std::vector<double> state_;
};

/// mu(A) = Prob(V_N = 1 | do(A)) for the instance's true alpha.
double exact_mu(const Instance& instance, const Intervention& a);

/// beta_n(pi, A); `pi` must be scoped to P_n.
double exact_beta(const Instance& instance, NodeIndex n, const ParentRealization& pi, const Intervention& a);

/// beta-style sum with an arbitrary table in place of the true alpha.
double beta_from_alpha(const AlphaTable& alpha, const CausalDag& dag, NodeIndex n, const ParentRealization& pi,
                       const Intervention& a);

/// mu-style sum with an arbitrary table in place of the true alpha.
double mu_from_alpha(const AlphaTable& alpha, const CausalDag& dag, const Intervention& a);

/// Forward sample under do(a): nodes in index order, clamped nodes take their
/// clamp, free nodes are Bernoulli(alpha_n(parents, 1)).
Realization sample(const CausalDag& dag, const AlphaTable& alpha, const Intervention& a, Rng& rng);
Realization sample(const Instance& instance, const Intervention& a, Rng& rng);

/// The interface strategies experiment through. Each call to intervene()
/// consumes one experiment from the ledger.
class Environment {
 public:
  virtual ~Environment() = default;

  /// Throws BudgetError once an optional capacity is exhausted.
  Realization intervene(const Intervention& a);

  std::size_t experiments_used() const noexcept { return used_; }
  std::optional<std::size_t> capacity() const noexcept { return capacity_; }
  virtual std::size_t node_count() const = 0;

 protected:
  explicit Environment(std::optional<std::size_t> capacity) : capacity_(capacity) {}
  virtual Realization do_intervene(const Intervention& a) = 0;

 private:
  std::optional<std::size_t> capacity_;
  std::size_t used_ = 0;
};

/// Environment backed by a known instance and a seeded random stream.
class SimulatedEnvironment final : public Environment {
 public:
  SimulatedEnvironment(const Instance& instance, std::uint64_t seed,
                       std::optional<std::size_t> capacity = std::nullopt)
      : Environment(capacity), dag_(instance.dag()), alpha_(instance.alpha), rng_(seed) {}

  std::size_t node_count() const override { return dag_.node_count(); }

 protected:
  Realization do_intervene(const Intervention& a) override;

 private:
  CausalDag dag_;
  AlphaTable alpha_;
  Rng rng_;
};

}  // namespace cbandit
