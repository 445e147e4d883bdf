#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cbandit/causal_model.hpp"
#include "cbandit/inference.hpp"

namespace cbandit {

/// t: experiments whose parents matched pi; t_bar: those that also had the
/// node at 1.
struct CountPair {
  std::size_t t = 0;
  std::size_t t_bar = 0;

  CountPair& operator+=(const CountPair& other) {
    t += other.t;
    t_bar += other.t_bar;
    return *this;
  }
};

/// Flat indexing of (node, parent mask) pairs in iteration order: node-major,
/// masks ascending. There are exactly C pairs.
class PairIndex {
 public:
  PairIndex() = default;
  explicit PairIndex(const CausalDag& dag);

  std::size_t size() const noexcept { return total_; }
  std::size_t operator()(NodeIndex n, std::uint64_t parent_mask) const {
    return offset_[n] + static_cast<std::size_t>(parent_mask);
  }
  std::size_t begin(NodeIndex n) const { return offset_[n]; }

 private:
  std::vector<std::size_t> offset_;
  std::size_t total_ = 0;
};

/// A subset of {0,1}^{P-bar_n} for every node n.
class RowSet {
 public:
  RowSet() = default;
  explicit RowSet(const CausalDag& dag);

  bool contains(NodeIndex n, std::uint64_t parent_mask, int value) const {
    return member_[n][index(n, parent_mask, value)] != 0;
  }
  void insert(NodeIndex n, std::uint64_t parent_mask, int value) { member_[n][index(n, parent_mask, value)] = 1; }
  std::size_t size() const noexcept;

 private:
  std::size_t index(NodeIndex n, std::uint64_t parent_mask, int value) const {
    return static_cast<std::size_t>(parent_mask) + (value != 0 ? member_[n].size() / 2 : 0);
  }
  std::vector<std::vector<std::uint8_t>> member_;
};

/// Rows zeroed by truncation: G from the per-row test, H from the
/// reachability test, D = G + H.
struct TruncationSets {
  RowSet g;
  RowSet h;
  RowSet d;

  /// pi in D_n-down: both extensions of pi lie in D_n.
  bool pair_truncated(NodeIndex n, std::uint64_t parent_mask) const {
    return d.contains(n, parent_mask, 0) && d.contains(n, parent_mask, 1);
  }
};

struct Phase1Output {
  PairIndex pairs;
  AlphaTable check_alpha;  ///< truncated estimate used only to compute beta-hat
  TruncationSets truncation;
  std::vector<CountPair> counts;         ///< per pair: matches among its own experiments
  std::vector<std::size_t> best_arm;     ///< per pair: index of the beta-hat argmax
  std::vector<double> best_beta;         ///< per pair: beta-hat at that argmax
  std::vector<CountPair> shared_counts;  ///< per pair: tallies over every phase-1 realization
  double lambda = 0.0;                   ///< 0 means truncation disabled
  double row_threshold = 0.0;            ///< 2e S(lambda)
  double reach_threshold = 0.0;          ///< 8e C^2 S(lambda)
  std::size_t experiments_used = 0;
};

/// S(lambda) = 12 lambda N^2 C log T / T (natural log).
double s_lambda(double lambda, std::size_t n_nodes, std::size_t c, std::size_t horizon);

/// Estimate t_bar/t for value 1 and 1 - t_bar/t for value 0; 0 when t = 0.
double check_alpha_update(const CountPair& counts, int value);

/// Sequential beta estimation with truncation. `lambda` <= 0 disables
/// truncation (G, H and D stay empty). Consumes C * floor(T/(3C))
/// experiments; throws BudgetError when T < 3C.
Phase1Output run_phase1(Environment& env, const Structure& structure, double lambda, std::size_t horizon);

/// beta-hat_n(., A) for every arm: row a holds the parent marginals of node n
/// under arm a computed from the check-alpha table.
std::vector<std::vector<double>> beta_hat_columns(const Phase1Output& phase1, const Structure& structure,
                                                  NodeIndex n, MarginalEngine& engine);

/// Adds the realization to the tallies of every node left free by `a`.
void tally_shared(const CausalDag& dag, const PairIndex& pairs, const Intervention& a, const Realization& omega,
                  std::vector<CountPair>& counts);

}  // namespace cbandit
