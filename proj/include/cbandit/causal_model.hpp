#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbandit {

using NodeIndex = std::size_t;

/// One entry of an intervention vector: * (free), 0 or 1.
enum class Clamp : std::int8_t { kFree = -1, kZero = 0, kOne = 1 };

/// Hard intervention A in {*,0,1}^N.
class Intervention {
 public:
  Intervention() = default;
  explicit Intervention(std::vector<Clamp> assignment) : assignment_(std::move(assignment)) {}

  /// The empty intervention (every node free) on `n` nodes.
  static Intervention observational(std::size_t n) {
    return Intervention(std::vector<Clamp>(n, Clamp::kFree));
  }

  /// Parses "*01*"-style text; throws ParameterError on other characters.
  static Intervention parse(std::string_view text);

  std::size_t size() const noexcept { return assignment_.size(); }
  Clamp operator[](NodeIndex n) const { return assignment_[n]; }
  bool is_free(NodeIndex n) const { return assignment_[n] == Clamp::kFree; }
  /// 0 or 1; only meaningful when !is_free(n).
  int value(NodeIndex n) const { return assignment_[n] == Clamp::kOne ? 1 : 0; }
  void set(NodeIndex n, Clamp c) { assignment_[n] = c; }

  /// |A|: number of intervened nodes.
  std::size_t intervened_count() const noexcept;

  std::string to_string() const;

  friend bool operator==(const Intervention&, const Intervention&) = default;

 private:
  std::vector<Clamp> assignment_;
};

using InterventionSet = std::vector<Intervention>;

/// Binary-variable DAG with per-node parent lists. Node indices are expected to
/// be topologically sorted (every parent index below the child's); the
/// constructor does not enforce this so that `validate` can report problems.
class CausalDag {
 public:
  CausalDag() = default;
  explicit CausalDag(std::vector<std::vector<NodeIndex>> parents);

  std::size_t node_count() const noexcept { return parents_.size(); }
  NodeIndex target() const noexcept { return parents_.size() - 1; }

  std::span<const NodeIndex> parents(NodeIndex n) const { return parents_[n]; }
  /// Children that are valid node indices.
  std::span<const NodeIndex> children(NodeIndex n) const { return children_[n]; }
  std::size_t parent_count(NodeIndex n) const { return parents_[n].size(); }

  /// C_n = 2^{|P_n|}.
  std::size_t row_count(NodeIndex n) const { return std::size_t{1} << parents_[n].size(); }
  /// C = sum over n of C_n.
  std::size_t total_rows() const noexcept;

  /// Nodes with an empty parent list, ascending.
  std::vector<NodeIndex> parentless() const;

  const std::vector<std::vector<NodeIndex>>& parent_lists() const noexcept { return parents_; }

 private:
  std::vector<std::vector<NodeIndex>> parents_;
  std::vector<std::vector<NodeIndex>> children_;
};

/// Assignment of bits to a sorted node-index scope. Bit i of `bits` is the
/// value of node scope[i].
struct ParentRealization {
  std::vector<NodeIndex> scope;
  std::uint64_t bits = 0;

  int bit(std::size_t position) const { return static_cast<int>((bits >> position) & 1U); }
};

/// pi_S: restriction of `pi` onto `sub_scope` (throws ScopeError if not a subset).
ParentRealization restrict(const ParentRealization& pi, std::span<const NodeIndex> sub_scope);

/// Conditional probabilities alpha_n(pi-bar) for every node and every
/// realization of P-bar_n = P_n + {n}. Rows are laid out positionally: the
/// parent mask occupies the low |P_n| bits and the node's own value the next.
class AlphaTable {
 public:
  AlphaTable() = default;
  /// Zero-filled table shaped for `dag`.
  explicit AlphaTable(const CausalDag& dag);
  explicit AlphaTable(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {}

  std::size_t node_count() const noexcept { return rows_.size(); }

  double operator()(NodeIndex n, std::uint64_t parent_mask, int value) const {
    return rows_[n][index(n, parent_mask, value)];
  }
  void set(NodeIndex n, std::uint64_t parent_mask, int value, double p) {
    rows_[n][index(n, parent_mask, value)] = p;
  }

  /// Full row for node n, 2^{|P_n|+1} entries.
  std::span<const double> row(NodeIndex n) const { return rows_[n]; }
  std::vector<double>& mutable_row(NodeIndex n) { return rows_[n]; }

  /// Number of parent realizations the row of node n covers.
  std::size_t parent_masks(NodeIndex n) const { return rows_[n].size() / 2; }

 private:
  std::size_t index(NodeIndex n, std::uint64_t parent_mask, int value) const {
    return static_cast<std::size_t>(parent_mask) + (value != 0 ? rows_[n].size() / 2 : 0);
  }

  std::vector<std::vector<double>> rows_;
};

/// What a strategy is allowed to see: the graph and the arms, never alpha.
struct Structure {
  CausalDag dag;
  InterventionSet interventions;
};

/// A complete causal bandit problem.
struct Instance {
  Structure structure;
  AlphaTable alpha;

  const CausalDag& dag() const noexcept { return structure.dag; }
  const InterventionSet& interventions() const noexcept { return structure.interventions; }
};

struct Violation {
  std::optional<NodeIndex> node;
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(std::string_view kind) const;
  std::string summary() const;
};

ValidationReport validate(const CausalDag& dag, const AlphaTable& alpha);
/// Also checks the intervention set (non-empty, every entry of length N).
ValidationReport validate(const Instance& instance);

/// Assembles and validates an instance; throws ParameterError on violations.
Instance make_instance(CausalDag dag, AlphaTable alpha, InterventionSet interventions);

/// Complete binary tree with edges oriented toward the root. Leaves come
/// first left to right, then internal levels bottom-up; the root is last.
struct BinaryTree {
  CausalDag dag;
  std::vector<NodeIndex> leaves;
};

BinaryTree make_binary_tree(int height);

/// alpha_n(pi-bar^1) = u, alpha_n(pi-bar^0) = 1 - u with u ~ U[0,1) per row.
AlphaTable random_alpha(const CausalDag& dag, std::uint64_t seed);

enum class BudgetRule {
  kExact,  ///< exactly `budget` targets set to 1, the remaining targets 0
  kUpTo,   ///< between 1 and `budget` targets set to 1, the remaining targets 0
};

/// One intervention per qualifying subset of `targets`; non-target nodes stay
/// free. Subsets are ordered by size, then lexicographically over target
/// positions.
InterventionSet enumerate_budget_interventions(const CausalDag& dag,
                                               std::span<const NodeIndex> targets,
                                               std::size_t budget,
                                               BudgetRule rule = BudgetRule::kExact);

/// Tree of the given height, random alpha, budgeted leaf interventions.
Instance make_binary_tree_instance(int height, std::size_t budget, std::uint64_t seed);

/// Reduces soft interventions on `soft_node` to hard ones. One parentless
/// indicator node per soft row is prepended (indices 0..S-1); original node m
/// becomes m + S. `soft_rows[j]` is a full alpha row of the soft node under
/// soft intervention j, laid out like AlphaTable::row for the base graph.
/// Intervention j clamps indicator j to 1 and the other indicators to 0.
Instance soft_to_hard_reduction(const CausalDag& base,
                                const AlphaTable& base_alpha,
                                NodeIndex soft_node,
                                std::span<const std::vector<double>> soft_rows);

}  // namespace cbandit
