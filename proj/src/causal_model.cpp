#include "cbandit/causal_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "cbandit/error.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

namespace {

constexpr double kComplementTolerance = 1e-12;

}  // namespace

Intervention Intervention::parse(std::string_view text) {
  std::vector<Clamp> out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '*': out.push_back(Clamp::kFree); break;
      case '0': out.push_back(Clamp::kZero); break;
      case '1': out.push_back(Clamp::kOne); break;
      default:
        throw ParameterError(std::string("invalid intervention character '") + c + "'");
    }
  }
  return Intervention(std::move(out));
}

std::size_t Intervention::intervened_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(assignment_.begin(), assignment_.end(), [](Clamp c) { return c != Clamp::kFree; }));
}

std::string Intervention::to_string() const {
  std::string s;
  s.reserve(assignment_.size());
  for (Clamp c : assignment_) s.push_back(c == Clamp::kFree ? '*' : (c == Clamp::kOne ? '1' : '0'));
  return s;
}

CausalDag::CausalDag(std::vector<std::vector<NodeIndex>> parents)
    : parents_(std::move(parents)), children_(parents_.size()) {
  for (NodeIndex n = 0; n < parents_.size(); ++n) {
    for (NodeIndex p : parents_[n]) {
      if (p < parents_.size()) children_[p].push_back(n);
    }
  }
}

std::size_t CausalDag::total_rows() const noexcept {
  std::size_t c = 0;
  for (NodeIndex n = 0; n < parents_.size(); ++n) c += row_count(n);
  return c;
}

std::vector<NodeIndex> CausalDag::parentless() const {
  std::vector<NodeIndex> out;
  for (NodeIndex n = 0; n < parents_.size(); ++n) {
    if (parents_[n].empty()) out.push_back(n);
  }
  return out;
}

ParentRealization restrict(const ParentRealization& pi, std::span<const NodeIndex> sub_scope) {
  ParentRealization out;
  out.scope.assign(sub_scope.begin(), sub_scope.end());
  for (std::size_t i = 0; i < sub_scope.size(); ++i) {
    auto it = std::find(pi.scope.begin(), pi.scope.end(), sub_scope[i]);
    if (it == pi.scope.end()) {
      throw ScopeError("node " + std::to_string(sub_scope[i]) + " is not in the realization's scope");
    }
    const auto pos = static_cast<std::size_t>(it - pi.scope.begin());
    out.bits |= static_cast<std::uint64_t>(pi.bit(pos)) << i;
  }
  return out;
}

AlphaTable::AlphaTable(const CausalDag& dag) {
  rows_.reserve(dag.node_count());
  for (NodeIndex n = 0; n < dag.node_count(); ++n) rows_.emplace_back(2 * dag.row_count(n), 0.0);
}

bool ValidationReport::has(std::string_view kind) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    if (v.node) os << "node " << *v.node << ": ";
    os << v.kind << ": " << v.message << '\n';
  }
  return os.str();
}

ValidationReport validate(const CausalDag& dag, const AlphaTable& alpha) {
  ValidationReport report;
  auto add = [&](std::optional<NodeIndex> node, std::string kind, std::string message) {
    report.violations.push_back({node, std::move(kind), std::move(message)});
  };

  const std::size_t n_nodes = dag.node_count();
  if (n_nodes < 3) add(std::nullopt, "node count", "need at least 3 nodes, got " + std::to_string(n_nodes));

  for (NodeIndex n = 0; n < n_nodes; ++n) {
    const auto parents = dag.parents(n);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      if (parents[i] >= n) {
        add(n, "topological order", "parent " + std::to_string(parents[i]) + " is not below " + std::to_string(n));
      }
      if (i > 0 && parents[i] == parents[i - 1]) {
        add(n, "duplicate parent", "parent " + std::to_string(parents[i]) + " listed twice");
      } else if (i > 0 && parents[i] < parents[i - 1]) {
        add(n, "parent order", "parent list is not sorted ascending");
      }
    }
    if (parents.size() >= 63) add(n, "table shape", "too many parents for a bit-mask row index");
  }

  if (alpha.node_count() != n_nodes) {
    add(std::nullopt, "table shape",
        "alpha covers " + std::to_string(alpha.node_count()) + " nodes, dag has " + std::to_string(n_nodes));
    return report;
  }

  for (NodeIndex n = 0; n < n_nodes; ++n) {
    const auto row = alpha.row(n);
    if (dag.parent_count(n) >= 63 || row.size() != 2 * dag.row_count(n)) {
      add(n, "table shape", "row has " + std::to_string(row.size()) + " entries, expected " +
                                std::to_string(2 * dag.row_count(n)));
      continue;
    }
    bool range_ok = true;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) range_ok = false;
    }
    if (!range_ok) add(n, "probability range", "entry outside [0,1]");
    for (std::uint64_t mask = 0; mask < alpha.parent_masks(n); ++mask) {
      const double sum = alpha(n, mask, 0) + alpha(n, mask, 1);
      if (std::abs(sum - 1.0) > kComplementTolerance) {
        std::ostringstream os;
        os << "complement sum != 1 (" << alpha(n, mask, 1) << " + " << alpha(n, mask, 0) << ") at parent mask " << mask;
        add(n, "complement sum", os.str());
      }
    }
  }
  return report;
}

ValidationReport validate(const Instance& instance) {
  ValidationReport report = validate(instance.dag(), instance.alpha);
  if (instance.interventions().empty()) {
    report.violations.push_back({std::nullopt, "intervention set", "intervention set is empty"});
  }
  for (std::size_t i = 0; i < instance.interventions().size(); ++i) {
    if (instance.interventions()[i].size() != instance.dag().node_count()) {
      report.violations.push_back({std::nullopt, "intervention length",
                                   "intervention " + std::to_string(i) + " has length " +
                                       std::to_string(instance.interventions()[i].size())});
    }
  }
  return report;
}

Instance make_instance(CausalDag dag, AlphaTable alpha, InterventionSet interventions) {
  Instance instance{Structure{std::move(dag), std::move(interventions)}, std::move(alpha)};
  const auto report = validate(instance);
  if (!report.ok()) throw ParameterError("invalid instance:\n" + report.summary());
  return instance;
}

BinaryTree make_binary_tree(int height) {
  if (height < 1) throw ParameterError("tree height must be >= 1");
  if (height > 20) throw ParameterError("tree height too large");
  BinaryTree tree;
  std::vector<std::vector<NodeIndex>> parents;
  std::size_t level_size = std::size_t{1} << height;
  std::size_t level_start = 0;
  for (std::size_t i = 0; i < level_size; ++i) {
    parents.emplace_back();
    tree.leaves.push_back(i);
  }
  while (level_size > 1) {
    const std::size_t next_start = level_start + level_size;
    for (std::size_t j = 0; j < level_size / 2; ++j) {
      parents.push_back({level_start + 2 * j, level_start + 2 * j + 1});
    }
    level_start = next_start;
    level_size /= 2;
  }
  tree.dag = CausalDag(std::move(parents));
  return tree;
}

AlphaTable random_alpha(const CausalDag& dag, std::uint64_t seed) {
  Rng rng(seed);
  AlphaTable alpha(dag);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    for (std::uint64_t mask = 0; mask < dag.row_count(n); ++mask) {
      // uniform() lies on a 2^-53 grid, so u + (1 - u) == 1 exactly.
      const double u = rng.uniform();
      alpha.set(n, mask, 1, u);
      alpha.set(n, mask, 0, 1.0 - u);
    }
  }
  return alpha;
}

namespace {

// Calls `visit` with each k-subset of {0..m-1} in lexicographic order.
template <typename Visit>
void for_each_combination(std::size_t m, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(std::span<const std::size_t>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

InterventionSet enumerate_budget_interventions(const CausalDag& dag,
                                               std::span<const NodeIndex> targets,
                                               std::size_t budget,
                                               BudgetRule rule) {
  if (budget == 0) throw ParameterError("budget must be >= 1");
  if (budget > targets.size()) {
    throw ParameterError("budget " + std::to_string(budget) + " exceeds the " + std::to_string(targets.size()) +
                         " intervention targets");
  }
  std::vector<bool> seen(dag.node_count(), false);
  for (NodeIndex t : targets) {
    if (t >= dag.node_count()) throw ParameterError("target node " + std::to_string(t) + " out of range");
    if (seen[t]) throw ParameterError("target node " + std::to_string(t) + " listed twice");
    seen[t] = true;
  }

  Intervention base = Intervention::observational(dag.node_count());
  for (NodeIndex t : targets) base.set(t, Clamp::kZero);

  InterventionSet out;
  const std::size_t smallest = rule == BudgetRule::kExact ? budget : 1;
  for (std::size_t k = smallest; k <= budget; ++k) {
    for_each_combination(targets.size(), k, [&](std::span<const std::size_t> chosen) {
      Intervention a = base;
      for (std::size_t pos : chosen) a.set(targets[pos], Clamp::kOne);
      out.push_back(std::move(a));
    });
  }
  return out;
}

Instance make_binary_tree_instance(int height, std::size_t budget, std::uint64_t seed) {
  BinaryTree tree = make_binary_tree(height);
  if (budget < 1 || budget > tree.leaves.size()) {
    throw ParameterError("budget must be between 1 and the leaf count " + std::to_string(tree.leaves.size()));
  }
  InterventionSet arms = enumerate_budget_interventions(tree.dag, tree.leaves, budget);
  AlphaTable alpha = random_alpha(tree.dag, seed);
  return make_instance(std::move(tree.dag), std::move(alpha), std::move(arms));
}

Instance soft_to_hard_reduction(const CausalDag& base,
                                const AlphaTable& base_alpha,
                                NodeIndex soft_node,
                                std::span<const std::vector<double>> soft_rows) {
  if (soft_rows.empty()) throw ParameterError("soft intervention set is empty");
  if (soft_node >= base.node_count()) throw ParameterError("soft node out of range");
  const std::size_t n_soft = soft_rows.size();
  const std::size_t k_parents = base.parent_count(soft_node);
  if (n_soft + k_parents >= 63) throw ParameterError("too many soft labels for the soft node's row index");
  for (const auto& row : soft_rows) {
    if (row.size() != 2 * base.row_count(soft_node)) {
      throw ParameterError("soft row has " + std::to_string(row.size()) + " entries, expected " +
                           std::to_string(2 * base.row_count(soft_node)));
    }
  }

  std::vector<std::vector<NodeIndex>> parents(n_soft);
  for (NodeIndex m = 0; m < base.node_count(); ++m) {
    std::vector<NodeIndex> ps;
    if (m == soft_node) {
      for (NodeIndex s = 0; s < n_soft; ++s) ps.push_back(s);
    }
    for (NodeIndex p : base.parents(m)) ps.push_back(p + n_soft);
    parents.push_back(std::move(ps));
  }
  CausalDag dag(std::move(parents));

  AlphaTable alpha(dag);
  for (NodeIndex s = 0; s < n_soft; ++s) {
    alpha.set(s, 0, 0, 0.5);
    alpha.set(s, 0, 1, 0.5);
  }
  for (NodeIndex m = 0; m < base.node_count(); ++m) {
    const NodeIndex mapped = m + n_soft;
    if (m != soft_node) {
      alpha.mutable_row(mapped).assign(base_alpha.row(m).begin(), base_alpha.row(m).end());
      continue;
    }
    const std::uint64_t indicator_mask = (std::uint64_t{1} << n_soft) - 1;
    for (std::uint64_t mask = 0; mask < dag.row_count(mapped); ++mask) {
      const std::uint64_t indicators = mask & indicator_mask;
      const std::uint64_t original = mask >> n_soft;
      if (std::popcount(indicators) == 1) {
        const auto label = static_cast<std::size_t>(std::countr_zero(indicators));
        const auto& row = soft_rows[label];
        const std::size_t half = row.size() / 2;
        alpha.set(mapped, mask, 0, row[original]);
        alpha.set(mapped, mask, 1, row[original + half]);
      } else {
        // Unreachable under every reduced intervention; kept stochastic.
        alpha.set(mapped, mask, 0, 1.0);
        alpha.set(mapped, mask, 1, 0.0);
      }
    }
  }

  InterventionSet arms;
  for (NodeIndex s = 0; s < n_soft; ++s) {
    Intervention a = Intervention::observational(dag.node_count());
    for (NodeIndex other = 0; other < n_soft; ++other) a.set(other, other == s ? Clamp::kOne : Clamp::kZero);
    arms.push_back(std::move(a));
  }
  return make_instance(std::move(dag), std::move(alpha), std::move(arms));
}

}  // namespace cbandit
