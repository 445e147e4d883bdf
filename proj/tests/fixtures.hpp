#pragma once

// Hand-built and random instances shared by the unit and acceptance tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cbandit/causal_model.hpp"

namespace fixtures {

using namespace cbandit;

/// Seven nodes: roots 0, 1, 2; 3 <- {0,1}; 4 <- {1,2}; 5 <- {3,4}; 6 <- {2,5}.
/// C = 19. Arms: every {*,0,1} assignment of the roots (27, observational
/// first), then do(V3=1), do(V4=0), do(V5=1).
inline Instance seven_node_instance() {
  CausalDag dag({{}, {}, {}, {0, 1}, {1, 2}, {3, 4}, {2, 5}});
  AlphaTable alpha(dag);
  // P(V_n = 1 | parent mask), listed by mask.
  const std::vector<std::vector<double>> one = {
      {0.6}, {0.35}, {0.5}, {0.2, 0.55, 0.7, 0.9}, {0.75, 0.3, 0.6, 0.25}, {0.15, 0.5, 0.65, 0.85}, {0.3, 0.7, 0.45, 0.8}};
  for (NodeIndex n = 0; n < 7; ++n) {
    for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
      alpha.set(n, m, 1, one[n][m]);
      alpha.set(n, m, 0, 1.0 - one[n][m]);
    }
  }
  InterventionSet arms;
  const char symbols[] = {'*', '0', '1'};
  for (int i = 0; i < 27; ++i) {
    std::string text = "****";
    text[0] = symbols[i % 3];
    text[1] = symbols[(i / 3) % 3];
    text[2] = symbols[i / 9];
    arms.push_back(Intervention::parse(text + "***"));
  }
  arms.push_back(Intervention::parse("***1***"));
  arms.push_back(Intervention::parse("****0**"));
  arms.push_back(Intervention::parse("*****1*"));
  return make_instance(dag, alpha, arms);
}

/// Chain 0 -> 1 -> ... -> n-1.
inline CausalDag chain(std::size_t n) {
  std::vector<std::vector<NodeIndex>> parents(n);
  for (NodeIndex i = 1; i < n; ++i) parents[i] = {i - 1};
  return CausalDag(parents);
}

/// Random DAG on n nodes: each earlier node becomes a parent with
/// probability `density`, at most `max_parents` parents.
inline CausalDag random_dag(std::size_t n, double density, std::size_t max_parents, std::mt19937_64& gen) {
  std::bernoulli_distribution edge(density);
  std::vector<std::vector<NodeIndex>> parents(n);
  for (NodeIndex i = 1; i < n; ++i) {
    for (NodeIndex j = 0; j < i && parents[i].size() < max_parents; ++j) {
      if (edge(gen)) parents[i].push_back(j);
    }
  }
  return CausalDag(parents);
}

/// Random intervention; each node stays free with probability `free_p`.
inline Intervention random_intervention(std::size_t n, double free_p, std::mt19937_64& gen) {
  std::bernoulli_distribution keep(free_p);
  std::bernoulli_distribution bit(0.5);
  Intervention a = Intervention::observational(n);
  for (NodeIndex i = 0; i < n; ++i) {
    if (!keep(gen)) a.set(i, bit(gen) ? Clamp::kOne : Clamp::kZero);
  }
  return a;
}

/// Random instance with `arms` random interventions.
inline Instance random_instance(std::size_t n, std::size_t arms, std::uint64_t seed, double density = 0.4,
                                std::size_t max_parents = 3) {
  std::mt19937_64 gen(seed);
  CausalDag dag = random_dag(n, density, max_parents, gen);
  InterventionSet set;
  for (std::size_t k = 0; k < arms; ++k) set.push_back(random_intervention(n, 0.7, gen));
  AlphaTable alpha = random_alpha(dag, gen());
  return make_instance(dag, alpha, set);
}

/// Every alpha row deterministic (0 or 1), chosen at random.
inline AlphaTable deterministic_alpha(const CausalDag& dag, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution bit(0.5);
  AlphaTable alpha(dag);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
      const int v = bit(gen) ? 1 : 0;
      alpha.set(n, m, v, 1.0);
      alpha.set(n, m, 1 - v, 0.0);
    }
  }
  return alpha;
}

}  // namespace fixtures
