#include <doctest.h>

#include <cmath>

#include "cbandit/error.hpp"
#include "cbandit/phase1.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace cbandit;

namespace {

// Small lambda used by the statistical checks; the default C^3/N truncates
// every row at these horizons.
constexpr double kTestLambda = 1e-5;

Instance deterministic_chain() {
  const CausalDag dag = fixtures::chain(3);
  InterventionSet arms{Intervention::parse("***"), Intervention::parse("0**"), Intervention::parse("1**"),
                       Intervention::parse("*0*"), Intervention::parse("*1*")};
  return make_instance(dag, fixtures::deterministic_alpha(dag, 9), arms);
}

}  // namespace

TEST_CASE("S(lambda)") {
  CHECK(s_lambda(1.0, 3, 4, 100) == doctest::Approx(4.32 * std::log(100.0)).epsilon(1e-14));
  CHECK(s_lambda(1.0, 3, 4, 100) == doctest::Approx(19.894).epsilon(1e-4));
  CHECK(s_lambda(2.0, 3, 4, 100) == doctest::Approx(2.0 * s_lambda(1.0, 3, 4, 100)));
  double previous = s_lambda(1.0, 3, 4, 3);
  for (std::size_t t = 4; t < 2000; t += 7) {
    const double s = s_lambda(1.0, 3, 4, t);
    CHECK(s < previous);
    previous = s;
  }
  CHECK_THROWS_AS(s_lambda(0.0, 3, 4, 100), ParameterError);
  CHECK_THROWS_AS(s_lambda(1.0, 3, 4, 1), ParameterError);
}

TEST_CASE("check-alpha update") {
  CHECK(check_alpha_update({10, 7}, 1) == doctest::Approx(0.7));
  CHECK(check_alpha_update({10, 7}, 0) == doctest::Approx(0.3));
  CHECK(check_alpha_update({0, 0}, 0) == 0.0);
  CHECK(check_alpha_update({0, 0}, 1) == 0.0);
}

TEST_CASE("phase 1 ledger and budget precondition") {
  const Instance inst = fixtures::seven_node_instance();
  const std::size_t c = inst.dag().total_rows();
  for (std::size_t t : {3 * c, 3 * c + 5, 1000 * c + 17}) {
    SimulatedEnvironment env(inst, t);
    const Phase1Output out = run_phase1(env, inst.structure, kTestLambda, t);
    CHECK(env.experiments_used() == c * (t / (3 * c)));
    CHECK(out.experiments_used == env.experiments_used());
  }
  SimulatedEnvironment env(inst, 1);
  CHECK_THROWS_AS(run_phase1(env, inst.structure, kTestLambda, 3 * c - 1), BudgetError);
  CHECK(env.experiments_used() == 0);
}

TEST_CASE("large lambda truncates everything") {
  const Instance inst = fixtures::seven_node_instance();
  const CausalDag& dag = inst.dag();
  SimulatedEnvironment env(inst, 2);
  const Phase1Output out = run_phase1(env, inst.structure, 1e6, 3000);
  CHECK(out.row_threshold >= 1.0);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
      for (int v = 0; v <= 1; ++v) {
        CHECK(out.truncation.g.contains(n, m, v));
        CHECK(out.truncation.d.contains(n, m, v));
        CHECK(out.check_alpha(n, m, v) == 0.0);
      }
    }
  }
  MarginalEngine engine(dag);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    if (dag.parents(n).empty()) continue;
    for (const auto& column : beta_hat_columns(out, inst.structure, n, engine)) {
      for (double b : column) CHECK(b <= 1.0);
    }
  }
}

TEST_CASE("truncation bookkeeping invariants") {
  const Instance inst = fixtures::seven_node_instance();
  const CausalDag& dag = inst.dag();
  SimulatedEnvironment env(inst, 4);
  const Phase1Output out = run_phase1(env, inst.structure, 0.05, 3000);
  MarginalEngine engine(dag);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    const auto columns = beta_hat_columns(out, inst.structure, n, engine);
    for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
      const std::size_t pair = out.pairs(n, m);
      const CountPair& counts = out.counts[pair];
      CHECK(counts.t_bar <= counts.t);
      for (int v = 0; v <= 1; ++v) {
        const bool g = out.truncation.g.contains(n, m, v);
        const bool h = out.truncation.h.contains(n, m, v);
        CHECK(out.truncation.d.contains(n, m, v) == (g || h));
        if (g) {
          CHECK(out.check_alpha(n, m, v) == 0.0);
        } else {
          CHECK(out.check_alpha(n, m, v) == check_alpha_update(counts, v));
        }
      }
      for (std::size_t a = 0; a < columns.size(); ++a) {
        CHECK(columns[a][m] >= 0.0);
        CHECK(columns[a][m] <= 1.0 + 1e-12);
        CHECK(out.best_beta[pair] >= columns[a][m]);
      }
      CHECK(out.best_beta[pair] == columns[out.best_arm[pair]][m]);
    }
  }
}

TEST_CASE("beta-hat with the true table equals exact beta") {
  const Instance inst = fixtures::seven_node_instance();
  const CausalDag& dag = inst.dag();
  Phase1Output hooked;
  hooked.check_alpha = inst.alpha;
  MarginalEngine engine(dag);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    const auto columns = beta_hat_columns(hooked, inst.structure, n, engine);
    for (std::size_t a = 0; a < inst.interventions().size(); ++a) {
      for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
        CHECK(std::abs(columns[a][m] - oracle::beta(dag, inst.alpha, n, m, inst.interventions()[a])) <= 1e-12);
      }
    }
  }
}

TEST_CASE("deterministic alpha is recovered from one sample per pair without truncation") {
  const Instance inst = deterministic_chain();
  const CausalDag& dag = inst.dag();
  const std::size_t t = 3 * dag.total_rows();
  SimulatedEnvironment env(inst, 5);
  const Phase1Output out = run_phase1(env, inst.structure, 0.0, t);
  CHECK(out.truncation.d.size() == 0);
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
      CHECK(out.counts[out.pairs(n, m)].t == 1);
      for (int v = 0; v <= 1; ++v) CHECK(out.check_alpha(n, m, v) == inst.alpha(n, m, v));
    }
  }
}

TEST_CASE("phase 1 estimates are close on the seven-node instance") {
  const Instance inst = fixtures::seven_node_instance();
  const CausalDag& dag = inst.dag();
  int good_runs = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SimulatedEnvironment env(inst, 300 + seed);
    const Phase1Output out = run_phase1(env, inst.structure, kTestLambda, 30000);
    double worst = 0.0;
    std::size_t checked = 0;
    for (NodeIndex n = 0; n < dag.node_count(); ++n) {
      for (std::uint64_t m = 0; m < dag.row_count(n); ++m) {
        for (int v = 0; v <= 1; ++v) {
          if (out.truncation.g.contains(n, m, v)) continue;
          ++checked;
          worst = std::max(worst, std::abs(check_alpha_update(out.counts[out.pairs(n, m)], v) - inst.alpha(n, m, v)));
        }
      }
    }
    CHECK(checked >= 30);
    good_runs += worst <= 0.1 ? 1 : 0;
  }
  CHECK(good_runs >= 9);
}
