#pragma once

#include <cstddef>
#include <vector>

#include "cbandit/causal_model.hpp"

namespace cbandit {

/// Weights over an intervention set; lives on the probability simplex.
struct EtaDistribution {
  std::vector<double> weights;

  static EtaDistribution uniform(std::size_t k) { return {std::vector<double>(k, 1.0 / static_cast<double>(k))}; }

  std::size_t size() const noexcept { return weights.size(); }
  bool on_simplex(double tolerance = 1e-9) const;
};

/// A denominator shared by every term built for one (node, parent
/// realization) pair: <eta, coefficients> + offset.
struct RatioChannel {
  std::vector<double> coefficients;
  double offset = 0.0;
};

struct RatioTerm {
  std::size_t channel;
  double numerator;
};

/// max over arms A of sum_j numerator_{A,j} / (<eta, c_j> + r_j), the
/// objective of the allocation problems solved over the simplex.
class RatioObjective {
 public:
  /// Numerators below this are dropped when terms are added.
  static constexpr double kNumeratorFloor = 1e-15;

  explicit RatioObjective(std::size_t arm_count) : terms_(arm_count) {}

  std::size_t arm_count() const noexcept { return terms_.size(); }

  std::size_t add_channel(std::vector<double> coefficients, double offset);
  /// Returns false when the term was dropped by the numerator floor.
  bool add_term(std::size_t arm, std::size_t channel, double numerator);

  const std::vector<RatioChannel>& channels() const noexcept { return channels_; }
  const std::vector<RatioTerm>& terms(std::size_t arm) const { return terms_[arm]; }
  std::size_t term_count() const noexcept;

 private:
  std::vector<RatioChannel> channels_;
  std::vector<std::vector<RatioTerm>> terms_;
};

struct Evaluation {
  double value = 0.0;
  std::size_t argmax = 0;  ///< smallest maximizing arm
};

/// Throws ParameterError on a dimension mismatch and IllPosedError when a
/// term's denominator is not positive.
Evaluation evaluate(const RatioObjective& objective, const EtaDistribution& eta);

struct SolverConfig {
  std::size_t max_iters = 2000;
  double tolerance = 1e-4;  ///< relative gap at which the solver stops
  double step_scale = 1.0;  ///< c in the c / sqrt(k) step schedule
};

struct SolverResult {
  EtaDistribution eta;
  double value = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;  ///< value - lower_bound
  bool converged = false;
  std::size_t iterations = 0;
};

/// Exponentiated-gradient mirror descent on the max-term subgradient, started
/// from the uniform point. Returns the best iterate seen; `converged` is false
/// when max_iters ran out before the relative gap reached the tolerance.
SolverResult minimize(const RatioObjective& objective, const SolverConfig& config = {});

/// Objective whose optimum is gamma*: true beta values, zero offsets, terms
/// only where beta_n(pi, A) > 0.
RatioObjective gamma_star_objective(const Instance& instance);

SolverResult solve_gamma_star(const Instance& instance, const SolverConfig& config = {});
double gamma_star(const Instance& instance, const SolverConfig& config = {});

}  // namespace cbandit
