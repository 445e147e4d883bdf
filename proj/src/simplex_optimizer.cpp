#include "cbandit/simplex_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbandit/error.hpp"
#include "cbandit/inference.hpp"

namespace cbandit {

bool EtaDistribution::on_simplex(double tolerance) const {
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) return false;
    sum += w;
  }
  return !weights.empty() && std::abs(sum - 1.0) <= tolerance;
}

std::size_t RatioObjective::add_channel(std::vector<double> coefficients, double offset) {
  if (coefficients.size() != arm_count()) throw ParameterError("channel dimension does not match the arm count");
  if (offset < 0.0) throw ParameterError("channel offset must be nonnegative");
  channels_.push_back({std::move(coefficients), offset});
  return channels_.size() - 1;
}

bool RatioObjective::add_term(std::size_t arm, std::size_t channel, double numerator) {
  if (arm >= arm_count() || channel >= channels_.size()) throw ParameterError("term index out of range");
  if (numerator < kNumeratorFloor) return false;
  terms_[arm].push_back({channel, numerator});
  return true;
}

std::size_t RatioObjective::term_count() const noexcept {
  std::size_t total = 0;
  for (const auto& t : terms_) total += t.size();
  return total;
}

namespace {

// Denominator of every channel at eta.
void channel_denominators(const RatioObjective& objective, std::span<const double> eta, std::vector<double>& out) {
  const auto& channels = objective.channels();
  out.resize(channels.size());
  for (std::size_t j = 0; j < channels.size(); ++j) {
    const auto& c = channels[j].coefficients;
    double d = channels[j].offset;
    for (std::size_t i = 0; i < c.size(); ++i) d += eta[i] * c[i];
    out[j] = d;
  }
}

Evaluation max_term(const RatioObjective& objective, const std::vector<double>& denominators) {
  Evaluation best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t arm = 0; arm < objective.arm_count(); ++arm) {
    double sum = 0.0;
    for (const RatioTerm& t : objective.terms(arm)) {
      const double d = denominators[t.channel];
      if (!(d > 0.0)) {
        throw IllPosedError("zero denominator under a nonzero numerator (arm " + std::to_string(arm) + ")");
      }
      sum += t.numerator / d;
    }
    if (sum > best.value) best = {sum, arm};
  }
  return best;
}

}  // namespace

Evaluation evaluate(const RatioObjective& objective, const EtaDistribution& eta) {
  if (eta.size() != objective.arm_count()) {
    throw ParameterError("eta has " + std::to_string(eta.size()) + " weights, objective has " +
                         std::to_string(objective.arm_count()) + " arms");
  }
  if (objective.arm_count() == 0) return {};
  std::vector<double> denominators;
  channel_denominators(objective, eta.weights, denominators);
  return max_term(objective, denominators);
}

SolverResult minimize(const RatioObjective& objective, const SolverConfig& config) {
  const std::size_t k = objective.arm_count();
  if (k == 0) throw ParameterError("objective has no arms");

  SolverResult result;
  result.eta = EtaDistribution::uniform(k);
  std::vector<double> denominators;
  channel_denominators(objective, result.eta.weights, denominators);
  Evaluation current = max_term(objective, denominators);
  result.value = current.value;
  result.lower_bound = 0.0;  // every term is nonnegative

  auto finish = [&](bool converged, std::size_t iterations) {
    result.gap = std::max(0.0, result.value - result.lower_bound);
    result.converged = converged;
    result.iterations = iterations;
    return result;
  };
  if (k == 1 || objective.term_count() == 0) {
    result.lower_bound = result.value;
    return finish(true, 0);
  }

  std::vector<double> eta = result.eta.weights;
  std::vector<double> gradient(k);
  // Weighted average of all linearizations; each one under-estimates the max.
  std::vector<double> avg_gradient(k, 0.0);
  double avg_constant = 0.0;
  double avg_weight = 0.0;
  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    // Gradient of the active arm's term sum.
    std::fill(gradient.begin(), gradient.end(), 0.0);
    for (const RatioTerm& t : objective.terms(current.argmax)) {
      const auto& c = objective.channels()[t.channel].coefficients;
      const double d = denominators[t.channel];
      const double scale = t.numerator / (d * d);
      for (std::size_t i = 0; i < k; ++i) gradient[i] -= scale * c[i];
    }

    // Linearization of the active term is a global under-estimator.
    const auto [gmin_it, gmax_it] = std::minmax_element(gradient.begin(), gradient.end());
    const double gmin = *gmin_it;
    const double inner = std::inner_product(gradient.begin(), gradient.end(), eta.begin(), 0.0);
    result.lower_bound = std::max(result.lower_bound, current.value + gmin - inner);
    const double w = 1.0 / std::sqrt(static_cast<double>(iter));
    avg_constant += w * (current.value - inner);
    for (std::size_t i = 0; i < k; ++i) avg_gradient[i] += w * gradient[i];
    avg_weight += w;
    const double avg_min = *std::min_element(avg_gradient.begin(), avg_gradient.end());
    result.lower_bound = std::max(result.lower_bound, (avg_constant + avg_min) / avg_weight);
    if (result.value - result.lower_bound <= config.tolerance * std::max(std::abs(result.value), 1e-12)) {
      return finish(true, iter - 1);
    }

    const double spread = *gmax_it - gmin;
    if (spread <= 0.0) return finish(true, iter - 1);  // flat along the simplex
    const double step = config.step_scale / std::sqrt(static_cast<double>(iter)) / spread;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      eta[i] *= std::exp(-step * (gradient[i] - gmin));
      total += eta[i];
    }
    for (double& w : eta) w /= total;

    channel_denominators(objective, eta, denominators);
    current = max_term(objective, denominators);
    if (current.value < result.value) {
      result.value = current.value;
      result.eta.weights = eta;
    }
  }
  return finish(result.value - result.lower_bound <= config.tolerance * std::max(std::abs(result.value), 1e-12),
                config.max_iters);
}

RatioObjective gamma_star_objective(const Instance& instance) {
  const CausalDag& dag = instance.dag();
  const auto& arms = instance.interventions();
  MarginalEngine engine(dag);
  RatioObjective objective(arms.size());
  for (NodeIndex n = 0; n < dag.node_count(); ++n) {
    std::vector<std::vector<double>> beta(dag.row_count(n), std::vector<double>(arms.size()));
    for (std::size_t a = 0; a < arms.size(); ++a) {
      const auto marginals = engine.parent_marginals(instance.alpha, n, arms[a]);
      for (std::size_t mask = 0; mask < marginals.size(); ++mask) beta[mask][a] = marginals[mask];
    }
    for (auto& column : beta) {
      const std::vector<double> numerators = column;
      const std::size_t channel = objective.add_channel(std::move(column), 0.0);
      for (std::size_t a = 0; a < arms.size(); ++a) {
        if (numerators[a] > 0.0) objective.add_term(a, channel, numerators[a] * numerators[a]);
      }
    }
  }
  return objective;
}

SolverResult solve_gamma_star(const Instance& instance, const SolverConfig& config) {
  return minimize(gamma_star_objective(instance), config);
}

double gamma_star(const Instance& instance, const SolverConfig& config) {
  return solve_gamma_star(instance, config).value;
}

}  // namespace cbandit
