// Command-line front end: instance summaries, regret sweeps, gamma*, BIF checks.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "cbandit/bif.hpp"
#include "cbandit/causal_model.hpp"
#include "cbandit/error.hpp"
#include "cbandit/experiment.hpp"
#include "cbandit/simplex_optimizer.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

// Source options shared by gen, run and gamma. Values stay as text and go
// through the config parser so that flags and config files agree.
struct SourceFlags {
  std::vector<std::pair<std::string, std::string>> overrides;

  void add(CLI::App* app) {
    app->add_option_function<std::string>("--tree-height", [this](const std::string& v) { set("tree_height", v); },
                                          "complete binary tree of this height");
    app->add_option_function<std::string>("--bif", [this](const std::string& v) { set("bif", v); },
                                          "BIF network file");
    app->add_option_function<std::string>("--budgets", [this](const std::string& v) { set("budgets", v); },
                                          "comma-separated budgets");
    app->add_option_function<std::string>("--budget-rule", [this](const std::string& v) { set("budget_rule", v); },
                                          "exact | up-to");
    app->add_option_function<std::string>("--seed", [this](const std::string& v) { set("seed", v); }, "base seed");
    app->add_option_function<std::string>("--label", [this](const std::string& v) { set("label", v); },
                                          "instance column of the report");
  }

  void set(std::string key, std::string value) { overrides.emplace_back(std::move(key), std::move(value)); }

  void apply(cbandit::ExperimentConfig& config) const {
    for (const auto& [key, value] : overrides) cbandit::apply_config_value(config, key, value);
  }
};

int cmd_gen(const cbandit::ExperimentConfig& config) {
  const cbandit::SweepSource source = cbandit::load_source(config);
  std::cout << "instance=" << source.label << "\n";
  std::cout << "N=" << source.dag.node_count() << "\n";
  std::cout << "C=" << source.dag.total_rows() << "\n";
  std::cout << "targets=" << source.targets.size() << "\n";
  std::cout << "|A|=";
  for (std::size_t i = 0; i < config.budgets.size(); ++i) {
    std::cout << (i ? "/" : "") << cbandit::source_interventions(source, config.budgets[i]).size();
  }
  std::cout << "\n";
  return 0;
}

int cmd_run(const cbandit::ExperimentConfig& config, const std::string& out_path) {
  const cbandit::RegretReport report = cbandit::run_sweep(config);
  for (const auto& row : report.rows) {
    if (row.error) {
      std::cerr << "failed: " << cbandit::strategy_name(row.strategy) << " budget=" << row.budget
                << " horizon=" << row.horizon << ": " << *row.error << "\n";
    }
  }
  const std::string csv = report.to_csv();
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw cbandit::ParameterError("cannot write '" + out_path + "'");
    out << csv;
  }
  return 0;
}

int cmd_gamma(const cbandit::ExperimentConfig& config) {
  const cbandit::SweepSource source = cbandit::load_source(config);
  for (std::size_t budget : config.budgets) {
    const auto arms = cbandit::source_interventions(source, budget);
    const cbandit::Instance instance = cbandit::make_instance(
        source.dag, cbandit::random_alpha(source.dag, cbandit::alpha_seed(config, budget, 0)), arms);
    const cbandit::SolverResult r = cbandit::solve_gamma_star(instance);
    std::size_t smallest = source.dag.node_count();
    for (const auto& a : arms) smallest = std::min(smallest, a.intervened_count());
    const std::size_t n = source.dag.node_count();
    const std::size_t upper = std::min(n * source.dag.total_rows(), n * arms.size());
    std::printf("budget=%zu arms=%zu gamma=%.6f gap=%.2e lower_bound=%zu upper_bound=%zu\n", budget, arms.size(),
                r.value, r.gap, n - smallest, upper);
  }
  return 0;
}

int cmd_parse_bif(const std::string& path) {
  const cbandit::BifNetwork net = cbandit::read_bif_file(path);
  const cbandit::BifDag bif = cbandit::to_causal_dag(net);
  std::cout << "network=" << net.name << "\n";
  std::cout << "variables=" << net.variables.size() << "\n";
  std::cout << "C=" << bif.dag.total_rows() << "\n";
  std::cout << "parentless=" << bif.targets.size() << "\n";
  for (cbandit::NodeIndex i = 0; i < bif.dag.node_count(); ++i) {
    std::cout << i << " " << bif.names[i] << " <-";
    for (cbandit::NodeIndex p : bif.dag.parents(i)) std::cout << " " << bif.names[p];
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal bandit experiments"};
  app.require_subcommand(1);

  SourceFlags gen_flags;
  CLI::App* gen = app.add_subcommand("gen", "print N, C and |A| per budget");
  gen_flags.add(gen);

  SourceFlags run_flags;
  std::string config_path;
  std::string out_path;
  CLI::App* run = app.add_subcommand("run", "run a regret sweep and write CSV");
  run_flags.add(run);
  run->add_option("--config", config_path, "key = value config file");
  run->add_option("--out", out_path, "CSV output path (default: stdout)");
  run->add_option_function<std::string>("--multipliers", [&](const std::string& v) { run_flags.set("multipliers", v); },
                                        "horizon multipliers, T = m * C");
  run->add_option_function<std::string>("--trials", [&](const std::string& v) { run_flags.set("trials", v); },
                                        "trials per row");
  run->add_option_function<std::string>("--strategies", [&](const std::string& v) { run_flags.set("strategies", v); },
                                        "proposed-paper, proposed-practical, successive-rejects, uniform");
  run->add_flag_callback("--fix-alpha", [&] { run_flags.set("fix_alpha", "true"); }, "same alpha for every trial");
  run->add_flag_callback("--timing", [&] { run_flags.set("timing", "true"); }, "fill the runtime_ms column");

  SourceFlags gamma_flags;
  CLI::App* gamma = app.add_subcommand("gamma", "solve the allocation program with true betas");
  gamma_flags.add(gamma);

  std::string bif_path;
  CLI::App* parse = app.add_subcommand("parse-bif", "validate a BIF file and print its structure");
  parse->add_option("path", bif_path, "BIF file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    cbandit::ExperimentConfig config;
    config.workers = cbandit::workers_from_environment(1);
    if (*gen) {
      gen_flags.apply(config);
      return cmd_gen(config);
    }
    if (*run) {
      if (!config_path.empty()) config = cbandit::read_config_file(config_path, config);
      run_flags.apply(config);
      return cmd_run(config, out_path);
    }
    if (*gamma) {
      gamma_flags.apply(config);
      return cmd_gamma(config);
    }
    return cmd_parse_bif(bif_path);
  } catch (const cbandit::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kDataError;
  } catch (const cbandit::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const cbandit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
