#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pmrl/harness.hpp"

namespace {

int run_train(const std::string& config_path, const std::string& out_dir,
              bool seed_set, std::uint64_t seed) {
  pmrl::RunConfig cfg = pmrl::run_config_from_file(config_path);
  cfg.out_dir = out_dir;
  if (seed_set) cfg.seed = seed;
  const pmrl::TrainResult result = pmrl::train(cfg);
  std::printf("final sigma1/sqrt(k) %.4f  mean pairwise cosine %.4f  "
              "mean recall@1 %.4f  auc %.4f\n",
              result.train_report.mean_sigma1_over_sqrt_k,
              result.train_report.mean_pairwise_cosine, result.mean_recall_at_1,
              result.auc);
  return 0;
}

int run_gradcheck(std::uint64_t seed) {
  const pmrl::GradcheckReport report = pmrl::gradcheck(seed);
  for (const auto& suite : report.suites) {
    std::printf("%-20s cases=%-4zu skipped=%-3zu max_rel_err=%.3e tol=%.0e  %s\n",
                suite.name.c_str(), suite.cases, suite.skipped, suite.max_rel_err,
                suite.tolerance, suite.pass ? "PASS" : "FAIL");
  }
  std::printf("gradcheck: %s\n", report.all_pass ? "PASS" : "FAIL");
  return report.all_pass ? 0 : 2;
}

int run_suite_cmd(const std::string& name, const std::string& config_path,
                  const std::string& out_dir) {
  const pmrl::RunConfig cfg = pmrl::run_config_from_file(config_path);
  const pmrl::SuiteResult result = pmrl::run_suite(name, cfg, out_dir);
  for (const auto& [key, value] : result.comparison.at("orderings").items()) {
    std::printf("%-45s %s\n", key.c_str(), value.get<bool>() ? "true" : "false");
  }
  std::printf("suite %s: %s\n", name.c_str(), result.pass ? "PASS" : "FAIL");
  return result.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PMRL experiment harness: singular-value driven multimodal alignment"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite_name;
  std::uint64_t seed = 1;

  auto* train_cmd =
      app.add_subcommand("train", "Train one objective and emit its artifacts");
  train_cmd->add_option("--config", config_path, "run config JSON")->required();
  train_cmd->add_option("--out", out_dir, "output directory")->required();
  train_cmd->add_option("--seed", seed, "override the config seed");

  auto* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference verification of gradients");
  grad_cmd->add_option("--seed", seed, "case-generation seed");

  auto* suite_cmd = app.add_subcommand(
      "suite", "run a comparison suite: collapse-demo | ablate | robustness");
  suite_cmd->add_option("name", suite_name, "suite name")->required();
  suite_cmd->add_option("--config", config_path, "base run config JSON")->required();
  suite_cmd->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      return run_train(config_path, out_dir, train_cmd->count("--seed") > 0, seed);
    }
    if (grad_cmd->parsed()) {
      return run_gradcheck(grad_cmd->count("--seed") > 0 ? seed : 1);
    }
    return run_suite_cmd(suite_name, config_path, out_dir);
  } catch (const pmrl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
