#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmrl/losses.hpp"
#include "pmrl/metrics.hpp"
#include "pmrl/model.hpp"
#include "pmrl/synth.hpp"

namespace pmrl {

// Objective selectors accepted by RunConfig.
inline const std::vector<std::string>& objective_names() {
  static const std::vector<std::string> names = {
      "pmrl",        "pmrl-no-reg",         "pmrl-no-im",
      "volume-only", "volume-contrastive",  "infonce-pairwise"};
  return names;
}

struct RunConfig {
  std::string objective = "pmrl";
  SyntheticConfig data;
  std::size_t embed_dim = 32;      // d
  std::size_t encoder_hidden = 64;
  std::size_t head_hidden = 64;
  // tau1 rescaled for the toy regime: at 0.05 the spectrum softmax saturates
  // (gradients ~ exp(-gap/tau)) and cold-start runs stall near
  // sigma1/sqrt(k) = 0.68; 0.5 keeps the same mechanism with live gradients.
  LossConfig loss{0.5, 0.1, 1.0, 0.1};
  AdamWConfig opt;
  std::uint64_t steps = 2000;
  std::size_t batch_size = 32;
  std::uint64_t eval_interval = 25;
  std::size_t anchor_slot = 0;   // volume-contrastive only
  double input_noise = 0.0;      // robustness protocol, 0 disables
  // Scale of the shared output-bias direction at initialization. Positive
  // values start same-instance cosines nonnegative (the regime pretrained
  // encoders provide); kept small so no objective starts near its optimum.
  double init_bias_scale = 1.0;
  std::string out_dir;           // empty: keep results in memory only
  std::uint64_t seed = 1;
};

// Throws ConfigInvalid on a bad selector or impossible sizes.
void validate_config(const RunConfig& cfg);

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig run_config_from_file(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

struct ExperimentRecord {
  std::uint64_t step = 0;
  double loss_total = 0.0;
  double loss_singular = 0.0;
  double loss_regularizer = 0.0;
  double loss_matching = 0.0;
  AlignmentReport report;
  // Console diagnostics only; never serialized, so reruns stay
  // byte-identical.
  double wall_seconds = 0.0;
};

struct TrainResult {
  RunConfig config;
  std::vector<ExperimentRecord> trajectory;
  AlignmentReport train_report;
  AlignmentReport test_report;
  double min_sigma = 0.0;      // smallest singular value over train instances
  double frac_aligned = 0.0;   // fraction of train instances with sigma1/sqrt(k) >= 0.95
  // retrieval["m0->m1"][K] = Recall@K on the test split
  std::map<std::string, std::map<std::size_t, double>> retrieval;
  double mean_recall_at_1 = 0.0;
  double auc = 0.0;
  double accuracy = 0.0;
};

// Runs the configured objective; emits trajectory.csv, summary.json,
// schema.json and checkpoint.json into cfg.out_dir when set.
TrainResult train(const RunConfig& cfg);

struct GradcheckSuite {
  std::string name;
  std::size_t cases = 0;
  std::size_t skipped = 0;  // degenerate spectra, reported but not failed
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct GradcheckReport {
  std::vector<GradcheckSuite> suites;
  bool all_pass = true;
};

// Finite-difference verification of every analytic gradient path, on small
// dimensions (d <= 16, k <= 4, batch <= 4).
GradcheckReport gradcheck(std::uint64_t seed);

struct SuiteResult {
  nlohmann::ordered_json comparison;
  bool pass = true;
};

// name: collapse-demo | ablate | robustness. Runs the arm set on shared
// data/seeds, writes per-arm outputs below out_root plus comparison.json.
SuiteResult run_suite(const std::string& name, const RunConfig& base_cfg,
                      const std::string& out_root);

// Shortest-round-trip decimal formatting, locale independent.
std::string format_double(double v);

}  // namespace pmrl
