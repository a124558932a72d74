#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "pmrl/matrix.hpp"

namespace pmrl {

// Alignment diagnostics over a batch of representation matrices. sigma1
// over sqrt(k) is the full-alignment gauge: it reaches 1 exactly when all
// modality columns coincide.
struct AlignmentReport {
  double mean_pairwise_cosine = 0.0;
  double min_pairwise_cosine = 0.0;
  std::vector<double> mean_sigma;  // per position, averaged over instances
  double mean_sigma1_over_sqrt_k = 0.0;
  double mean_effective_rank = 0.0;
  double mean_offdiag_u1_similarity = 0.0;  // 0 for a single instance
};

// Effective rank uses a relative threshold of 0.01 for reporting.
AlignmentReport alignment_report(const std::vector<Matrix>& z_batch);

// Recall@K by cosine similarity; ties broken toward the lower gallery
// index. ground_truth[i] is the gallery index matching query i.
std::map<std::size_t, double> recall_at_k(
    const std::vector<std::vector<double>>& query_reps,
    const std::vector<std::vector<double>>& gallery_reps,
    const std::vector<std::size_t>& ground_truth,
    const std::vector<std::size_t>& k_values);

// Mean |V| over instances: entry (m, j) couples modality m with singular
// position j.
Matrix modality_contribution(const std::vector<Matrix>& z_batch);

struct ClassificationMetrics {
  double auc = 0.0;
  double accuracy = 0.0;
};

// Accuracy at the >= 0.5 threshold; AUC by pairwise comparison with ties
// counted as 0.5. Throws SingleClass when labels lack a class.
ClassificationMetrics classification_metrics(std::span<const double> scores,
                                             std::span<const int> labels);

}  // namespace pmrl
