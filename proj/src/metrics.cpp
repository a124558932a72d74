#include "pmrl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pmrl/linalg.hpp"

namespace pmrl {

AlignmentReport alignment_report(const std::vector<Matrix>& z_batch) {
  if (z_batch.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
  const std::size_t n = z_batch.size();
  const std::size_t k = z_batch.front().cols();

  AlignmentReport report;
  report.mean_sigma.assign(k, 0.0);
  report.min_pairwise_cosine = 2.0;

  double cosine_sum = 0.0;
  std::size_t cosine_count = 0;
  std::vector<std::vector<double>> u1;
  u1.reserve(n);

  for (const auto& z : z_batch) {
    if (z.cols() != k) {
      throw Error(ErrorCode::ShapeMismatch, "instances disagree on k");
    }
    const GramMatrix g = gram(z);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        cosine_sum += g.g(i, j);
        report.min_pairwise_cosine = std::min(report.min_pairwise_cosine, g.g(i, j));
        ++cosine_count;
      }
    }
    const SvdResult svd = svd_thin(z);
    for (std::size_t j = 0; j < k; ++j) report.mean_sigma[j] += svd.sigma[j];
    report.mean_sigma1_over_sqrt_k +=
        svd.sigma[0] / std::sqrt(static_cast<double>(k));
    report.mean_effective_rank +=
        static_cast<double>(effective_rank(svd.sigma, 0.01));
    u1.push_back(svd.u.column(0));
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  report.mean_pairwise_cosine = cosine_sum / static_cast<double>(cosine_count);
  for (double& s : report.mean_sigma) s *= inv_n;
  report.mean_sigma1_over_sqrt_k *= inv_n;
  report.mean_effective_rank *= inv_n;

  if (n > 1) {
    double sim_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) sim_sum += dot(u1[i], u1[j]);
      }
    }
    report.mean_offdiag_u1_similarity =
        sim_sum / static_cast<double>(n * (n - 1));
  }
  return report;
}

std::map<std::size_t, double> recall_at_k(
    const std::vector<std::vector<double>>& query_reps,
    const std::vector<std::vector<double>>& gallery_reps,
    const std::vector<std::size_t>& ground_truth,
    const std::vector<std::size_t>& k_values) {
  if (query_reps.size() != ground_truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "queries vs ground truth");
  }
  if (query_reps.empty()) throw Error(ErrorCode::EmptyBatch, "no queries");

  std::map<std::size_t, double> recalls;
  std::vector<std::size_t> hits(k_values.size(), 0);
  for (std::size_t i = 0; i < query_reps.size(); ++i) {
    const std::size_t truth = ground_truth[i];
    if (truth >= gallery_reps.size()) {
      throw Error(ErrorCode::LengthMismatch, "ground truth index out of range");
    }
    const double true_sim = dot(query_reps[i], gallery_reps[truth]);
    // rank = number of gallery items strictly ahead of the true match,
    // counting equal-similarity items with a lower index.
    std::size_t rank = 0;
    for (std::size_t j = 0; j < gallery_reps.size(); ++j) {
      if (j == truth) continue;
      const double sim = dot(query_reps[i], gallery_reps[j]);
      if (sim > true_sim || (sim == true_sim && j < truth)) ++rank;
    }
    for (std::size_t t = 0; t < k_values.size(); ++t) {
      if (rank < k_values[t]) ++hits[t];
    }
  }
  for (std::size_t t = 0; t < k_values.size(); ++t) {
    recalls[k_values[t]] =
        static_cast<double>(hits[t]) / static_cast<double>(query_reps.size());
  }
  return recalls;
}

Matrix modality_contribution(const std::vector<Matrix>& z_batch) {
  if (z_batch.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
  const std::size_t k = z_batch.front().cols();
  Matrix mean_abs_v(k, k);
  for (const auto& z : z_batch) {
    if (z.cols() != k) {
      throw Error(ErrorCode::ShapeMismatch, "instances disagree on k");
    }
    const SvdResult svd = svd_thin(z);
    for (std::size_t m = 0; m < k; ++m) {
      for (std::size_t j = 0; j < k; ++j) {
        mean_abs_v(m, j) += std::abs(svd.v(m, j));
      }
    }
  }
  mean_abs_v *= 1.0 / static_cast<double>(z_batch.size());
  return mean_abs_v;
}

ClassificationMetrics classification_metrics(std::span<const double> scores,
                                             std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "scores vs labels");
  }
  if (scores.empty()) throw Error(ErrorCode::EmptyBatch, "no scores");

  std::size_t positives = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] >= 0.5 ? 1 : 0;
    if (predicted == labels[i]) ++correct;
    if (labels[i] == 1) ++positives;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::SingleClass, "AUC needs both classes present");
  }

  double auc_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        auc_sum += 1.0;
      } else if (scores[i] == scores[j]) {
        auc_sum += 0.5;
      }
    }
  }

  ClassificationMetrics out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  out.auc = auc_sum / (static_cast<double>(positives) * static_cast<double>(negatives));
  return out;
}

}  // namespace pmrl
