#include <doctest.h>

#include <cmath>

#include "pmrl/metrics.hpp"
#include "test_util.hpp"

using namespace pmrl;
using namespace pmrl::testing;

namespace {

template <typename Fn>
ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected pmrl::Error");
}

Matrix aligned_along(std::size_t d, std::size_t axis, std::size_t k) {
  std::vector<double> dir(d, 0.0);
  dir[axis] = 1.0;
  Matrix z(d, k);
  for (std::size_t c = 0; c < k; ++c) z.set_column(c, dir);
  return z;
}

}  // namespace

TEST_CASE("alignment report on a fully aligned batch") {
  const std::vector<Matrix> batch{aligned_along(5, 0, 3), aligned_along(5, 1, 3)};
  const AlignmentReport report = alignment_report(batch);
  CHECK(report.mean_pairwise_cosine == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.min_pairwise_cosine == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.mean_sigma1_over_sqrt_k == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.mean_effective_rank == doctest::Approx(1.0).epsilon(1e-12));
  // u1 equals each instance's common direction, so the off-diagonal
  // similarity is the similarity of those directions: e1 . e2 = 0.
  CHECK(std::abs(report.mean_offdiag_u1_similarity) <= 1e-12);

  const AlignmentReport same = alignment_report(
      {aligned_along(5, 0, 3), aligned_along(5, 0, 3)});
  CHECK(same.mean_offdiag_u1_similarity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alignment report on orthonormal columns") {
  const Matrix z = Matrix::from_columns({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
  const AlignmentReport report = alignment_report({z});
  CHECK(report.mean_pairwise_cosine == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(report.mean_sigma1_over_sqrt_k ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("alignment report on the closed-form two-column instance") {
  const Matrix z = Matrix::from_columns(
      {{1.0, 0.0, 0.0}, {0.7071067811865476, 0.7071067811865476, 0.0}});
  const AlignmentReport report = alignment_report({z});
  CHECK(report.mean_pairwise_cosine == doctest::Approx(0.7071068).epsilon(1e-7));
  CHECK(report.mean_sigma1_over_sqrt_k == doctest::Approx(0.9238795).epsilon(1e-7));
}

TEST_CASE("alignment report cosine agrees with an independent computation") {
  Rng rng(51);
  const auto batch = random_separated_batch(rng, 6, 7, 4);
  const AlignmentReport report = alignment_report(batch);

  double sum = 0.0;
  double norm_sum = 0.0;
  for (const auto& z : batch) {
    double sq = 0.0;
    for (std::size_t i = 0; i < z.cols(); ++i) {
      for (std::size_t j = 0; j < z.cols(); ++j) {
        if (i != j) sum += dot(z.column(i), z.column(j));
      }
      sq += 1.0;  // unit columns
    }
    norm_sum += sq;
    // Exact spectrum identity per instance: sum sigma_j^2 = k.
    const auto sigma = svd_thin(z).sigma;
    double sig_sq = 0.0;
    for (double s : sigma) sig_sq += s * s;
    CHECK(std::abs(sig_sq - static_cast<double>(z.cols())) <= 1e-9);
  }
  const double k = 4.0;
  const double expect = sum / (static_cast<double>(batch.size()) * k * (k - 1.0));
  CHECK(std::abs(report.mean_pairwise_cosine - expect) <= 1e-10);
}

TEST_CASE("recall at k on identical query and gallery sets") {
  Rng rng(52);
  std::vector<std::vector<double>> reps;
  for (int i = 0; i < 12; ++i) {
    reps.push_back(random_unit_columns(rng, 6, 2).column(0));
  }
  std::vector<std::size_t> truth(reps.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = i;
  const auto recalls = recall_at_k(reps, reps, truth, {1, 5, 10});
  CHECK(recalls.at(1) == 1.0);
  CHECK(recalls.at(5) == 1.0);
}

TEST_CASE("recall at k on an adversarial gallery") {
  const std::size_t n = 10;
  std::vector<std::vector<double>> queries, gallery;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> q(n, 0.0), g(n, 0.0);
    q[i] = 1.0;
    g[i] = -1.0;  // true match has similarity -1, everything else 0
    queries.push_back(q);
    gallery.push_back(g);
  }
  std::vector<std::size_t> truth(n);
  for (std::size_t i = 0; i < n; ++i) truth[i] = i;
  const auto recalls = recall_at_k(queries, gallery, truth, {1, 9, 10});
  CHECK(recalls.at(1) == 0.0);
  CHECK(recalls.at(9) == 0.0);
  CHECK(recalls.at(10) == 1.0);
}

TEST_CASE("recall at k is monotone and near chance for random vectors") {
  Rng rng(53);
  double chance_sum = 0.0;
  const int sims = 20;
  for (int rep = 0; rep < sims; ++rep) {
    std::vector<std::vector<double>> queries, gallery;
    for (int i = 0; i < 100; ++i) {
      queries.push_back(random_unit_columns(rng, 32, 2).column(0));
      gallery.push_back(random_unit_columns(rng, 32, 2).column(0));
    }
    std::vector<std::size_t> truth(queries.size());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = i;
    const auto recalls = recall_at_k(queries, gallery, truth, {1, 5, 10, 50});
    CHECK(recalls.at(1) <= recalls.at(5));
    CHECK(recalls.at(5) <= recalls.at(10));
    CHECK(recalls.at(10) <= recalls.at(50));
    chance_sum += recalls.at(1);
  }
  const double chance = chance_sum / sims;
  CHECK(chance <= 0.03);  // expectation 0.01
}

TEST_CASE("recall tie-breaking prefers the lower gallery index") {
  const std::vector<std::vector<double>> queries{{1.0, 0.0}};
  const std::vector<std::vector<double>> gallery{{1.0, 0.0}, {1.0, 0.0}};
  CHECK(recall_at_k(queries, gallery, {0}, {1}).at(1) == 1.0);
  CHECK(recall_at_k(queries, gallery, {1}, {1}).at(1) == 0.0);
}

TEST_CASE("recall validates input lengths") {
  const std::vector<std::vector<double>> reps{{1.0, 0.0}};
  CHECK(error_code_of([&] { recall_at_k(reps, reps, {0, 1}, {1}); }) ==
        ErrorCode::LengthMismatch);
}

TEST_CASE("modality contribution of a fully aligned batch") {
  const std::vector<Matrix> batch{aligned_along(6, 2, 4)};
  const Matrix contrib = modality_contribution(batch);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(contrib(m, 0) == doctest::Approx(0.5).epsilon(1e-9));  // 1/sqrt(4)
  }
}

TEST_CASE("modality contribution of orthonormal columns is a permutation pattern") {
  const Matrix z = Matrix::from_columns({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
  const Matrix contrib = modality_contribution({z});
  for (std::size_t m = 0; m < 2; ++m) {
    double row_max = 0.0, row_sum = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
      row_max = std::max(row_max, contrib(m, j));
      row_sum += contrib(m, j) * contrib(m, j);
    }
    CHECK(row_max == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("modality contribution rows have unit sum of squares per instance") {
  Rng rng(54);
  const Matrix z = random_separated_unit_columns(rng, 9, 4);
  const Matrix contrib = modality_contribution({z});
  for (std::size_t m = 0; m < 4; ++m) {
    double sq = 0.0;
    for (std::size_t j = 0; j < 4; ++j) sq += contrib(m, j) * contrib(m, j);
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Re-running the SVD yields the identical matrix (sign canonicalization
  // is deterministic).
  CHECK(modality_contribution({z}) == contrib);
}

TEST_CASE("classification metrics on a perfect predictor") {
  const std::vector<double> scores{1.0, 1.0, 0.0, 0.0};
  const std::vector<int> labels{1, 1, 0, 0};
  const ClassificationMetrics m = classification_metrics(scores, labels);
  CHECK(m.auc == 1.0);
  CHECK(m.accuracy == 1.0);
}

TEST_CASE("classification metrics on a constant predictor") {
  const std::vector<double> scores{0.5, 0.5, 0.5, 0.5, 0.5};
  const std::vector<int> labels{1, 1, 1, 0, 0};
  const ClassificationMetrics m = classification_metrics(scores, labels);
  CHECK(m.auc == 0.5);
  // >= threshold convention: every instance is predicted positive.
  CHECK(m.accuracy == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("classification metrics by exhaustive pair enumeration") {
  const std::vector<double> scores{0.9, 0.8, 0.3};
  const std::vector<int> labels{1, 0, 0};
  const ClassificationMetrics m = classification_metrics(scores, labels);
  CHECK(m.auc == 1.0);
  // At the 0.5 threshold the 0.8-scored negative is a false positive.
  CHECK(m.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("classification metrics validation") {
  const std::vector<double> scores{0.9, 0.8};
  const std::vector<int> ones{1, 1};
  CHECK(error_code_of([&] { classification_metrics(scores, ones); }) ==
        ErrorCode::SingleClass);
  const std::vector<int> labels{1, 0, 1};
  CHECK(error_code_of([&] { classification_metrics(scores, labels); }) ==
        ErrorCode::LengthMismatch);
}
