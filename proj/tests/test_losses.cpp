#include <doctest.h>

#include <cmath>

#include "pmrl/losses.hpp"
#include "pmrl/numdiff.hpp"
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

// Finite differences of a scalar of the whole batch, one instance at a time.
std::vector<Matrix> fd_batch(
    const std::function<double(const std::vector<Matrix>&)>& f,
    const std::vector<Matrix>& batch, double step = 1e-5) {
  std::vector<Matrix> grads;
  std::vector<Matrix> probe = batch;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    grads.push_back(central_difference(
        [&](const Matrix& m) {
          probe[i] = m;
          const double v = f(probe);
          probe[i] = batch[i];
          return v;
        },
        batch[i], step));
  }
  return grads;
}

double max_relative_error(const std::vector<Matrix>& a,
                          const std::vector<Matrix>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, relative_error(a[i], b[i]));
  }
  return worst;
}

// Test-side value oracle for the singular-value softmax loss: plain
// arithmetic on the spectrum, no max-shift.
double singular_value_oracle(const std::vector<Matrix>& batch, double tau) {
  double value = 0.0;
  for (const auto& z : batch) {
    const auto sigma = svd_thin(z).sigma;
    double denom = 0.0;
    for (double s : sigma) denom += std::exp(s / tau);
    value += -std::log(std::exp(sigma[0] / tau) / denom);
  }
  return value / static_cast<double>(batch.size());
}

// Test-side value oracle for the leading-direction regularizer.
double leading_direction_oracle(const std::vector<Matrix>& batch, double tau) {
  const std::size_t n = batch.size();
  std::vector<std::vector<double>> u1;
  u1.reserve(n);
  for (const auto& z : batch) u1.push_back(svd_thin(z).u.column(0));
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) logits[j] = dot(u1[i], u1[j]) / tau;
    value += log_sum_exp(logits) - logits[i];
  }
  return value / static_cast<double>(n);
}

// Test-side value oracle for the anchored volume contrast, built on
// gram_volume so the self-replacement term never goes through a swap.
double volume_contrastive_oracle(const std::vector<Matrix>& batch,
                                 std::size_t anchor, double tau) {
  const std::size_t n = batch.size();
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        logits[j] = -gram_volume(batch[i]) / tau;
      } else {
        Matrix swapped = batch[i];
        swapped.set_column(anchor, batch[j].column(anchor));
        logits[j] = -gram_volume(swapped) / tau;
      }
    }
    value += log_sum_exp(logits) - logits[i];
  }
  return value / static_cast<double>(n);
}

Matrix orthonormal_pair_instance() {
  return Matrix::from_columns({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
}

// Instance with u1 exactly equal to `axis1`: columns cos(t)*axis1 +- sin(t)*axis2.
Matrix known_leading_direction(std::size_t d, std::size_t axis1, std::size_t axis2,
                               double t) {
  std::vector<double> a(d, 0.0), b(d, 0.0);
  a[axis1] = 1.0;
  b[axis2] = 1.0;
  std::vector<double> c1(d), c2(d);
  for (std::size_t r = 0; r < d; ++r) {
    c1[r] = std::cos(t) * a[r] + std::sin(t) * b[r];
    c2[r] = std::cos(t) * a[r] - std::sin(t) * b[r];
  }
  return Matrix::from_columns({c1, c2});
}

std::vector<double> flatten_head(const MatchingHead& head) {
  std::vector<double> flat;
  flat.insert(flat.end(), head.l1.w.data().begin(), head.l1.w.data().end());
  flat.insert(flat.end(), head.l1.b.begin(), head.l1.b.end());
  flat.insert(flat.end(), head.l2.w.data().begin(), head.l2.w.data().end());
  flat.insert(flat.end(), head.l2.b.begin(), head.l2.b.end());
  return flat;
}

void unflatten_head(MatchingHead& head, std::span<const double> flat) {
  std::size_t at = 0;
  for (double& w : head.l1.w.data()) w = flat[at++];
  for (double& b : head.l1.b) b = flat[at++];
  for (double& w : head.l2.w.data()) w = flat[at++];
  for (double& b : head.l2.b) b = flat[at++];
}

}  // namespace

TEST_CASE("singular loss with equal logits is log 2") {
  const std::vector<Matrix> batch{orthonormal_pair_instance()};
  for (double tau : {0.05, 0.5, 2.0}) {
    const LossOutput out = pmrl_singular_loss(batch, tau);
    CHECK(out.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("singular loss vanishes at full alignment") {
  Rng rng(9);
  const std::vector<Matrix> batch{aligned_instance(rng, 8, 3)};
  const LossOutput out = pmrl_singular_loss(batch, 0.05);
  CHECK(out.value >= 0.0);
  CHECK(out.value <= 1e-12);
}

TEST_CASE("singular loss value matches the scalar oracle") {
  Rng rng(10);
  const auto batch = random_separated_batch(rng, 4, 8, 4);
  const LossOutput out = pmrl_singular_loss(batch, 0.05);
  CHECK(out.value == doctest::Approx(singular_value_oracle(batch, 0.05)).epsilon(1e-12));
}

TEST_CASE("singular loss gradient matches finite differences") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto batch = random_separated_batch(rng, 2, 8, 4);
    const LossOutput out = pmrl_singular_loss(batch, 0.05);
    const auto fd = fd_batch(
        [&](const std::vector<Matrix>& b) { return singular_value_oracle(b, 0.05); },
        batch);
    CHECK(max_relative_error(out.grad_z, fd) <= 1e-4);
  }
}

TEST_CASE("singular loss gradient equals the sigma chain-rule composition") {
  Rng rng(12);
  const auto batch = random_separated_batch(rng, 3, 8, 4);
  const double tau = 0.05;
  const LossOutput out = pmrl_singular_loss(batch, tau);
  const double n = static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const SvdResult svd = svd_thin(batch[i]);
    std::vector<double> logits(svd.sigma.size());
    for (std::size_t j = 0; j < logits.size(); ++j) logits[j] = svd.sigma[j] / tau;
    const double lse = log_sum_exp(logits);
    std::vector<double> grad_sigma(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      grad_sigma[j] =
          (std::exp(logits[j] - lse) - (j == 0 ? 1.0 : 0.0)) / (n * tau);
    }
    const Matrix composed = svd_backward(
        svd, Matrix(batch[i].rows(), batch[i].cols()), grad_sigma,
        Matrix(batch[i].cols(), batch[i].cols()));
    CHECK(relative_error(out.grad_z[i], composed) <= 1e-12);
  }
}

TEST_CASE("aligned instances minimize the singular loss over random matrices") {
  Rng rng(13);
  const std::vector<Matrix> aligned{aligned_instance(rng, 6, 3)};
  const double best = pmrl_singular_loss(aligned, 0.05).value;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::vector<Matrix> batch{random_unit_columns(rng, 6, 3)};
    CHECK(pmrl_singular_loss(batch, 0.05).value >= best);
  }
}

TEST_CASE("singular loss input validation") {
  CHECK(error_code_of([&] { pmrl_singular_loss({}, 0.05); }) == ErrorCode::EmptyBatch);
  Matrix bad = orthonormal_pair_instance();
  bad(0, 0) = 1.5;
  CHECK(error_code_of([&] { pmrl_singular_loss({bad}, 0.05); }) ==
        ErrorCode::NonUnitColumns);
}

TEST_CASE("leading-direction regularizer on identical instances is log N") {
  Rng rng(14);
  const Matrix z = random_separated_unit_columns(rng, 6, 3);
  const LossOutput out = leading_direction_reg({z, z}, 0.1);
  CHECK(out.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("leading-direction regularizer with orthogonal directions") {
  const Matrix z1 = known_leading_direction(4, 0, 2, 0.3);
  const Matrix z2 = known_leading_direction(4, 1, 3, 0.3);
  const std::vector<double> e1{1.0, 0.0, 0.0, 0.0};
  CHECK(relative_error(svd_thin(z1).u.column(0), e1) <= 1e-12);
  const LossOutput out = leading_direction_reg({z1, z2}, 0.1);
  // log(e^10 + 1) - 10 per instance.
  CHECK(out.value == doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-9));
}

TEST_CASE("leading-direction value satisfies the constant-numerator identity") {
  Rng rng(15);
  const auto batch = random_separated_batch(rng, 5, 8, 3);
  const double tau = 0.1;
  const LossOutput out = leading_direction_reg(batch, tau);

  // Identity form: (1/N) sum_i logsumexp_j(s_ij/tau) - 1/tau.
  std::vector<std::vector<double>> u1;
  for (const auto& z : batch) u1.push_back(svd_thin(z).u.column(0));
  double identity = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<double> logits(batch.size());
    for (std::size_t j = 0; j < batch.size(); ++j) {
      logits[j] = dot(u1[i], u1[j]) / tau;
    }
    identity += log_sum_exp(logits) / static_cast<double>(batch.size());
  }
  identity -= 1.0 / tau;
  CHECK(std::abs(out.value - identity) <= 1e-10);
}

TEST_CASE("leading-direction gradient matches finite differences through the SVD") {
  Rng rng(16);
  for (int trial = 0; trial < 5; ++trial) {
    const auto batch = random_separated_batch(rng, 4, 8, 3);
    const LossOutput out = leading_direction_reg(batch, 0.1);
    const auto fd = fd_batch(
        [&](const std::vector<Matrix>& b) { return leading_direction_oracle(b, 0.1); },
        batch);
    CHECK(max_relative_error(out.grad_z, fd) <= 1e-3);
  }
}

TEST_CASE("leading-direction regularizer batch size validation") {
  CHECK(error_code_of([&] { leading_direction_reg({}, 0.1); }) == ErrorCode::EmptyBatch);
  const Matrix z = orthonormal_pair_instance();
  CHECK(error_code_of([&] { leading_direction_reg({z}, 0.1); }) ==
        ErrorCode::BatchTooSmall);
}

TEST_CASE("instance matching with a zero head predicts 0.5 and log 2") {
  Rng rng(17);
  const auto batch = random_separated_batch(rng, 4, 6, 3);
  MatchingHead head = make_matching_head(18, 8, rng);
  for (double& w : head.l1.w.data()) w = 0.0;
  for (double& b : head.l1.b) b = 0.0;
  for (double& w : head.l2.w.data()) w = 0.0;
  for (double& b : head.l2.b) b = 0.0;
  const InstanceMatchingResult res = instance_matching_loss(batch, head, 5);
  CHECK(res.loss.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("hard negatives agree with a brute-force similarity scan") {
  Rng rng(18);
  const auto batch = random_separated_batch(rng, 4, 6, 3);
  MatchingHead head = make_matching_head(18, 8, rng);
  const std::uint64_t seed = 99;
  const InstanceMatchingResult res = instance_matching_loss(batch, head, seed);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t slot = res.negative_slot[i];
    CHECK(slot < 3);
    double best = -2.0;
    std::size_t best_j = 0;
    bool found = false;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      if (j == i) continue;
      const double s = dot(batch[i].column(slot), batch[j].column(slot));
      if (!found || s > best) {
        best = s;
        best_j = j;
        found = true;
      }
    }
    CHECK(res.negative_donor[i] == best_j);
  }
  // Same seed, same selections and value bits.
  const InstanceMatchingResult again = instance_matching_loss(batch, head, seed);
  CHECK(again.negative_slot == res.negative_slot);
  CHECK(again.negative_donor == res.negative_donor);
  CHECK(again.loss.value == res.loss.value);
}

TEST_CASE("instance matching gradients match finite differences") {
  Rng rng(19);
  const auto batch = random_separated_batch(rng, 4, 5, 3);
  MatchingHead head = make_matching_head(15, 6, rng);
  const std::uint64_t seed = 7;
  const InstanceMatchingResult res = instance_matching_loss(batch, head, seed);

  // Head parameters.
  MatchingHead probe = head;
  const auto fd_head = central_difference(
      [&](std::span<const double> flat) {
        unflatten_head(probe, flat);
        return instance_matching_loss(batch, probe, seed).loss.value;
      },
      flatten_head(head), 1e-5);
  const auto analytic_head = flatten_head(MatchingHead{
      {res.head_grads.l1.w, res.head_grads.l1.b},
      {res.head_grads.l2.w, res.head_grads.l2.b}});
  CHECK(relative_error(analytic_head, fd_head) <= 1e-5);

  // Representation matrices (negative selection is locally constant).
  const auto fd_z = fd_batch(
      [&](const std::vector<Matrix>& b) {
        return instance_matching_loss(b, head, seed).loss.value;
      },
      batch);
  CHECK(max_relative_error(res.loss.grad_z, fd_z) <= 1e-4);
}

TEST_CASE("a trainable head drives the matching loss toward zero") {
  // Two instances with basis-vector columns make matched/mismatched tuples
  // an XOR-style problem the two-layer head must solve.
  const Matrix z1 = Matrix::from_columns({{1.0, 0.0}, {1.0, 0.0}});
  const Matrix z2 = Matrix::from_columns({{0.0, 1.0}, {0.0, 1.0}});
  const std::vector<Matrix> batch{z1, z2};
  Rng rng(20);
  MatchingHead head = make_matching_head(4, 8, rng);

  double value = 0.0;
  for (int iter = 0; iter < 4000; ++iter) {
    const InstanceMatchingResult res = instance_matching_loss(batch, head, 3);
    value = res.loss.value;
    const double lr = 0.5;
    for (std::size_t i = 0; i < head.l1.w.data().size(); ++i) {
      head.l1.w.data()[i] -= lr * res.head_grads.l1.w.data()[i];
    }
    for (std::size_t i = 0; i < head.l1.b.size(); ++i) {
      head.l1.b[i] -= lr * res.head_grads.l1.b[i];
    }
    for (std::size_t i = 0; i < head.l2.w.data().size(); ++i) {
      head.l2.w.data()[i] -= lr * res.head_grads.l2.w.data()[i];
    }
    for (std::size_t i = 0; i < head.l2.b.size(); ++i) {
      head.l2.b[i] -= lr * res.head_grads.l2.b[i];
    }
  }
  CHECK(value < 0.05);
}

TEST_CASE("instance matching batch validation") {
  Rng rng(21);
  MatchingHead head = make_matching_head(18, 8, rng);
  CHECK(error_code_of([&] { instance_matching_loss({}, head, 1); }) ==
        ErrorCode::EmptyBatch);
  const auto batch = random_separated_batch(rng, 1, 6, 3);
  CHECK(error_code_of([&] { instance_matching_loss(batch, head, 1); }) ==
        ErrorCode::BatchTooSmall);
  const auto batch2 = random_separated_batch(rng, 2, 5, 3);
  CHECK(error_code_of([&] { instance_matching_loss(batch2, head, 1); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("combined loss with zero weights equals the singular loss exactly") {
  Rng rng(22);
  const auto batch = random_separated_batch(rng, 3, 6, 3);
  MatchingHead head = make_matching_head(18, 8, rng);
  LossConfig cfg;
  cfg.lambda1 = 0.0;
  cfg.lambda2 = 0.0;
  const CombinedResult combined = combined_loss(batch, head, cfg, 1);
  const LossOutput singular = pmrl_singular_loss(batch, cfg.tau1);
  CHECK(combined.loss.value == singular.value);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(combined.loss.grad_z[i] == singular.grad_z[i]);
  }
}

TEST_CASE("combined loss recomposes from its terms") {
  Rng rng(23);
  const auto batch = random_separated_batch(rng, 4, 6, 3);
  MatchingHead head = make_matching_head(18, 8, rng);
  const LossConfig cfg;  // defaults: tau1 0.05, tau2 0.1, lambda1 1, lambda2 0.1
  const std::uint64_t seed = 42;
  const CombinedResult combined = combined_loss(batch, head, cfg, seed);

  const double manual = pmrl_singular_loss(batch, cfg.tau1).value +
                        cfg.lambda1 * leading_direction_reg(batch, cfg.tau2).value +
                        cfg.lambda2 * instance_matching_loss(batch, head, seed).loss.value;
  CHECK(std::abs(combined.loss.value - manual) <= 1e-12);
  CHECK(combined.singular_term == pmrl_singular_loss(batch, cfg.tau1).value);
}

TEST_CASE("combined loss is deterministic") {
  Rng rng(24);
  const auto batch = random_separated_batch(rng, 3, 6, 3);
  MatchingHead head = make_matching_head(18, 8, rng);
  const CombinedResult a = combined_loss(batch, head, LossConfig{}, 9);
  const CombinedResult b = combined_loss(batch, head, LossConfig{}, 9);
  CHECK(a.loss.value == b.loss.value);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(a.loss.grad_z[i] == b.loss.grad_z[i]);
  }
}

TEST_CASE("pairwise InfoNCE oracle values") {
  // Identical pairs, orthogonal across instances, tau = 1:
  // per instance -log(e / (e + 1)) = log(1 + e) - 1.
  const std::vector<std::vector<double>> a{{1.0, 0.0}, {0.0, 1.0}};
  const PairwiseLossOutput out = pairwise_infonce(a, a, 1.0);
  CHECK(out.value == doctest::Approx(std::log1p(std::exp(1.0)) - 1.0).epsilon(1e-12));
  CHECK(out.value == doctest::Approx(0.3132617).epsilon(1e-6));

  // All representations identical: value = log N.
  const std::vector<std::vector<double>> same(4, std::vector<double>{1.0, 0.0});
  CHECK(pairwise_infonce(same, same, 0.3).value ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("pairwise InfoNCE gradients match finite differences") {
  Rng rng(25);
  const std::size_t n = 4, d = 5;
  std::vector<std::vector<double>> m1(n), m2(n);
  for (std::size_t i = 0; i < n; ++i) {
    m1[i] = random_unit_columns(rng, d, 2).column(0);
    m2[i] = random_unit_columns(rng, d, 2).column(0);
  }
  const double tau = 0.5;
  const PairwiseLossOutput out = pairwise_infonce(m1, m2, tau);

  for (std::size_t i = 0; i < n; ++i) {
    auto probe = m1;
    const auto fd = central_difference(
        [&](std::span<const double> v) {
          probe[i].assign(v.begin(), v.end());
          return pairwise_infonce(probe, m2, tau).value;
        },
        m1[i], 1e-6);
    CHECK(relative_error(out.grad_m1[i], fd) <= 1e-5);

    auto probe2 = m2;
    const auto fd2 = central_difference(
        [&](std::span<const double> v) {
          probe2[i].assign(v.begin(), v.end());
          return pairwise_infonce(m1, probe2, tau).value;
        },
        m2[i], 1e-6);
    CHECK(relative_error(out.grad_m2[i], fd2) <= 1e-5);
  }
}

TEST_CASE("pairwise InfoNCE validation") {
  const std::vector<std::vector<double>> a{{1.0, 0.0}, {0.0, 1.0}};
  const std::vector<std::vector<double>> one{{1.0, 0.0}};
  CHECK(error_code_of([&] { pairwise_infonce({}, {}, 1.0); }) == ErrorCode::EmptyBatch);
  CHECK(error_code_of([&] { pairwise_infonce(a, one, 1.0); }) ==
        ErrorCode::LengthMismatch);
  CHECK(error_code_of([&] { pairwise_infonce(one, one, 1.0); }) ==
        ErrorCode::BatchTooSmall);
}

TEST_CASE("gram volume examples and determinant oracle") {
  CHECK(gram_volume(orthonormal_pair_instance()) == doctest::Approx(1.0).epsilon(1e-12));
  Rng rng(26);
  CHECK(gram_volume(aligned_instance(rng, 6, 3)) <= 1e-9);

  const Matrix z =
      Matrix::from_columns({{1.0, 0.0, 0.0}, {0.7071067811865476, 0.7071067811865476, 0.0}});
  // 2x2 determinant oracle: det G = 1 - c^2 = 0.5.
  CHECK(gram_volume(z) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  CHECK(gram_volume(z) == doctest::Approx(0.7071068).epsilon(1e-6));

  // Random 3-column case against an explicit 3x3 determinant.
  const Matrix r = random_unit_columns(rng, 7, 3);
  const Matrix g = gram(r).g;
  const double det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) -
                     g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
                     g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
  CHECK(gram_volume(r) == doctest::Approx(std::sqrt(det)).epsilon(1e-8));
}

TEST_CASE("volume-only loss on orthonormal instances is one") {
  const std::vector<Matrix> batch{orthonormal_pair_instance(),
                                  orthonormal_pair_instance()};
  CHECK(volume_only_loss(batch).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("volume-only loss stalls at full alignment") {
  // k = 3 aligned instances have at least two singular values below the
  // null threshold; every sigma partial product is then zero.
  Rng rng(27);
  const std::vector<Matrix> batch{aligned_instance(rng, 6, 3),
                                  aligned_instance(rng, 6, 3)};
  for (const auto& z : batch) {
    const auto sigma = svd_thin(z).sigma;
    std::size_t nulls = 0;
    for (double s : sigma) {
      if (s < kNullThreshold) ++nulls;
    }
    REQUIRE(nulls >= 2);
    CHECK(effective_rank(sigma, 0.01) == 1);
  }
  const LossOutput out = volume_only_loss(batch);
  CHECK(out.value <= 1e-9);
  for (const auto& g : out.grad_z) CHECK(g.frobenius_norm() == 0.0);
}

TEST_CASE("volume-only gradient matches finite differences") {
  Rng rng(28);
  for (int trial = 0; trial < 10; ++trial) {
    const auto batch = random_separated_batch(rng, 2, 8, 3, 1e-2);
    const LossOutput out = volume_only_loss(batch);
    const auto fd = fd_batch(
        [&](const std::vector<Matrix>& b) {
          double v = 0.0;
          for (const auto& z : b) v += gram_volume(z);
          return v / static_cast<double>(b.size());
        },
        batch);
    CHECK(max_relative_error(out.grad_z, fd) <= 1e-4);
  }
}

TEST_CASE("volume contrast on identical instances is log N") {
  Rng rng(29);
  const Matrix z = random_separated_unit_columns(rng, 6, 3);
  const LossOutput out = volume_contrastive_loss({z, z}, 0, 0.05);
  CHECK(out.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("volume contrast scalar oracle with zero-volume positives") {
  // Positives are rank-1 (volume 0); every cross negative is orthonormal
  // (volume 1); tau = 1 gives log(1 + e^-1) per instance.
  const Matrix z1 = Matrix::from_columns({{1.0, 0.0}, {1.0, 0.0}});
  const Matrix z2 = Matrix::from_columns({{0.0, 1.0}, {0.0, 1.0}});
  const LossOutput out = volume_contrastive_loss({z1, z2}, 0, 1.0);
  CHECK(out.value == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-9));
  CHECK(out.value == doctest::Approx(0.3132617).epsilon(1e-6));
}

TEST_CASE("volume contrast value matches the swap oracle") {
  Rng rng(30);
  for (std::size_t anchor : {0u, 2u}) {
    const auto batch = random_separated_batch(rng, 4, 7, 3);
    const LossOutput out = volume_contrastive_loss(batch, anchor, 0.5);
    CHECK(std::abs(out.value - volume_contrastive_oracle(batch, anchor, 0.5)) <= 1e-12);
  }
}

TEST_CASE("volume contrast gradient matches finite differences") {
  Rng rng(31);
  const auto batch = random_separated_batch(rng, 3, 8, 3, 1e-2);
  const LossOutput out = volume_contrastive_loss(batch, 1, 0.5);
  const auto fd = fd_batch(
      [&](const std::vector<Matrix>& b) {
        return volume_contrastive_oracle(b, 1, 0.5);
      },
      batch);
  CHECK(max_relative_error(out.grad_z, fd) <= 1e-4);
}

TEST_CASE("volume contrast validation") {
  Rng rng(32);
  const auto batch = random_separated_batch(rng, 2, 6, 3);
  CHECK(error_code_of([&] { volume_contrastive_loss({}, 0, 1.0); }) ==
        ErrorCode::EmptyBatch);
  CHECK(error_code_of([&] { volume_contrastive_loss({batch[0]}, 0, 1.0); }) ==
        ErrorCode::BatchTooSmall);
  CHECK(error_code_of([&] { volume_contrastive_loss(batch, 3, 1.0); }) ==
        ErrorCode::BadAnchor);
}

TEST_CASE("loss values are invariant to joint column permutation") {
  Rng rng(33);
  const auto batch = random_separated_batch(rng, 3, 6, 3);
  std::vector<Matrix> permuted;
  const std::size_t perm[3] = {2, 0, 1};
  for (const auto& z : batch) {
    std::vector<std::vector<double>> cols;
    for (std::size_t c : perm) cols.push_back(z.column(c));
    permuted.push_back(Matrix::from_columns(cols));
  }
  CHECK(pmrl_singular_loss(batch, 0.05).value ==
        doctest::Approx(pmrl_singular_loss(permuted, 0.05).value).epsilon(1e-12));
  CHECK(leading_direction_reg(batch, 0.1).value ==
        doctest::Approx(leading_direction_reg(permuted, 0.1).value).epsilon(1e-12));
  CHECK(volume_only_loss(batch).value ==
        doctest::Approx(volume_only_loss(permuted).value).epsilon(1e-12));
  // Anchor remapped jointly with the permutation: old slot 1 is new slot 2.
  CHECK(volume_contrastive_loss(batch, 1, 0.5).value ==
        doctest::Approx(volume_contrastive_loss(permuted, 2, 0.5).value).epsilon(1e-12));
}
