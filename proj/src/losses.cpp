#include "pmrl/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pmrl/rng.hpp"

namespace pmrl {

namespace {

void check_nonempty(const std::vector<Matrix>& z_batch) {
  if (z_batch.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
}

void check_common_shape(const std::vector<Matrix>& z_batch) {
  for (const auto& z : z_batch) {
    if (z.rows() != z_batch.front().rows() || z.cols() != z_batch.front().cols()) {
      throw Error(ErrorCode::ShapeMismatch, "instances disagree on d or k");
    }
  }
}

void check_unit_columns(const Matrix& z) {
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double sq = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) sq += z(r, c) * z(r, c);
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
      throw Error(ErrorCode::NonUnitColumns,
                  "column " + std::to_string(c) + " norm is off by more than 1e-6");
    }
  }
}

// U diag(coeff) V^T
Matrix scaled_uv(const SvdResult& svd, std::span<const double> coeff) {
  const std::size_t d = svd.u.rows();
  const std::size_t k = svd.sigma.size();
  Matrix out(d, k);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        sum += coeff[j] * svd.u(r, j) * svd.v(c, j);
      }
      out(r, c) = sum;
    }
  }
  return out;
}

// prod_{l != j} sigma_l for each j, without division; all-zero when two or
// more singular values sit below the null threshold.
std::vector<double> volume_partials(std::span<const double> sigma) {
  const std::size_t k = sigma.size();
  std::size_t nulls = 0;
  for (double s : sigma) {
    if (s < kNullThreshold) ++nulls;
  }
  std::vector<double> partials(k, 0.0);
  if (nulls >= 2) return partials;
  std::vector<double> prefix(k + 1, 1.0), suffix(k + 1, 1.0);
  for (std::size_t j = 0; j < k; ++j) prefix[j + 1] = prefix[j] * sigma[j];
  for (std::size_t j = k; j-- > 0;) suffix[j] = suffix[j + 1] * sigma[j];
  for (std::size_t j = 0; j < k; ++j) partials[j] = prefix[j] * suffix[j + 1];
  return partials;
}

double bce_from_logit(double logit, double label) {
  // log(1 + e^logit) - y * logit, computed without overflow.
  return std::max(logit, 0.0) - label * logit + std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace

double log_sum_exp(std::span<const double> x) {
  double hi = x[0];
  for (double v : x) hi = std::max(hi, v);
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

LossOutput pmrl_singular_loss(const std::vector<Matrix>& z_batch, double tau1) {
  check_nonempty(z_batch);
  const double n = static_cast<double>(z_batch.size());
  LossOutput out;
  out.grad_z.reserve(z_batch.size());
  for (const auto& z : z_batch) {
    if (z.cols() != z_batch.front().cols()) {
      throw Error(ErrorCode::ShapeMismatch, "instances disagree on k");
    }
    check_unit_columns(z);
    const SvdResult svd = svd_thin(z);
    const std::size_t k = svd.sigma.size();

    std::vector<double> logits(k);
    for (std::size_t j = 0; j < k; ++j) logits[j] = svd.sigma[j] / tau1;
    const double lse = log_sum_exp(logits);
    out.value += (lse - logits[0]) / n;

    std::vector<double> coeff(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(logits[j] - lse);
      coeff[j] = (p - (j == 0 ? 1.0 : 0.0)) / (n * tau1);
    }
    out.grad_z.push_back(scaled_uv(svd, coeff));
  }
  return out;
}

LossOutput leading_direction_reg(const std::vector<Matrix>& z_batch, double tau2) {
  check_nonempty(z_batch);
  if (z_batch.size() < 2) {
    throw Error(ErrorCode::BatchTooSmall, "leading-direction regularizer needs N >= 2");
  }
  check_common_shape(z_batch);
  const std::size_t n = z_batch.size();
  const std::size_t d = z_batch.front().rows();
  const std::size_t k = z_batch.front().cols();

  std::vector<SvdResult> svds;
  std::vector<std::vector<double>> u1(n);
  svds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    svds.push_back(svd_thin(z_batch[i]));
    u1[i] = svds[i].u.column(0);
  }

  Matrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sim(i, j) = dot(u1[i], u1[j]);
  }

  LossOutput out;
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) logits[j] = sim(i, j) / tau2;
    const double lse = log_sum_exp(logits);
    out.value += (lse - logits[i]) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) q(i, j) = std::exp(logits[j] - lse);
  }

  const double scale = 1.0 / (static_cast<double>(n) * tau2);
  out.grad_z.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> g(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = scale * (q(i, j) + q(j, i));
      for (std::size_t r = 0; r < d; ++r) g[r] += w * u1[j][r];
    }
    for (std::size_t r = 0; r < d; ++r) g[r] -= 2.0 * scale * u1[i][r];
    // Tangent-space projection: u1 stays unit-norm under any perturbation.
    const double proj = dot(u1[i], g);
    for (std::size_t r = 0; r < d; ++r) g[r] -= proj * u1[i][r];

    Matrix grad_u(d, k);
    for (std::size_t r = 0; r < d; ++r) grad_u(r, 0) = g[r];
    out.grad_z.push_back(
        svd_backward(svds[i], grad_u, std::vector<double>(k, 0.0), Matrix(k, k)));
  }
  return out;
}

InstanceMatchingResult instance_matching_loss(const std::vector<Matrix>& z_batch,
                                              const MatchingHead& head,
                                              std::uint64_t seed) {
  check_nonempty(z_batch);
  if (z_batch.size() < 2) {
    throw Error(ErrorCode::BatchTooSmall, "instance matching needs N >= 2");
  }
  check_common_shape(z_batch);
  const std::size_t n = z_batch.size();
  const std::size_t d = z_batch.front().rows();
  const std::size_t k = z_batch.front().cols();
  if (head.input_dim() != k * d) {
    throw Error(ErrorCode::ShapeMismatch,
                "matching head expects input width " + std::to_string(k * d));
  }

  InstanceMatchingResult result;
  result.head_grads = zero_grads(head);
  result.negative_slot.resize(n);
  result.negative_donor.resize(n);
  result.loss.grad_z.assign(n, Matrix(d, k));

  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    result.negative_slot[i] = static_cast<std::size_t>(rng.uniform_below(k));
  }
  // Hard negative: the other instance whose slot-m* column is most
  // cosine-similar to ours; first maximum wins on ties.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = result.negative_slot[i];
    const auto own = z_batch[i].column(slot);
    double best = -2.0;
    std::size_t best_j = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = dot(own, z_batch[j].column(slot));
      if (s > best) {
        best = s;
        best_j = j;
      }
    }
    result.negative_donor[i] = best_j;
  }

  const double denom = 2.0 * static_cast<double>(n);
  std::vector<double> tuple(k * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int negative = 0; negative < 2; ++negative) {
      const std::size_t slot = result.negative_slot[i];
      const std::size_t donor = result.negative_donor[i];
      for (std::size_t m = 0; m < k; ++m) {
        const Matrix& src =
            (negative && m == slot) ? z_batch[donor] : z_batch[i];
        for (std::size_t r = 0; r < d; ++r) tuple[m * d + r] = src(r, m);
      }
      const double label = negative ? 0.0 : 1.0;
      const HeadCache cache = head_forward(head, tuple);
      result.loss.value += bce_from_logit(cache.logit, label) / denom;

      const double grad_logit = (cache.prob - label) / denom;
      const std::vector<double> grad_tuple =
          head_backward_accumulate(head, cache, grad_logit, result.head_grads);
      for (std::size_t m = 0; m < k; ++m) {
        Matrix& dst = (negative && m == slot) ? result.loss.grad_z[donor]
                                              : result.loss.grad_z[i];
        for (std::size_t r = 0; r < d; ++r) dst(r, m) += grad_tuple[m * d + r];
      }
    }
  }
  return result;
}

CombinedResult combined_loss(const std::vector<Matrix>& z_batch,
                             const MatchingHead& head, const LossConfig& cfg,
                             std::uint64_t seed) {
  CombinedResult result;
  LossOutput singular = pmrl_singular_loss(z_batch, cfg.tau1);
  result.singular_term = singular.value;
  result.loss.value = singular.value;
  result.loss.grad_z = std::move(singular.grad_z);
  result.head_grads = zero_grads(head);

  if (cfg.lambda1 != 0.0) {
    const LossOutput reg = leading_direction_reg(z_batch, cfg.tau2);
    result.regularizer_term = reg.value;
    result.loss.value += cfg.lambda1 * reg.value;
    for (std::size_t i = 0; i < z_batch.size(); ++i) {
      result.loss.grad_z[i] += cfg.lambda1 * reg.grad_z[i];
    }
  }
  if (cfg.lambda2 != 0.0) {
    InstanceMatchingResult im = instance_matching_loss(z_batch, head, seed);
    result.matching_term = im.loss.value;
    result.loss.value += cfg.lambda2 * im.loss.value;
    for (std::size_t i = 0; i < z_batch.size(); ++i) {
      result.loss.grad_z[i] += cfg.lambda2 * im.loss.grad_z[i];
    }
    im.head_grads.l1.w *= cfg.lambda2;
    im.head_grads.l2.w *= cfg.lambda2;
    for (double& b : im.head_grads.l1.b) b *= cfg.lambda2;
    for (double& b : im.head_grads.l2.b) b *= cfg.lambda2;
    result.head_grads = std::move(im.head_grads);
  }
  return result;
}

PairwiseLossOutput pairwise_infonce(const std::vector<std::vector<double>>& z_m1,
                                    const std::vector<std::vector<double>>& z_m2,
                                    double tau) {
  if (z_m1.empty()) throw Error(ErrorCode::EmptyBatch, "empty batch");
  if (z_m1.size() != z_m2.size()) {
    throw Error(ErrorCode::LengthMismatch, "modality lists differ in length");
  }
  if (z_m1.size() < 2) {
    throw Error(ErrorCode::BatchTooSmall, "pairwise InfoNCE needs N >= 2");
  }
  const std::size_t n = z_m1.size();
  const std::size_t d = z_m1.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (z_m1[i].size() != d || z_m2[i].size() != d) {
      throw Error(ErrorCode::LengthMismatch, "vector dimensions differ");
    }
  }

  Matrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sim(i, j) = dot(z_m1[i], z_m2[j]);
  }

  PairwiseLossOutput out;
  out.grad_m1.assign(n, std::vector<double>(d, 0.0));
  out.grad_m2.assign(n, std::vector<double>(d, 0.0));
  const double scale = 1.0 / (static_cast<double>(n) * tau);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) logits[j] = sim(i, j) / tau;
    const double lse = log_sum_exp(logits);
    out.value += (lse - logits[i]) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double coef = scale * (std::exp(logits[j] - lse) - (i == j ? 1.0 : 0.0));
      for (std::size_t r = 0; r < d; ++r) {
        out.grad_m1[i][r] += coef * z_m2[j][r];
        out.grad_m2[j][r] += coef * z_m1[i][r];
      }
    }
  }
  return out;
}

double gram_volume(const Matrix& z) {
  const SvdResult svd = svd_thin(z);
  double vol = 1.0;
  for (double s : svd.sigma) vol *= s;
  return vol;
}

LossOutput volume_only_loss(const std::vector<Matrix>& z_batch) {
  check_nonempty(z_batch);
  const double n = static_cast<double>(z_batch.size());
  LossOutput out;
  out.grad_z.reserve(z_batch.size());
  for (const auto& z : z_batch) {
    const SvdResult svd = svd_thin(z);
    double vol = 1.0;
    for (double s : svd.sigma) vol *= s;
    out.value += vol / n;

    std::vector<double> grad_sigma = volume_partials(svd.sigma);
    for (double& g : grad_sigma) g /= n;
    out.grad_z.push_back(svd_backward(svd, Matrix(z.rows(), z.cols()), grad_sigma,
                                      Matrix(z.cols(), z.cols())));
  }
  return out;
}

LossOutput volume_contrastive_loss(const std::vector<Matrix>& z_batch,
                                   std::size_t anchor_slot, double tau) {
  check_nonempty(z_batch);
  if (z_batch.size() < 2) {
    throw Error(ErrorCode::BatchTooSmall, "volume contrast needs N >= 2");
  }
  check_common_shape(z_batch);
  const std::size_t n = z_batch.size();
  const std::size_t d = z_batch.front().rows();
  const std::size_t k = z_batch.front().cols();
  if (anchor_slot >= k) {
    throw Error(ErrorCode::BadAnchor,
                "anchor slot " + std::to_string(anchor_slot) + " >= k");
  }

  LossOutput out;
  out.grad_z.assign(n, Matrix(d, k));
  std::vector<SvdResult> row_svd(n);
  std::vector<double> logits(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Matrix swapped = z_batch[i];
      swapped.set_column(anchor_slot, z_batch[j].column(anchor_slot));
      row_svd[j] = svd_thin(swapped);
      double vol = 1.0;
      for (double s : row_svd[j].sigma) vol *= s;
      logits[j] = -vol / tau;
    }
    const double lse = log_sum_exp(logits);
    out.value += (lse - logits[i]) * inv_n;

    for (std::size_t j = 0; j < n; ++j) {
      const double q = std::exp(logits[j] - lse);
      const double coef = ((i == j ? 1.0 : 0.0) - q) * inv_n / tau;  // dL/dVol_ij
      std::vector<double> grad_sigma = volume_partials(row_svd[j].sigma);
      for (double& g : grad_sigma) g *= coef;
      const Matrix grad_m =
          svd_backward(row_svd[j], Matrix(d, k), grad_sigma, Matrix(k, k));
      for (std::size_t c = 0; c < k; ++c) {
        Matrix& dst = c == anchor_slot ? out.grad_z[j] : out.grad_z[i];
        for (std::size_t r = 0; r < d; ++r) dst(r, c) += grad_m(r, c);
      }
    }
  }
  return out;
}

}  // namespace pmrl
