#pragma once

#include <cstdint>
#include <vector>

#include "pmrl/linalg.hpp"
#include "pmrl/matrix.hpp"
#include "pmrl/model.hpp"

namespace pmrl {

struct LossOutput {
  double value = 0.0;
  std::vector<Matrix> grad_z;  // one d x k gradient matrix per instance
};

struct LossConfig {
  double tau1 = 0.05;    // temperature over singular values
  double tau2 = 0.1;     // temperature over leading-direction similarities
  double lambda1 = 1.0;  // weight of the leading-direction regularizer
  double lambda2 = 0.1;  // weight of the instance matching loss
};

// Softmax cross-entropy over the singular-value spectrum with sigma_1 as
// the target class:
//   L = -(1/N) sum_i log( exp(sigma_1/tau1) / sum_j exp(sigma_j/tau1) )
// Analytic gradient per instance: (1/(N tau1)) [ (p_1 - 1) u_1 v_1^T
//   + sum_{j>=2} p_j u_j v_j^T ].
LossOutput pmrl_singular_loss(const std::vector<Matrix>& z_batch, double tau1);

// Instance-wise contrastive regularizer over sign-canonicalized leading
// directions:
//   L = -(1/N) sum_i log( exp(u1_i . u1_i / tau2) / sum_j exp(u1_i . u1_j / tau2) )
// The per-instance gradient w.r.t. u1 is projected onto the tangent space
// (I - u1 u1^T) and propagated to Z through svd_backward.
LossOutput leading_direction_reg(const std::vector<Matrix>& z_batch, double tau2);

struct InstanceMatchingResult {
  LossOutput loss;
  MatchingHeadGrads head_grads;
  std::vector<std::size_t> negative_slot;   // replaced modality per instance
  std::vector<std::size_t> negative_donor;  // donor instance per instance
};

// Binary cross-entropy over matched/mismatched modality tuples. Each
// instance contributes its own tuple (label 1) and one hard negative
// (label 0) where a seeded-random slot m* is replaced by the most
// cosine-similar slot-m* representation from another instance.
InstanceMatchingResult instance_matching_loss(const std::vector<Matrix>& z_batch,
                                              const MatchingHead& head,
                                              std::uint64_t seed);

struct CombinedResult {
  LossOutput loss;
  MatchingHeadGrads head_grads;  // zero when lambda2 == 0
  double singular_term = 0.0;
  double regularizer_term = 0.0;
  double matching_term = 0.0;
};

// L = L_singular + lambda1 * L_reg + lambda2 * L_match. Components with a
// zero weight are skipped entirely.
CombinedResult combined_loss(const std::vector<Matrix>& z_batch,
                             const MatchingHead& head, const LossConfig& cfg,
                             std::uint64_t seed);

struct PairwiseLossOutput {
  double value = 0.0;
  std::vector<std::vector<double>> grad_m1;
  std::vector<std::vector<double>> grad_m2;
};

// Pairwise InfoNCE between two modality lists:
//   L = -(1/N) sum_i log( exp(a_i . b_i / tau) / sum_j exp(a_i . b_j / tau) )
PairwiseLossOutput pairwise_infonce(const std::vector<std::vector<double>>& z_m1,
                                    const std::vector<std::vector<double>>& z_m2,
                                    double tau);

// Vol(G) = sqrt(det Z^T Z) = prod_j sigma_j.
double gram_volume(const Matrix& z);

// L = (1/N) sum_i Vol(Z_i). Gradient via the sigma-product rule through
// svd_backward; exactly zero for an instance once two singular values fall
// below kNullThreshold (the collapse stall).
LossOutput volume_only_loss(const std::vector<Matrix>& z_batch);

// Anchored volume contrast: negatives replace the anchor column of Z_i
// with instance j's anchor column,
//   L = -(1/N) sum_i log( exp(-Vol(Z_i)/tau) / sum_j exp(-Vol(Z_i[anchor<-j])/tau) ).
LossOutput volume_contrastive_loss(const std::vector<Matrix>& z_batch,
                                   std::size_t anchor_slot, double tau);

// Stable log(sum_j exp(x_j)).
double log_sum_exp(std::span<const double> x);

}  // namespace pmrl
