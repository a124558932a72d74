#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmrl/matrix.hpp"
#include "pmrl/rng.hpp"

namespace pmrl {

struct AffineLayer {
  Matrix w;               // out x in
  std::vector<double> b;  // out
};

// Feed-forward encoder: affine layers with tanh between them, linear output.
// The output feeds a unit-normalization before entering any loss, so the
// backward pass applies the normalization Jacobian (I - zz^T)/||z_pre||.
struct MlpEncoder {
  std::vector<AffineLayer> layers;

  std::size_t input_dim() const { return layers.front().w.cols(); }
  std::size_t output_dim() const { return layers.back().w.rows(); }
};

// Scaled-uniform fan-in initialization: w ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// biases zero. Draw order is layer by layer, row-major.
MlpEncoder make_encoder(std::size_t input_dim, std::size_t hidden_dim,
                        std::size_t output_dim, Rng& rng);

struct EncoderCache {
  std::vector<double> input;
  std::vector<std::vector<double>> hidden;  // post-tanh activations per hidden layer
  std::vector<double> z_pre;                // output before normalization
};

// Returns the pre-normalization output and the activation cache.
std::pair<std::vector<double>, EncoderCache> encoder_forward(
    const MlpEncoder& enc, std::span<const double> x);

struct EncoderGrads {
  std::vector<AffineLayer> layers;  // same shapes as the encoder
};
EncoderGrads zero_grads(const MlpEncoder& enc);

struct EncoderBackwardResult {
  EncoderGrads grads;
  std::vector<double> grad_x;
};

// grad_z is the gradient w.r.t. the unit-normalized output; the
// normalization Jacobian is applied first, then the layer chain.
// Throws StaleCache when cache shapes disagree with the encoder.
EncoderBackwardResult encoder_backward(const MlpEncoder& enc,
                                       const EncoderCache& cache,
                                       std::span<const double> grad_z);

// Binary match predictor: (k*d -> hidden) tanh (hidden -> 1) sigmoid.
struct MatchingHead {
  AffineLayer l1;
  AffineLayer l2;

  std::size_t input_dim() const { return l1.w.cols(); }
};
MatchingHead make_matching_head(std::size_t input_dim, std::size_t hidden_dim,
                                Rng& rng);

struct HeadCache {
  std::vector<double> input;
  std::vector<double> hidden;  // post-tanh
  double logit = 0.0;
  double prob = 0.0;
};
HeadCache head_forward(const MatchingHead& head, std::span<const double> x);

struct MatchingHeadGrads {
  AffineLayer l1;
  AffineLayer l2;
};
MatchingHeadGrads zero_grads(const MatchingHead& head);

// Accumulates parameter gradients into `acc` and returns grad wrt the input
// tuple. grad_logit is dLoss/dlogit for this tuple.
std::vector<double> head_backward_accumulate(const MatchingHead& head,
                                             const HeadCache& cache,
                                             double grad_logit,
                                             MatchingHeadGrads& acc);

// AdamW with global-norm gradient clipping and linear warmup, constant
// learning rate afterward.
struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 2.0;
  double warmup_fraction = 0.1;
  std::uint64_t total_steps = 2000;
};

struct AdamWState {
  AdamWConfig cfg;
  std::uint64_t step = 0;       // completed steps
  std::vector<double> m, v;     // flat first/second moments
};

AdamWState make_adamw(const AdamWConfig& cfg, std::size_t param_count);

// Learning rate that would apply at the state's current step: 0 at step 0,
// exactly cfg.lr at the end of warmup.
double adamw_effective_lr(const AdamWState& state);

// One update over a list of parameter views and matching gradient views.
// Gradients are clipped jointly to cfg.clip_norm before the moment update;
// the caller's gradient buffers are not modified.
void adamw_step(AdamWState& state, std::span<double* const> params,
                std::span<const double* const> grads,
                std::span<const std::size_t> sizes);

// Versioned checkpoint: JSON document with magic "PMRL1", the run seed, and
// every parameter array with its shape.
struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

void save_checkpoint(const std::string& path, std::uint64_t seed,
                     const std::vector<NamedArray>& arrays);

struct Checkpoint {
  std::uint64_t seed = 0;
  std::vector<NamedArray> arrays;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pmrl
