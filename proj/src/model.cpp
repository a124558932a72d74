#include "pmrl/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pmrl/errors.hpp"

namespace pmrl {

namespace {

AffineLayer init_affine(std::size_t out, std::size_t in, Rng& rng) {
  AffineLayer layer;
  layer.w = Matrix(out, in);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (std::size_t r = 0; r < out; ++r) {
    for (std::size_t c = 0; c < in; ++c) {
      layer.w(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
    }
  }
  layer.b.assign(out, 0.0);
  return layer;
}

std::vector<double> affine_apply(const AffineLayer& layer,
                                 std::span<const double> x) {
  if (x.size() != layer.w.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "affine input length " + std::to_string(x.size()) + " != " +
                    std::to_string(layer.w.cols()));
  }
  std::vector<double> out(layer.b);
  for (std::size_t r = 0; r < layer.w.rows(); ++r) {
    double sum = out[r];
    for (std::size_t c = 0; c < layer.w.cols(); ++c) sum += layer.w(r, c) * x[c];
    out[r] = sum;
  }
  return out;
}

// Accumulates dL/dW and dL/db for one affine layer and returns dL/dx.
std::vector<double> affine_backward(const AffineLayer& layer,
                                    std::span<const double> x,
                                    std::span<const double> grad_out,
                                    AffineLayer& grad_acc) {
  for (std::size_t r = 0; r < layer.w.rows(); ++r) {
    grad_acc.b[r] += grad_out[r];
    for (std::size_t c = 0; c < layer.w.cols(); ++c) {
      grad_acc.w(r, c) += grad_out[r] * x[c];
    }
  }
  std::vector<double> grad_x(layer.w.cols(), 0.0);
  for (std::size_t r = 0; r < layer.w.rows(); ++r) {
    for (std::size_t c = 0; c < layer.w.cols(); ++c) {
      grad_x[c] += layer.w(r, c) * grad_out[r];
    }
  }
  return grad_x;
}

}  // namespace

MlpEncoder make_encoder(std::size_t input_dim, std::size_t hidden_dim,
                        std::size_t output_dim, Rng& rng) {
  MlpEncoder enc;
  enc.layers.push_back(init_affine(hidden_dim, input_dim, rng));
  enc.layers.push_back(init_affine(output_dim, hidden_dim, rng));
  return enc;
}

std::pair<std::vector<double>, EncoderCache> encoder_forward(
    const MlpEncoder& enc, std::span<const double> x) {
  EncoderCache cache;
  cache.input.assign(x.begin(), x.end());
  std::vector<double> act(x.begin(), x.end());
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    act = affine_apply(enc.layers[l], act);
    if (l + 1 < enc.layers.size()) {
      for (double& v : act) v = std::tanh(v);
      cache.hidden.push_back(act);
    }
  }
  cache.z_pre = act;
  return {act, std::move(cache)};
}

EncoderGrads zero_grads(const MlpEncoder& enc) {
  EncoderGrads grads;
  for (const auto& layer : enc.layers) {
    grads.layers.push_back({Matrix(layer.w.rows(), layer.w.cols()),
                            std::vector<double>(layer.b.size(), 0.0)});
  }
  return grads;
}

EncoderBackwardResult encoder_backward(const MlpEncoder& enc,
                                       const EncoderCache& cache,
                                       std::span<const double> grad_z) {
  if (cache.input.size() != enc.input_dim() ||
      cache.z_pre.size() != enc.output_dim() ||
      cache.hidden.size() + 1 != enc.layers.size() ||
      grad_z.size() != enc.output_dim()) {
    throw Error(ErrorCode::StaleCache, "cache shapes disagree with the encoder");
  }

  // Normalization Jacobian: d(z/||z||)/dz = (I - zhat zhat^T) / ||z_pre||.
  const double z_norm = norm(cache.z_pre);
  if (z_norm < 1e-12) {
    throw Error(ErrorCode::ZeroColumn, "encoder output has near-zero norm");
  }
  std::vector<double> zhat(cache.z_pre);
  for (double& v : zhat) v /= z_norm;
  const double proj = dot(zhat, grad_z);
  std::vector<double> grad(grad_z.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] = (grad_z[i] - proj * zhat[i]) / z_norm;
  }

  EncoderBackwardResult result{zero_grads(enc), {}};
  for (std::size_t l = enc.layers.size(); l-- > 0;) {
    const std::span<const double> layer_in =
        l == 0 ? std::span<const double>(cache.input)
               : std::span<const double>(cache.hidden[l - 1]);
    if (l + 1 < enc.layers.size()) {
      // grad is wrt the tanh output; fold in tanh'(x) = 1 - tanh^2(x).
      const auto& h = cache.hidden[l];
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - h[i] * h[i];
    }
    grad = affine_backward(enc.layers[l], layer_in, grad, result.grads.layers[l]);
  }
  result.grad_x = std::move(grad);
  return result;
}

MatchingHead make_matching_head(std::size_t input_dim, std::size_t hidden_dim,
                                Rng& rng) {
  MatchingHead head;
  head.l1 = init_affine(hidden_dim, input_dim, rng);
  head.l2 = init_affine(1, hidden_dim, rng);
  return head;
}

HeadCache head_forward(const MatchingHead& head, std::span<const double> x) {
  HeadCache cache;
  cache.input.assign(x.begin(), x.end());
  cache.hidden = affine_apply(head.l1, x);
  for (double& v : cache.hidden) v = std::tanh(v);
  cache.logit = affine_apply(head.l2, cache.hidden)[0];
  cache.prob = 1.0 / (1.0 + std::exp(-cache.logit));
  return cache;
}

MatchingHeadGrads zero_grads(const MatchingHead& head) {
  return MatchingHeadGrads{
      {Matrix(head.l1.w.rows(), head.l1.w.cols()),
       std::vector<double>(head.l1.b.size(), 0.0)},
      {Matrix(head.l2.w.rows(), head.l2.w.cols()),
       std::vector<double>(head.l2.b.size(), 0.0)}};
}

std::vector<double> head_backward_accumulate(const MatchingHead& head,
                                             const HeadCache& cache,
                                             double grad_logit,
                                             MatchingHeadGrads& acc) {
  if (cache.input.size() != head.input_dim() ||
      cache.hidden.size() != head.l1.w.rows()) {
    throw Error(ErrorCode::StaleCache, "head cache shapes disagree");
  }
  const std::vector<double> grad_out{grad_logit};
  std::vector<double> grad_h =
      affine_backward(head.l2, cache.hidden, grad_out, acc.l2);
  for (std::size_t i = 0; i < grad_h.size(); ++i) {
    grad_h[i] *= 1.0 - cache.hidden[i] * cache.hidden[i];
  }
  return affine_backward(head.l1, cache.input, grad_h, acc.l1);
}

AdamWState make_adamw(const AdamWConfig& cfg, std::size_t param_count) {
  AdamWState state;
  state.cfg = cfg;
  state.m.assign(param_count, 0.0);
  state.v.assign(param_count, 0.0);
  return state;
}

double adamw_effective_lr(const AdamWState& state) {
  const auto warmup_steps = static_cast<std::uint64_t>(
      state.cfg.warmup_fraction * static_cast<double>(state.cfg.total_steps));
  if (warmup_steps == 0 || state.step >= warmup_steps) return state.cfg.lr;
  return state.cfg.lr * static_cast<double>(state.step) /
         static_cast<double>(warmup_steps);
}

void adamw_step(AdamWState& state, std::span<double* const> params,
                std::span<const double* const> grads,
                std::span<const std::size_t> sizes) {
  if (params.size() != grads.size() || params.size() != sizes.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adamw_step: list lengths differ");
  }
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total != state.m.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "adamw_step: " + std::to_string(total) + " params vs state " +
                    std::to_string(state.m.size()));
  }

  double grad_sq = 0.0;
  for (std::size_t a = 0; a < grads.size(); ++a) {
    for (std::size_t i = 0; i < sizes[a]; ++i) grad_sq += grads[a][i] * grads[a][i];
  }
  const double grad_norm = std::sqrt(grad_sq);
  const double clip_scale =
      grad_norm > state.cfg.clip_norm ? state.cfg.clip_norm / grad_norm : 1.0;

  const double lr = adamw_effective_lr(state);
  const double t = static_cast<double>(state.step + 1);
  const double bias1 = 1.0 - std::pow(state.cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(state.cfg.beta2, t);

  std::size_t offset = 0;
  for (std::size_t a = 0; a < params.size(); ++a) {
    for (std::size_t i = 0; i < sizes[a]; ++i) {
      const double g = grads[a][i] * clip_scale;
      double& m = state.m[offset + i];
      double& v = state.v[offset + i];
      m = state.cfg.beta1 * m + (1.0 - state.cfg.beta1) * g;
      v = state.cfg.beta2 * v + (1.0 - state.cfg.beta2) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      double& p = params[a][i];
      p -= lr * (m_hat / (std::sqrt(v_hat) + state.cfg.eps) +
                 state.cfg.weight_decay * p);
    }
    offset += sizes[a];
  }
  ++state.step;
}

void save_checkpoint(const std::string& path, std::uint64_t seed,
                     const std::vector<NamedArray>& arrays) {
  nlohmann::ordered_json doc;
  doc["magic"] = "PMRL1";
  doc["seed"] = seed;
  auto& list = doc["arrays"] = nlohmann::ordered_json::array();
  for (const auto& arr : arrays) {
    nlohmann::ordered_json item;
    item["name"] = arr.name;
    item["shape"] = arr.shape;
    item["data"] = arr.data;
    list.push_back(std::move(item));
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoFailure, std::string("parse: ") + e.what());
  }
  if (doc.value("magic", "") != "PMRL1") {
    throw Error(ErrorCode::IoFailure, "missing PMRL1 magic in " + path);
  }
  Checkpoint ckpt;
  ckpt.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& item : doc.at("arrays")) {
    NamedArray arr;
    arr.name = item.at("name").get<std::string>();
    arr.shape = item.at("shape").get<std::vector<std::size_t>>();
    arr.data = item.at("data").get<std::vector<double>>();
    std::size_t expect = 1;
    for (std::size_t s : arr.shape) expect *= s;
    if (expect != arr.data.size()) {
      throw Error(ErrorCode::IoFailure, "shape/data mismatch for " + arr.name);
    }
    ckpt.arrays.push_back(std::move(arr));
  }
  return ckpt;
}

}  // namespace pmrl
