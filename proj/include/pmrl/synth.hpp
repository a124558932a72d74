#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmrl/matrix.hpp"

namespace pmrl {

struct SyntheticConfig {
  std::size_t n_instances = 320;
  std::size_t n_test = 64;  // trailing instances form the test split
  std::size_t k = 4;
  std::size_t latent_dim = 8;
  std::vector<std::size_t> obs_dims = {24, 30, 36, 40};
  double noise_scale = 0.0;
  double label_flip_prob = 0.0;
  bool flip_train_only = true;  // scope of label_flip_prob inside generate()
  std::uint64_t seed = 1;
};

enum class Split { Train, Test };

// Shared-latent linear generative model: x_i^m = A_m c_i + b_m + noise.
// With zero noise every modality is an exact linear image of a common
// latent, so full alignment is attainable.
struct SyntheticDataset {
  SyntheticConfig config;
  // [instance][modality][dim]
  std::vector<std::vector<std::vector<double>>> observations;
  std::vector<int> labels;
  std::vector<Split> splits;
  // Retained for diagnostics; empty after load_jsonl.
  std::vector<std::vector<double>> latents;
  std::vector<Matrix> modality_maps;             // A_m (obs_dims[m] x p)
  std::vector<std::vector<double>> modality_offsets;  // b_m

  std::size_t size() const { return observations.size(); }
  std::vector<std::size_t> indices(Split split) const;
};

SyntheticDataset generate(const SyntheticConfig& cfg);

// Robustness protocol: unit-normalize each observation, then add
// scale * eta with fresh seeded Gaussian eta. The input dataset is left
// unmodified.
SyntheticDataset add_input_noise(const SyntheticDataset& ds, double scale,
                                 std::uint64_t seed);

// Flip each label independently with the given probability. One uniform is
// drawn per instance regardless of train_only, so the stream is stable
// across that flag.
SyntheticDataset flip_labels(const SyntheticDataset& ds, double prob,
                             std::uint64_t seed, bool train_only = false);

// JSON-lines dump: a header line carrying the config, then one record per
// instance with fields id, split, label, mod_0..mod_{k-1}.
void save_jsonl(const SyntheticDataset& ds, const std::string& path);
SyntheticDataset load_jsonl(const std::string& path);

}  // namespace pmrl
