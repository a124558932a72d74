#include "pmrl/synth.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pmrl/rng.hpp"

namespace pmrl {

namespace {

void validate(const SyntheticConfig& cfg) {
  if (cfg.k < 2 || cfg.k > 8) {
    throw Error(ErrorCode::BadConfig, "modality count k must be in [2, 8]");
  }
  if (cfg.latent_dim < 1) {
    throw Error(ErrorCode::BadConfig, "latent_dim must be >= 1");
  }
  if (cfg.obs_dims.size() != cfg.k) {
    throw Error(ErrorCode::BadConfig, "obs_dims length must equal k");
  }
  for (std::size_t d : cfg.obs_dims) {
    if (d == 0) throw Error(ErrorCode::BadConfig, "zero observation dimension");
  }
  if (cfg.n_instances == 0) {
    throw Error(ErrorCode::BadConfig, "n_instances must be positive");
  }
  if (cfg.n_test >= cfg.n_instances) {
    throw Error(ErrorCode::BadConfig, "n_test must be below n_instances");
  }
  if (cfg.noise_scale < 0.0) {
    throw Error(ErrorCode::BadConfig, "noise_scale must be nonnegative");
  }
  if (cfg.label_flip_prob < 0.0 || cfg.label_flip_prob > 1.0) {
    throw Error(ErrorCode::BadConfig, "label_flip_prob must be in [0, 1]");
  }
}

}  // namespace

std::vector<std::size_t> SyntheticDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == split) out.push_back(i);
  }
  return out;
}

SyntheticDataset generate(const SyntheticConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);

  SyntheticDataset ds;
  ds.config = cfg;

  // Label halfspace direction, then the per-modality maps, drawn once.
  std::vector<double> label_dir(cfg.latent_dim);
  for (auto& x : label_dir) x = rng.normal();

  const double map_scale = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  for (std::size_t m = 0; m < cfg.k; ++m) {
    Matrix a(cfg.obs_dims[m], cfg.latent_dim);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = rng.normal() * map_scale;
    }
    ds.modality_maps.push_back(std::move(a));
    std::vector<double> b(cfg.obs_dims[m]);
    for (auto& x : b) x = 0.1 * rng.normal();
    ds.modality_offsets.push_back(std::move(b));
  }

  const std::size_t n_train = cfg.n_instances - cfg.n_test;
  for (std::size_t i = 0; i < cfg.n_instances; ++i) {
    std::vector<double> latent(cfg.latent_dim);
    for (auto& x : latent) x = rng.normal();

    std::vector<std::vector<double>> obs(cfg.k);
    for (std::size_t m = 0; m < cfg.k; ++m) {
      const Matrix& a = ds.modality_maps[m];
      std::vector<double> x = ds.modality_offsets[m];
      for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) x[r] += a(r, c) * latent[c];
      }
      if (cfg.noise_scale > 0.0) {
        for (double& v : x) v += cfg.noise_scale * rng.normal();
      }
      obs[m] = std::move(x);
    }

    ds.labels.push_back(dot(label_dir, latent) > 0.0 ? 1 : 0);
    ds.splits.push_back(i < n_train ? Split::Train : Split::Test);
    ds.latents.push_back(std::move(latent));
    ds.observations.push_back(std::move(obs));
  }

  if (cfg.label_flip_prob > 0.0) {
    return flip_labels(ds, cfg.label_flip_prob, Rng::derive(cfg.seed, 0x666c6970),
                       cfg.flip_train_only);
  }
  return ds;
}

SyntheticDataset add_input_noise(const SyntheticDataset& ds, double scale,
                                 std::uint64_t seed) {
  if (scale < 0.0) throw Error(ErrorCode::BadConfig, "noise scale must be >= 0");
  SyntheticDataset out = ds;
  Rng rng(seed);
  for (auto& instance : out.observations) {
    for (auto& obs : instance) {
      const double nrm = norm(obs);
      if (nrm > 1e-12) {
        for (double& v : obs) v /= nrm;
      }
      if (scale > 0.0) {
        for (double& v : obs) v += scale * rng.normal();
      }
    }
  }
  return out;
}

SyntheticDataset flip_labels(const SyntheticDataset& ds, double prob,
                             std::uint64_t seed, bool train_only) {
  if (prob < 0.0 || prob > 1.0) {
    throw Error(ErrorCode::BadConfig, "flip probability must be in [0, 1]");
  }
  SyntheticDataset out = ds;
  Rng rng(seed);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const bool flip = rng.uniform() < prob;
    if (flip && (!train_only || out.splits[i] == Split::Train)) {
      out.labels[i] = 1 - out.labels[i];
    }
  }
  return out;
}

void save_jsonl(const SyntheticDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path);

  nlohmann::ordered_json header;
  header["config"] = {{"n_instances", ds.config.n_instances},
                      {"n_test", ds.config.n_test},
                      {"k", ds.config.k},
                      {"latent_dim", ds.config.latent_dim},
                      {"obs_dims", ds.config.obs_dims},
                      {"noise_scale", ds.config.noise_scale},
                      {"label_flip_prob", ds.config.label_flip_prob},
                      {"flip_train_only", ds.config.flip_train_only},
                      {"seed", ds.config.seed}};
  out << header.dump() << "\n";

  for (std::size_t i = 0; i < ds.size(); ++i) {
    nlohmann::ordered_json rec;
    rec["id"] = i;
    rec["split"] = ds.splits[i] == Split::Train ? "train" : "test";
    rec["label"] = ds.labels[i];
    for (std::size_t m = 0; m < ds.config.k; ++m) {
      rec["mod_" + std::to_string(m)] = ds.observations[i][m];
    }
    out << rec.dump() << "\n";
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

SyntheticDataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);

  SyntheticDataset ds;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::IoFailure, "missing header line in " + path);
  }
  try {
    const auto header = nlohmann::json::parse(line);
    const auto& c = header.at("config");
    ds.config.n_instances = c.at("n_instances").get<std::size_t>();
    ds.config.n_test = c.at("n_test").get<std::size_t>();
    ds.config.k = c.at("k").get<std::size_t>();
    ds.config.latent_dim = c.at("latent_dim").get<std::size_t>();
    ds.config.obs_dims = c.at("obs_dims").get<std::vector<std::size_t>>();
    ds.config.noise_scale = c.at("noise_scale").get<double>();
    ds.config.label_flip_prob = c.at("label_flip_prob").get<double>();
    ds.config.flip_train_only = c.at("flip_train_only").get<bool>();
    ds.config.seed = c.at("seed").get<std::uint64_t>();

    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      ds.splits.push_back(rec.at("split").get<std::string>() == "train"
                              ? Split::Train
                              : Split::Test);
      ds.labels.push_back(rec.at("label").get<int>());
      std::vector<std::vector<double>> obs;
      for (std::size_t m = 0; m < ds.config.k; ++m) {
        obs.push_back(
            rec.at("mod_" + std::to_string(m)).get<std::vector<double>>());
      }
      ds.observations.push_back(std::move(obs));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoFailure, std::string("parse: ") + e.what());
  }
  return ds;
}

}  // namespace pmrl
