#include "hmfmd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hmfmd/errors.hpp"

namespace hmfmd {

void SynthConfig::validate() const {
  if (!(positive_rate > 0.0 && positive_rate < 1.0)) {
    throw InvalidInput("synth: positive_rate must lie in (0, 1)");
  }
  for (std::size_t d : modality_dims) {
    if (d == 0) throw InvalidInput("synth: modality dims must be >= 1");
  }
  if (L_target == 0) throw InvalidInput("synth: L_target must be >= 1");
  if (window_min == 0 || window_min > window_max || window_max > L_target) {
    throw InvalidInput("synth: need 1 <= window_min <= window_max <= L_target");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw InvalidInput("synth: noise_scale must be finite and >= 0");
  }
  for (double s : signal) {
    if (!std::isfinite(s)) throw InvalidInput("synth: signal strengths must be finite");
  }
  if (n_train + n_dev + n_test == 0) throw InvalidInput("synth: no samples requested");
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const RngStream root(cfg.seed);

  std::array<std::vector<double>, 3> directions;
  for (Modality m : kModalities) {
    RngStream rng = root.derive("pattern", index_of(m));
    auto& dir = directions[index_of(m)];
    dir.resize(cfg.modality_dims[index_of(m)]);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : dir) v /= norm;
  }

  Dataset ds;
  ds.modality_dims = cfg.modality_dims;
  ds.L_target = cfg.L_target;
  const std::array<std::size_t, 3> counts = {cfg.n_train, cfg.n_dev, cfg.n_test};
  for (Partition part : kPartitions) {
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(part)]; ++i) {
      RngStream rng = root.derive(partition_name(part), i);
      Sample s;
      char id[32];
      std::snprintf(id, sizeof id, "%s_%05zu", std::string(partition_name(part)).c_str(), i);
      s.id = id;
      s.partition = part;
      s.label = rng.bernoulli(cfg.positive_rate) ? 1 : 0;
      for (Modality m : kModalities) {
        const std::size_t d = cfg.modality_dims[index_of(m)];
        Matrix x(cfg.L_target, d);
        for (double& v : x.values()) v = cfg.noise_scale * rng.normal();
        const std::size_t span =
            cfg.window_min + rng.uniform_index(cfg.window_max - cfg.window_min + 1);
        const std::size_t start = rng.uniform_index(cfg.L_target - span + 1);
        if (s.label == 1) {
          const double strength = cfg.signal[index_of(m)];
          const auto& dir = directions[index_of(m)];
          for (std::size_t r = start; r < start + span; ++r) {
            for (std::size_t c = 0; c < d; ++c) x(r, c) += strength * dir[c];
          }
        }
        s.sequences[index_of(m)] = {m, std::move(x), "synthetic"};
      }
      ds.samples.push_back(std::move(s));
    }
  }
  std::sort(ds.samples.begin(), ds.samples.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  ds.validate();
  return ds;
}

}  // namespace hmfmd
