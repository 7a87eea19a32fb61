#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "hmfmd/data.hpp"

namespace hmfmd {

/// Synthetic multimodal corpus. Positive samples carry, in every modality,
/// that modality's fixed random unit direction scaled by its signal strength,
/// added to a random contiguous run of timesteps. Patterns are drawn
/// independently per modality.
struct SynthConfig {
  std::size_t n_train = 600;
  std::size_t n_dev = 200;
  std::size_t n_test = 200;
  std::array<std::size_t, 3> modality_dims = {12, 16, 20};
  std::size_t L_target = 12;
  std::array<double, 3> signal = {2.0, 2.0, 2.0};
  double noise_scale = 1.0;
  double positive_rate = 0.5;
  std::size_t window_min = 2;  // pattern run length bounds, inclusive
  std::size_t window_max = 3;
  std::uint64_t seed = 7;

  /// Throws InvalidInput on out-of-range fields.
  void validate() const;
};

Dataset generate_synthetic(const SynthConfig& cfg);

}  // namespace hmfmd
