#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "hmfmd/synth.hpp"
#include "hmfmd/training.hpp"

namespace hmfmd {

/// Contents of a run configuration file: {"train": {...}, "synth": {...}}.
/// Both sections are optional; absent keys keep their defaults and unknown
/// keys are rejected.
struct RunConfig {
  TrainConfig train;
  SynthConfig synth;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const nlohmann::json& doc);

nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const SynthConfig& cfg);
nlohmann::json to_json(const ArchConfig& arch);
/// Overwrites fields present in `j`.
void apply_json(const nlohmann::json& j, TrainConfig& cfg);
void apply_json(const nlohmann::json& j, SynthConfig& cfg);
void apply_json(const nlohmann::json& j, ArchConfig& arch);

std::string_view loss_weight_mode_name(LossWeightMode m);
LossWeightMode parse_loss_weight_mode(std::string_view s);

}  // namespace hmfmd
