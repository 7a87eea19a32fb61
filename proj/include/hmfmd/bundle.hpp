#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmfmd/model.hpp"
#include "hmfmd/training.hpp"

namespace hmfmd {

inline constexpr int kBundleFormatVersion = 1;

enum class ModelKind { discriminant, baseline, fusion };

std::string_view model_kind_name(ModelKind k);

/// A trained model plus everything needed to re-run or evaluate it.
///
/// Directory layout:
///   manifest.json           architecture, variant tags, seed, dims
///   params.txt              parameter document
///   report.json             TrainReport
///   predictions.csv         sample_id,score for every sample
///   stage1_<M>.csv          (fusion with Y only) frozen Stage-1 scores per modality
struct ModelBundle {
  ModelKind kind = ModelKind::discriminant;
  std::optional<Modality> modality;          // Stage-1 bundles
  std::vector<Channel> channels;             // fusion bundles
  std::map<Channel, std::size_t> widths;     // fusion bundles
  std::size_t input_dim = 0;                 // Stage-1 bundles
  std::size_t L_target = 0;
  ArchConfig arch;
  DropoutConfig dropout;
  std::uint64_t seed = 0;
  std::optional<Stage1Variant> stage1_variant;  // fusion with Y
  std::variant<DiscriminantParams, BaselineParams, FusionParams> params;
  TrainReport report;
  Predictions predictions;
  std::optional<Stage1Artifacts> stage1;  // fusion with Y

  Variant variant() const {
    return kind == ModelKind::baseline ? Variant::baseline_bilstm : Variant::ours;
  }
  /// Predictions with dropout off for the given samples.
  Predictions predict(const Dataset& dataset, std::span<const std::size_t> indices) const;
  /// Throws InvalidInput when the dataset dims do not match the bundle.
  void check_compatible(const Dataset& dataset) const;
};

ModelBundle make_stage1_bundle(const Stage1Result& result, const TrainConfig& cfg,
                               std::size_t input_dim);
ModelBundle make_stage2_bundle(const Stage2Result& result, const TrainConfig& cfg,
                               const Stage1Artifacts* stage1);

/// Returns the written file paths in a fixed order.
std::vector<std::filesystem::path> save_bundle(const ModelBundle& bundle,
                                               const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

nlohmann::json report_to_json(const TrainReport& report);
TrainReport report_from_json(const nlohmann::json& j);

/// `sample_id,score` CSV.
void write_predictions_csv(const Predictions& preds, const std::filesystem::path& path);
Predictions read_predictions_csv(const std::filesystem::path& path);

/// Loads the Stage-1 artifacts from a directory with one bundle per modality
/// in subdirectories A/, V/ and T/.
Stage1Artifacts load_stage1_dir(const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hmfmd
