#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hmfmd/matrix.hpp"
#include "hmfmd/modality.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {

enum class Partition { train = 0, dev = 1, test = 2 };

inline constexpr std::array<Partition, 3> kPartitions = {Partition::train, Partition::dev,
                                                          Partition::test};

std::string_view partition_name(Partition p);
Partition parse_partition(std::string_view token);

/// One modality's L x d feature matrix for a labeled window.
struct FeatureSequence {
  Modality modality = Modality::A;
  Matrix data;
  std::string source_id;
};

struct Sample {
  std::string id;
  std::array<FeatureSequence, 3> sequences;  // indexed by Modality
  int label = 0;
  Partition partition = Partition::train;

  const Matrix& features(Modality m) const { return sequences[index_of(m)].data; }
};

struct Dataset {
  std::vector<Sample> samples;  // sorted by id
  std::array<std::size_t, 3> modality_dims{};
  std::size_t L_target = 0;

  std::size_t dim(Modality m) const { return modality_dims[index_of(m)]; }
  /// Indices into `samples` for one partition, in dataset order.
  std::vector<std::size_t> indices(Partition p) const;
  /// Throws AssemblyError if any Dataset invariant is broken.
  void validate() const;
};

using FeatureTable = std::map<std::string, FeatureSequence>;
using LabelTable = std::map<std::string, int>;
using PartitionTable = std::map<std::string, Partition>;

/// Reads `sample_id,timestep,f0,...,f{d-1}`. Rows are grouped by id and ordered
/// by timestep. ParseError messages carry the 1-based line number.
FeatureTable load_feature_csv(const std::filesystem::path& path, Modality modality,
                              std::size_t expected_dim);
/// Number of f<k> columns declared in a feature CSV header.
std::size_t feature_csv_dim(const std::filesystem::path& path);
LabelTable load_labels(const std::filesystem::path& path);
PartitionTable load_partitions(const std::filesystem::path& path);

/// Front-pads with `pad_value` rows or keeps the last L_target rows.
Matrix normalize_length(const Matrix& m, std::size_t L_target, double pad_value = 0.0);

Dataset assemble_dataset(const std::array<FeatureTable, 3>& features, const LabelTable& labels,
                         const PartitionTable& partitions, std::size_t L_target,
                         double pad_value = 0.0);

/// Batches of indices into dataset.samples covering `partition` once.
std::vector<std::vector<std::size_t>> batch_iter(const Dataset& dataset, Partition partition,
                                                 std::size_t batch_size, bool shuffle,
                                                 RngStream& rng);

/// In-place Fisher-Yates shuffle driven by `rng`.
void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng);

// File layout of a dataset directory.
std::string feature_file_name(Modality m, Partition p);  // e.g. "A_train.csv"
inline constexpr std::string_view kLabelsFile = "labels.csv";
inline constexpr std::string_view kPartitionsFile = "partitions.csv";

/// Writes the 9 feature CSVs plus labels.csv and partitions.csv. Returns the
/// written paths in a fixed order.
std::vector<std::filesystem::path> write_dataset_csv(const Dataset& dataset,
                                                     const std::filesystem::path& dir);

/// Reads a directory written by write_dataset_csv (or the same layout from
/// real features). Feature dims are taken from the CSV headers.
Dataset load_dataset_dir(const std::filesystem::path& dir, std::size_t L_target,
                         double pad_value = 0.0);

/// Paths read by load_dataset_dir, in a fixed order.
std::vector<std::filesystem::path> dataset_files(const std::filesystem::path& dir);

}  // namespace hmfmd
