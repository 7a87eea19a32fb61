#include "hmfmd/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "hmfmd/errors.hpp"

namespace hmfmd {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

// Yields lines with trailing '\r' stripped; skips blank lines.
class CsvReader {
 public:
  explicit CsvReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw ParseError(path.string() + ": cannot open file");
  }
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
  std::size_t line_no() const { return line_no_; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

double parse_cell(std::string_view tok, const CsvReader& r) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(where(r.path(), r.line_no()) + "non-numeric cell '" + std::string(tok) + "'");
  }
  return v;
}

long long parse_int(std::string_view tok, const CsvReader& r, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(where(r.path(), r.line_no()) + "bad " + what + " '" + std::string(tok) + "'");
  }
  return v;
}

void expect_header(CsvReader& r, const std::vector<std::string>& want) {
  std::string line;
  if (!r.next(line)) throw ParseError(r.path().string() + ": empty file");
  const auto cols = split_commas(line);
  bool ok = cols.size() == want.size();
  for (std::size_t i = 0; ok && i < cols.size(); ++i) ok = cols[i] == want[i];
  if (!ok) {
    std::string expected;
    for (const auto& w : want) expected += (expected.empty() ? "" : ",") + w;
    throw ParseError(where(r.path(), r.line_no()) + "expected header '" + expected + "'");
  }
}

std::string format_cell(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw InvalidInput(path.string() + ": write failed");
}

}  // namespace

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
  }
  return "?";
}

Partition parse_partition(std::string_view token) {
  if (token == "train") return Partition::train;
  if (token == "dev" || token == "devel") return Partition::dev;
  if (token == "test") return Partition::test;
  throw InvalidInput("unknown partition '" + std::string(token) + "'");
}

std::vector<std::size_t> Dataset::indices(Partition p) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].partition == p) out.push_back(i);
  }
  return out;
}

void Dataset::validate() const {
  std::set<std::string> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.id).second) throw AssemblyError("duplicate sample id " + s.id);
    if (s.label != 0 && s.label != 1) throw AssemblyError("sample " + s.id + ": label not in {0,1}");
    for (Modality m : kModalities) {
      const Matrix& x = s.features(m);
      if (x.rows() != L_target) {
        throw AssemblyError("sample " + s.id + " modality " + std::string(modality_name(m)) +
                            ": length " + std::to_string(x.rows()) + " != L_target " +
                            std::to_string(L_target));
      }
      if (x.cols() != dim(m) || x.cols() == 0) {
        throw AssemblyError("sample " + s.id + " modality " + std::string(modality_name(m)) +
                            ": width " + std::to_string(x.cols()) + " != " +
                            std::to_string(dim(m)));
      }
      if (!all_finite(x)) throw AssemblyError("sample " + s.id + ": non-finite features");
    }
  }
}

std::size_t feature_csv_dim(const fs::path& path) {
  CsvReader r(path);
  std::string line;
  if (!r.next(line)) throw ParseError(path.string() + ": empty file");
  const auto cols = split_commas(line);
  if (cols.size() < 3 || cols[0] != "sample_id" || cols[1] != "timestep") {
    throw ParseError(where(path, r.line_no()) + "expected header 'sample_id,timestep,f0,...'");
  }
  for (std::size_t i = 2; i < cols.size(); ++i) {
    if (cols[i] != "f" + std::to_string(i - 2)) {
      throw ParseError(where(path, r.line_no()) + "unexpected column '" + std::string(cols[i]) +
                       "'");
    }
  }
  return cols.size() - 2;
}

FeatureTable load_feature_csv(const fs::path& path, Modality modality, std::size_t expected_dim) {
  if (!fs::exists(path)) throw ParseError(path.string() + ": file not found");
  const std::size_t dim = feature_csv_dim(path);
  if (dim != expected_dim) {
    throw ShapeError(path.string() + ": dimension mismatch, file has " + std::to_string(dim) +
                     " features, expected " + std::to_string(expected_dim));
  }
  CsvReader r(path);
  std::string line;
  r.next(line);  // header, validated above

  std::map<std::string, std::map<long long, std::vector<double>>> rows;
  while (r.next(line)) {
    const auto cells = split_commas(line);
    if (cells.size() != dim + 2) {
      throw ParseError(where(path, r.line_no()) + "expected " + std::to_string(dim + 2) +
                       " cells, found " + std::to_string(cells.size()));
    }
    if (cells[0].empty()) throw ParseError(where(path, r.line_no()) + "empty sample_id");
    const long long ts = parse_int(cells[1], r, "timestep");
    if (ts < 0) throw ParseError(where(path, r.line_no()) + "negative timestep");
    std::vector<double> values(dim);
    for (std::size_t k = 0; k < dim; ++k) values[k] = parse_cell(cells[k + 2], r);
    auto& by_ts = rows[std::string(cells[0])];
    if (!by_ts.emplace(ts, std::move(values)).second) {
      throw ParseError(where(path, r.line_no()) + "duplicate (sample_id, timestep) (" +
                       std::string(cells[0]) + ", " + std::to_string(ts) + ")");
    }
  }

  FeatureTable out;
  for (auto& [id, by_ts] : rows) {
    Matrix m(by_ts.size(), dim);
    std::size_t r_idx = 0;
    for (auto& [ts, values] : by_ts) {
      std::copy(values.begin(), values.end(), m.row(r_idx++).begin());
    }
    out.emplace(id, FeatureSequence{modality, std::move(m), path.filename().string()});
  }
  return out;
}

LabelTable load_labels(const fs::path& path) {
  CsvReader r(path);
  expect_header(r, {"sample_id", "label"});
  LabelTable out;
  std::string line;
  while (r.next(line)) {
    const auto cells = split_commas(line);
    if (cells.size() != 2) throw ParseError(where(path, r.line_no()) + "expected 2 cells");
    const long long label = parse_int(cells[1], r, "label");
    if (label != 0 && label != 1) {
      throw ParseError(where(path, r.line_no()) + "label " + std::string(cells[1]) +
                       " not in {0,1}");
    }
    if (!out.emplace(std::string(cells[0]), static_cast<int>(label)).second) {
      throw ParseError(where(path, r.line_no()) + "duplicate sample_id " + std::string(cells[0]));
    }
  }
  return out;
}

PartitionTable load_partitions(const fs::path& path) {
  CsvReader r(path);
  expect_header(r, {"sample_id", "partition"});
  PartitionTable out;
  std::string line;
  while (r.next(line)) {
    const auto cells = split_commas(line);
    if (cells.size() != 2) throw ParseError(where(path, r.line_no()) + "expected 2 cells");
    Partition p;
    try {
      p = parse_partition(cells[1]);
    } catch (const InvalidInput& e) {
      throw ParseError(where(path, r.line_no()) + e.what());
    }
    if (!out.emplace(std::string(cells[0]), p).second) {
      throw ParseError(where(path, r.line_no()) + "duplicate sample_id " + std::string(cells[0]));
    }
  }
  return out;
}

Matrix normalize_length(const Matrix& m, std::size_t L_target, double pad_value) {
  if (L_target == 0) throw InvalidInput("L_target must be >= 1");
  Matrix out(L_target, m.cols(), pad_value);
  if (m.rows() >= L_target) {
    const std::size_t skip = m.rows() - L_target;
    std::copy(m.data() + skip * m.cols(), m.data() + m.size(), out.data());
  } else {
    const std::size_t pad = L_target - m.rows();
    std::copy(m.data(), m.data() + m.size(), out.data() + pad * m.cols());
  }
  return out;
}

Dataset assemble_dataset(const std::array<FeatureTable, 3>& features, const LabelTable& labels,
                         const PartitionTable& partitions, std::size_t L_target,
                         double pad_value) {
  if (L_target == 0) throw InvalidInput("assemble_dataset: L_target must be >= 1");
  std::vector<std::string> missing;
  for (const auto& [id, label] : labels) {
    bool complete = partitions.contains(id);
    for (const auto& table : features) complete = complete && table.contains(id);
    if (!complete) missing.push_back(id);
  }
  std::vector<std::string> unlabeled;
  for (const auto& table : features) {
    for (const auto& [id, seq] : table) {
      if (!labels.contains(id)) unlabeled.push_back(id);
    }
  }
  auto list = [](std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 20) s += ", ... (" + std::to_string(ids.size()) + " total)";
    return s;
  };
  if (!missing.empty()) {
    throw AssemblyError("ids missing a modality or partition: " + list(missing));
  }
  if (!unlabeled.empty()) throw AssemblyError("feature rows for unlabeled ids: " + list(unlabeled));

  Dataset ds;
  ds.L_target = L_target;
  bool dims_set = false;
  for (const auto& [id, label] : labels) {
    Sample s;
    s.id = id;
    s.label = label;
    s.partition = partitions.at(id);
    for (Modality m : kModalities) {
      const FeatureSequence& seq = features[index_of(m)].at(id);
      if (!dims_set) ds.modality_dims[index_of(m)] = seq.data.cols();
      s.sequences[index_of(m)] = {m, normalize_length(seq.data, L_target, pad_value),
                                  seq.source_id};
    }
    dims_set = true;
    ds.samples.push_back(std::move(s));
  }
  ds.validate();
  return ds;
}

void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  }
}

std::vector<std::vector<std::size_t>> batch_iter(const Dataset& dataset, Partition partition,
                                                 std::size_t batch_size, bool shuffle,
                                                 RngStream& rng) {
  if (batch_size == 0) throw InvalidInput("batch_iter: batch_size must be >= 1");
  auto idx = dataset.indices(partition);
  if (idx.empty()) {
    throw InvalidInput("batch_iter: partition " + std::string(partition_name(partition)) +
                       " is empty");
  }
  if (shuffle) shuffle_indices(idx, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t stop = std::min(idx.size(), start + batch_size);
    batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                         idx.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

std::string feature_file_name(Modality m, Partition p) {
  return std::string(modality_name(m)) + "_" + std::string(partition_name(p)) + ".csv";
}

std::vector<fs::path> dataset_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (Modality m : kModalities) {
    for (Partition p : kPartitions) out.push_back(dir / feature_file_name(m, p));
  }
  out.push_back(dir / kLabelsFile);
  out.push_back(dir / kPartitionsFile);
  return out;
}

std::vector<fs::path> write_dataset_csv(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  const auto paths = dataset_files(dir);
  std::size_t k = 0;
  for (Modality m : kModalities) {
    for (Partition p : kPartitions) {
      std::string text = "sample_id,timestep";
      for (std::size_t j = 0; j < dataset.dim(m); ++j) text += ",f" + std::to_string(j);
      text += '\n';
      for (std::size_t i : dataset.indices(p)) {
        const Sample& s = dataset.samples[i];
        const Matrix& x = s.features(m);
        for (std::size_t r = 0; r < x.rows(); ++r) {
          text += s.id + "," + std::to_string(r);
          for (double v : x.row(r)) text += "," + format_cell(v);
          text += '\n';
        }
      }
      write_text(paths[k++], text);
    }
  }
  std::string labels = "sample_id,label\n";
  std::string parts = "sample_id,partition\n";
  for (const auto& s : dataset.samples) {
    labels += s.id + "," + std::to_string(s.label) + "\n";
    parts += s.id + "," + std::string(partition_name(s.partition)) + "\n";
  }
  write_text(paths[k++], labels);
  write_text(paths[k++], parts);
  return paths;
}

Dataset load_dataset_dir(const fs::path& dir, std::size_t L_target, double pad_value) {
  std::array<FeatureTable, 3> features;
  for (Modality m : kModalities) {
    std::size_t dim = 0;
    for (Partition p : kPartitions) {
      const fs::path path = dir / feature_file_name(m, p);
      if (!fs::exists(path)) throw ParseError(path.string() + ": file not found");
      const std::size_t d = feature_csv_dim(path);
      if (dim == 0) dim = d;
      auto table = load_feature_csv(path, m, dim);
      for (auto& [id, seq] : table) {
        if (!features[index_of(m)].emplace(id, std::move(seq)).second) {
          throw ParseError(path.string() + ": sample_id " + id +
                           " already present in another partition file");
        }
      }
    }
  }
  const auto labels = load_labels(dir / kLabelsFile);
  const auto partitions = load_partitions(dir / kPartitionsFile);
  return assemble_dataset(features, labels, partitions, L_target, pad_value);
}

}  // namespace hmfmd
