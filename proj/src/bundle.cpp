#include "hmfmd/bundle.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hmfmd/config.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/param_io.hpp"

namespace hmfmd {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::discriminant: return "discriminant";
    case ModelKind::baseline: return "baseline_bilstm";
    case ModelKind::fusion: return "fusion";
  }
  return "?";
}

namespace {

ModelKind parse_kind(const std::string& s) {
  if (s == "discriminant") return ModelKind::discriminant;
  if (s == "baseline_bilstm") return ModelKind::baseline;
  if (s == "fusion") return ModelKind::fusion;
  throw ParseError("bundle manifest: unknown kind '" + s + "'");
}

std::string format_score(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string stage1_file(Modality m) { return "stage1_" + std::string(modality_name(m)) + ".csv"; }

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw InvalidInput(path.string() + ": write failed");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json report_to_json(const TrainReport& r) {
  return json{{"epochs", r.epochs()},
              {"train_loss", r.train_loss},
              {"dev_auc", r.dev_auc},
              {"best_epoch", r.best_epoch},
              {"best_dev_auc", r.best_dev_auc},
              {"stopped_early", r.stopped_early}};
}

TrainReport report_from_json(const json& j) {
  TrainReport r;
  try {
    r.train_loss = j.at("train_loss").get<std::vector<double>>();
    r.dev_auc = j.at("dev_auc").get<std::vector<double>>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.best_dev_auc = j.at("best_dev_auc").get<double>();
    r.stopped_early = j.at("stopped_early").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("train report: ") + e.what());
  }
  return r;
}

void write_predictions_csv(const Predictions& preds, const fs::path& path) {
  std::string text = "sample_id,score\n";
  for (const auto& [id, p] : preds) text += id + "," + format_score(p) + "\n";
  write_text_file(path, text);
}

Predictions read_predictions_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  Predictions out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "sample_id,score") {
        throw ParseError(path.string() + ":1: expected header 'sample_id,score'");
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 2 cells");
    }
    double v = 0.0;
    const char* b = line.data() + comma + 1;
    const char* e = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad score");
    }
    if (!out.emplace(line.substr(0, comma), v).second) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": duplicate sample_id");
    }
  }
  if (line_no == 0) throw ParseError(path.string() + ": empty file");
  return out;
}

ModelBundle make_stage1_bundle(const Stage1Result& result, const TrainConfig& cfg,
                               std::size_t input_dim) {
  ModelBundle b;
  b.kind = result.variant == Variant::ours ? ModelKind::discriminant : ModelKind::baseline;
  b.modality = result.modality;
  b.input_dim = input_dim;
  b.L_target = cfg.L_target;
  b.arch = cfg.arch;
  b.dropout = cfg.stage1_dropout();
  b.seed = cfg.seed;
  if (const auto* p = std::get_if<DiscriminantParams>(&result.params)) {
    b.params = *p;
  } else {
    b.params = std::get<BaselineParams>(result.params);
  }
  b.report = result.report;
  b.predictions = result.predictions;
  return b;
}

ModelBundle make_stage2_bundle(const Stage2Result& result, const TrainConfig& cfg,
                               const Stage1Artifacts* stage1) {
  ModelBundle b;
  b.kind = ModelKind::fusion;
  b.channels = result.channels;
  for (Channel c : result.channels) b.widths[c] = result.params.width(c);
  b.L_target = cfg.L_target;
  b.arch = cfg.arch;
  b.dropout = cfg.stage2_dropout();
  b.seed = cfg.seed;
  b.stage1_variant = result.stage1_variant;
  b.params = result.params;
  b.report = result.report;
  b.predictions = result.predictions;
  if (result.stage1_variant) {
    if (!stage1) throw InvalidInput("stage-2 bundle with Y requires stage-1 artifacts");
    b.stage1 = *stage1;
  }
  return b;
}

Predictions ModelBundle::predict(const Dataset& dataset,
                                 std::span<const std::size_t> indices) const {
  check_compatible(dataset);
  switch (kind) {
    case ModelKind::discriminant:
      return predict_stage1(std::get<DiscriminantParams>(params), *modality, dropout, dataset,
                            indices);
    case ModelKind::baseline:
      return predict_stage1(std::get<BaselineParams>(params), *modality, dropout, dataset, indices);
    case ModelKind::fusion:
      return predict_fusion(std::get<FusionParams>(params), channels,
                            stage1 ? &*stage1 : nullptr, dataset, indices);
  }
  return {};
}

void ModelBundle::check_compatible(const Dataset& dataset) const {
  if (kind == ModelKind::fusion) {
    for (const auto& [c, w] : widths) {
      if (c == Channel::Y) continue;
      const std::size_t have = dataset.dim(static_cast<Modality>(c));
      if (have != w) {
        throw InvalidInput("bundle expects channel " + std::string(channel_name(c)) + " width " +
                           std::to_string(w) + ", dataset has " + std::to_string(have));
      }
    }
  } else if (dataset.dim(*modality) != input_dim) {
    throw InvalidInput("bundle expects modality " + std::string(modality_name(*modality)) +
                       " width " + std::to_string(input_dim) + ", dataset has " +
                       std::to_string(dataset.dim(*modality)));
  }
}

std::vector<fs::path> save_bundle(const ModelBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest{{"format_version", kBundleFormatVersion},
                {"param_format_version", kParamFormatVersion},
                {"kind", model_kind_name(b.kind)},
                {"L_target", b.L_target},
                {"arch", to_json(b.arch)},
                {"dropout", {{"other", b.dropout.other}, {"linear", b.dropout.linear}}},
                {"seed", b.seed}};
  if (b.kind == ModelKind::fusion) {
    manifest["channels"] = format_channel_list(b.channels);
    json widths = json::object();
    for (const auto& [c, w] : b.widths) widths[std::string(channel_name(c))] = w;
    manifest["widths"] = widths;
    manifest["stage1_variant"] = b.stage1_variant ? json(b.stage1_variant->tag()) : json(nullptr);
  } else {
    manifest["modality"] = modality_name(*b.modality);
    manifest["variant"] = variant_name(b.variant());
    manifest["input_dim"] = b.input_dim;
  }

  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    written.push_back(dir / name);
  };
  put("manifest.json", manifest.dump(2) + "\n");
  put("params.txt", std::visit([](const auto& p) { return serialize_params(p); }, b.params));
  put("report.json", report_to_json(b.report).dump(2) + "\n");
  write_predictions_csv(b.predictions, dir / "predictions.csv");
  written.push_back(dir / "predictions.csv");
  if (b.stage1) {
    for (Modality m : kModalities) {
      write_predictions_csv(b.stage1->predictions[index_of(m)], dir / stage1_file(m));
      written.push_back(dir / stage1_file(m));
    }
  }
  return written;
}

ModelBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidInput("bundle: " + dir.string() + " is not a directory");
  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::parse_error& e) {
    throw ParseError("bundle manifest: " + std::string(e.what()));
  }
  ModelBundle b;
  try {
    if (manifest.at("format_version").get<int>() != kBundleFormatVersion) {
      throw ParseError("bundle manifest: unsupported format_version");
    }
    b.kind = parse_kind(manifest.at("kind").get<std::string>());
    b.L_target = manifest.at("L_target").get<std::size_t>();
    apply_json(manifest.at("arch"), b.arch);
    b.dropout.other = manifest.at("dropout").at("other").get<double>();
    b.dropout.linear = manifest.at("dropout").at("linear").get<double>();
    b.seed = manifest.at("seed").get<std::uint64_t>();
    if (b.kind == ModelKind::fusion) {
      b.channels = parse_channel_list(manifest.at("channels").get<std::string>());
      for (const auto& [name, w] : manifest.at("widths").items()) {
        b.widths[parse_channel(name)] = w.get<std::size_t>();
      }
      if (!manifest.at("stage1_variant").is_null()) {
        b.stage1_variant = Stage1Variant::parse_tag(manifest.at("stage1_variant").get<std::string>());
      }
    } else {
      b.modality = parse_modality(manifest.at("modality").get<std::string>());
      b.input_dim = manifest.at("input_dim").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ParseError("bundle manifest: " + std::string(e.what()));
  }

  // Rebuild the parameter structure from the manifest, then fill it.
  RngStream shape_only(0);
  const auto tensors = parse_param_document(read_text_file(dir / "params.txt"));
  switch (b.kind) {
    case ModelKind::discriminant: {
      auto p = init_discriminant(b.input_dim, b.arch, shape_only);
      import_tensors(p, tensors);
      b.params = std::move(p);
      break;
    }
    case ModelKind::baseline: {
      auto p = init_baseline(b.input_dim, b.arch, shape_only);
      import_tensors(p, tensors);
      b.params = std::move(p);
      break;
    }
    case ModelKind::fusion: {
      auto p = init_fusion(b.widths, b.arch, shape_only);
      import_tensors(p, tensors);
      b.params = std::move(p);
      break;
    }
  }
  try {
    b.report = report_from_json(json::parse(read_text_file(dir / "report.json")));
  } catch (const json::parse_error& e) {
    throw ParseError("train report: " + std::string(e.what()));
  }
  b.predictions = read_predictions_csv(dir / "predictions.csv");
  if (b.stage1_variant) {
    Stage1Artifacts s;
    s.variant = *b.stage1_variant;
    for (Modality m : kModalities) s.predictions[index_of(m)] = read_predictions_csv(dir / stage1_file(m));
    b.stage1 = std::move(s);
  }
  return b;
}

Stage1Artifacts load_stage1_dir(const fs::path& dir) {
  Stage1Artifacts a;
  for (Modality m : kModalities) {
    const fs::path sub = dir / std::string(modality_name(m));
    if (!fs::exists(sub / "manifest.json") || !fs::exists(sub / "predictions.csv")) {
      throw InvalidInput("stage-1 artifacts incomplete: missing " + sub.string());
    }
    json manifest = json::parse(read_text_file(sub / "manifest.json"));
    a.variant[m] = parse_variant(manifest.at("variant").get<std::string>());
    a.predictions[index_of(m)] = read_predictions_csv(sub / "predictions.csv");
  }
  return a;
}

}  // namespace hmfmd
