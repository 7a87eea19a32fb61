#include "hmfmd/cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmfmd/bundle.hpp"
#include "hmfmd/config.hpp"
#include "hmfmd/errors.hpp"
#include "hmfmd/verify.hpp"
#include "hmfmd/version.hpp"

namespace hmfmd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct VerificationFailure : Error {
  using Error::Error;
};

// Errors raised while resolving flags, configs and bundles are usage errors
// regardless of their type.
template <class F>
auto usage_phase(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  } catch (const fs::filesystem_error& e) {
    throw UsageError(e.what());
  }
}

std::string format_auc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct Digests {
  json entries = json::array();

  void add(const fs::path& p) {
    entries.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  }
  void add_all(const std::vector<fs::path>& ps) {
    for (const auto& p : ps) add(p);
  }
};

json relative_paths(const std::vector<fs::path>& paths, const fs::path& base) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(p.lexically_relative(base).generic_string());
  return out;
}

void write_run_manifest(const fs::path& dir, const std::string& command,
                        const std::vector<std::string>& args, const RunConfig& cfg,
                        std::uint64_t seed, const Digests& inputs, const json& artifacts,
                        const json& extra) {
  fs::create_directories(dir);
  json m{{"tool", "hmfmd"},
         {"version", kVersion},
         {"command", command},
         {"args", args},
         {"config", {{"train", to_json(cfg.train)}, {"synth", to_json(cfg.synth)}}},
         {"seed", seed},
         {"inputs", inputs.entries},
         {"artifacts", artifacts}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_text_file(dir / kRunManifestFile, m.dump(2) + "\n");
}

// Flags shared by every command that reads a config file.
struct CommonFlags {
  std::string config;
};

RunConfig resolve_config(const CommonFlags& common) {
  return usage_phase([&] {
    RunConfig cfg;
    if (!common.config.empty()) cfg = load_run_config(common.config);
    return cfg;
  });
}

void add_config_input(Digests& d, const CommonFlags& common) {
  if (!common.config.empty()) d.add(common.config);
}

// ---------------------------------------------------------------------------

struct SynthFlags {
  CommonFlags common;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  RunConfig cfg = resolve_config(f.common);
  if (f.seed) cfg.synth.seed = *f.seed;
  usage_phase([&] { cfg.synth.validate(); });

  const Dataset ds = generate_synthetic(cfg.synth);
  const auto written = usage_phase([&] { return write_dataset_csv(ds, f.out); });

  Digests inputs;
  add_config_input(inputs, f.common);
  write_run_manifest(f.out, "synth", args, cfg, cfg.synth.seed, inputs,
                     relative_paths(written, f.out), json::object());
  out << "wrote " << ds.samples.size() << " samples (" << written.size() << " files) to "
      << f.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainFlags {
  CommonFlags common;
  std::string data;
  std::string out;
  int stage = 0;
  std::string modality;
  std::string variant = "ours";
  std::string channels = "A,V,T,Y";
  std::string stage1_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<std::size_t> L_target;
  std::optional<std::string> loss_weights;
};

void apply_overrides(const TrainFlags& f, TrainConfig& t) {
  if (f.seed) t.seed = *f.seed;
  if (f.max_epochs) t.max_epochs = *f.max_epochs;
  if (f.patience) t.patience = *f.patience;
  if (f.batch_size) t.batch_size = *f.batch_size;
  if (f.lr) t.lr = *f.lr;
  if (f.L_target) t.L_target = *f.L_target;
  if (f.loss_weights) t.loss_weight_mode = parse_loss_weight_mode(*f.loss_weights);
}

std::string report_line(const TrainReport& r) {
  return "best_dev_auc " + format_auc(r.best_dev_auc) + " best_epoch " +
         std::to_string(r.best_epoch) + " epochs " + std::to_string(r.epochs()) +
         (r.stopped_early ? " (early stop)" : "");
}

int cmd_train(const TrainFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  RunConfig cfg = resolve_config(f.common);
  struct Plan {
    std::vector<Modality> modalities;
    Stage1Variant variants;
    std::vector<Channel> channels;
    std::optional<Stage1Artifacts> stage1;
  } plan;

  usage_phase([&] {
    apply_overrides(f, cfg.train);
    cfg.train.validate();
    if (cfg.train.L_target == 0) {
      throw UsageError("train: L_target must be set (config train.L_target or --L-target)");
    }
    if (f.stage == 1) {
      if (f.modality.empty()) {
        plan.modalities.assign(kModalities.begin(), kModalities.end());
      } else {
        plan.modalities.push_back(parse_modality(f.modality));
      }
      if (f.variant.find(',') != std::string::npos) {
        plan.variants = Stage1Variant::parse_tag(f.variant);
      } else {
        const Variant v = parse_variant(f.variant);
        for (Modality m : kModalities) plan.variants[m] = v;
      }
    } else {
      plan.channels = parse_channel_list(f.channels);
      const bool uses_y =
          std::find(plan.channels.begin(), plan.channels.end(), Channel::Y) != plan.channels.end();
      if (uses_y) {
        if (f.stage1_dir.empty()) {
          throw UsageError("train: --stage 2 with channel Y requires --stage1-dir");
        }
        plan.stage1 = load_stage1_dir(f.stage1_dir);
      }
    }
  });

  Digests inputs;
  add_config_input(inputs, f.common);
  const Dataset ds = load_dataset_dir(f.data, cfg.train.L_target);
  inputs.add_all(dataset_files(f.data));

  std::vector<fs::path> written;
  json results = json::object();
  if (f.stage == 1) {
    for (Modality m : plan.modalities) {
      const Variant v = plan.variants[m];
      const Stage1Result r = train_stage1(ds, m, v, cfg.train);
      const ModelBundle b = make_stage1_bundle(r, cfg.train, ds.dim(m));
      const fs::path dir = fs::path(f.out) / std::string(modality_name(m));
      const auto files = usage_phase([&] { return save_bundle(b, dir); });
      written.insert(written.end(), files.begin(), files.end());
      results[std::string(modality_name(m))] = {{"variant", variant_name(v)},
                                                {"best_dev_auc", r.report.best_dev_auc},
                                                {"best_epoch", r.report.best_epoch},
                                                {"epochs", r.report.epochs()}};
      out << "stage1 " << modality_name(m) << " " << variant_name(v) << " "
          << report_line(r.report) << "\n";
    }
  } else {
    if (plan.stage1) {
      for (Modality m : kModalities) {
        const fs::path sub = fs::path(f.stage1_dir) / std::string(modality_name(m));
        inputs.add(sub / "manifest.json");
        inputs.add(sub / "predictions.csv");
      }
    }
    const Stage2Result r =
        train_stage2(ds, plan.stage1 ? &*plan.stage1 : nullptr, plan.channels, cfg.train);
    const ModelBundle b = make_stage2_bundle(r, cfg.train, plan.stage1 ? &*plan.stage1 : nullptr);
    written = usage_phase([&] { return save_bundle(b, f.out); });
    results["fusion"] = {{"channels", format_channel_list(plan.channels)},
                         {"best_dev_auc", r.report.best_dev_auc},
                         {"best_epoch", r.report.best_epoch},
                         {"epochs", r.report.epochs()}};
    if (r.stage1_variant) results["fusion"]["stage1_variant"] = r.stage1_variant->tag();
    out << "stage2 " << format_channel_list(plan.channels) << " " << report_line(r.report) << "\n";
  }
  write_run_manifest(f.out, "train", args, cfg, cfg.train.seed, inputs,
                     relative_paths(written, f.out),
                     {{"stage", f.stage}, {"results", results}});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalFlags {
  CommonFlags common;
  std::vector<std::string> bundles;
  std::string data;
  std::string partition = "dev";
  std::string out;
};

int cmd_eval(const EvalFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  RunConfig cfg = resolve_config(f.common);
  std::vector<ModelBundle> bundles;
  Partition partition{};
  usage_phase([&] {
    if (f.bundles.empty()) throw UsageError("eval: at least one --bundle is required");
    partition = parse_partition(f.partition);
    for (const auto& dir : f.bundles) bundles.push_back(load_bundle(dir));
    for (const auto& b : bundles) {
      if (b.L_target != bundles.front().L_target) {
        throw UsageError("eval: bundles disagree on L_target");
      }
    }
  });

  Digests inputs;
  add_config_input(inputs, f.common);
  const Dataset ds = load_dataset_dir(f.data, bundles.front().L_target);
  inputs.add_all(dataset_files(f.data));
  for (const auto& dir : f.bundles) {
    for (const char* name : {"manifest.json", "params.txt"}) inputs.add(fs::path(dir) / name);
  }
  usage_phase([&] {
    for (const auto& b : bundles) b.check_compatible(ds);
  });

  const auto idx = ds.indices(partition);
  std::vector<Predictions> lists;
  for (const auto& b : bundles) lists.push_back(b.predict(ds, idx));
  const Predictions combined = lists.size() == 1 ? lists.front() : ensemble_average(lists);
  const Evaluation ev = evaluate_predictions(combined, ds, partition);

  const fs::path pred_path = fs::path(f.out) / "predictions.csv";
  usage_phase([&] {
    fs::create_directories(f.out);
    write_predictions_csv(combined, pred_path);
  });
  write_run_manifest(f.out, "eval", args, cfg, bundles.front().seed, inputs,
                     relative_paths({pred_path}, f.out),
                     {{"partition", partition_name(partition)},
                      {"n_models", bundles.size()},
                      {"auc", ev.auc}});
  out << "AUC " << partition_name(partition) << " " << format_auc(ev.auc) << " (" << bundles.size()
      << (bundles.size() == 1 ? " model" : " models, averaged") << ", " << idx.size()
      << " samples)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckFlags {
  std::string scope = "all";
  double corrupt = 0.0;
  std::string out = ".";
};

int cmd_gradcheck(const GradcheckFlags& f, const std::vector<std::string>& args,
                  std::ostream& out) {
  const GradcheckScope scope = usage_phase([&] { return parse_gradcheck_scope(f.scope); });
  const auto entries = run_gradcheck_suite(scope, f.corrupt);
  bool all_pass = true;
  json report = json::array();
  for (const auto& e : entries) {
    char line[128];
    std::snprintf(line, sizeof line, "%-13s %6zu params  max_rel_error %.3e  %s",
                  e.component.c_str(), e.n_params, e.max_rel_error, e.passed ? "PASS" : "FAIL");
    out << line << "\n";
    all_pass = all_pass && e.passed;
    report.push_back(
        {{"component", e.component}, {"max_rel_error", e.max_rel_error}, {"passed", e.passed}});
  }
  out << (all_pass ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance "
      << kGradcheckTolerance << ", eps " << kGradcheckEps << ")\n";
  write_run_manifest(f.out, "gradcheck", args, RunConfig{}, 0, Digests{}, json::array(),
                     {{"scope", f.scope}, {"report", report}});
  if (!all_pass) throw VerificationFailure("gradcheck: tolerance exceeded");
  return kExitOk;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_text_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage hybrid multimodal fusion classifier", "hmfmd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic multimodal corpus");
  s->add_option("--config", synth.common.config, "Run config (JSON)")->check(CLI::ExistingFile);
  s->add_option("--out", synth.out, "Output dataset directory")->required();
  s->add_option("--seed", synth.seed, "Override synth.seed");

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Train Stage-1 discriminants or a Stage-2 fusion model");
  t->add_option("--config", train.common.config, "Run config (JSON)")->check(CLI::ExistingFile);
  t->add_option("--data", train.data, "Dataset directory")->required();
  t->add_option("--out", train.out, "Output directory")->required();
  t->add_option("--stage", train.stage, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  t->add_option("--modality", train.modality, "Stage 1: A, V or T (default: all three)");
  t->add_option("--variant", train.variant,
                "Stage 1: ours, baseline, or a per-modality tag such as a,V,t");
  t->add_option("--channels", train.channels, "Stage 2: subset of A,V,T,Y");
  t->add_option("--stage1-dir", train.stage1_dir, "Stage 2: Stage-1 output directory");
  t->add_option("--seed", train.seed, "Override train.seed");
  t->add_option("--max-epochs", train.max_epochs, "Override train.max_epochs");
  t->add_option("--patience", train.patience, "Override train.patience");
  t->add_option("--batch-size", train.batch_size, "Override train.batch_size");
  t->add_option("--lr", train.lr, "Override train.lr");
  t->add_option("--L-target", train.L_target, "Override train.L_target");
  t->add_option("--loss-weights", train.loss_weights, "uniform or class_balanced");

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "Evaluate one bundle or an averaged ensemble");
  e->add_option("--config", eval.common.config, "Run config (JSON)")->check(CLI::ExistingFile);
  e->add_option("--bundle", eval.bundles, "Model bundle directory (repeatable)");
  e->add_option("--data", eval.data, "Dataset directory")->required();
  e->add_option("--partition", eval.partition, "train, dev or test");
  e->add_option("--out", eval.out, "Output directory")->required();

  GradcheckFlags grad;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  g->add_option("--scope", grad.scope, "layers, models or all");
  g->add_option("--out", grad.out, "Directory for the run manifest");
  g->add_option("--corrupt", grad.corrupt)->group("");  // test hook: scales analytic gradients

  std::vector<const char*> argv{"hmfmd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, args, out);
    if (t->parsed()) return cmd_train(train, args, out);
    if (e->parsed()) return cmd_eval(eval, args, out);
    return cmd_gradcheck(grad, args, out);
  } catch (const VerificationFailure& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitVerificationFailure;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace hmfmd::cli
