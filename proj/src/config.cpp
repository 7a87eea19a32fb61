#include "hmfmd/config.hpp"

#include <fstream>
#include <set>

#include "hmfmd/errors.hpp"

namespace hmfmd {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* section) {
  if (!j.is_object()) throw InvalidInput(std::string("config: section '") + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw InvalidInput(std::string("config: unknown key '") + key + "' in section '" + section + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).template get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
void read_triplet(const json& j, const char* key, std::array<T, 3>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    if (v.is_array()) {
      if (v.size() != 3) throw InvalidInput(std::string("config: '") + key + "' needs 3 entries");
      for (std::size_t i = 0; i < 3; ++i) out[i] = v[i].template get<T>();
    } else if (v.is_object()) {
      for (const auto& [name, value] : v.items()) {
        out[index_of(parse_modality(name))] = value.template get<T>();
      }
    } else {
      throw InvalidInput(std::string("config: '") + key + "' must be an array or an {A,V,T} object");
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
json triplet(const std::array<T, 3>& v) {
  return json{{"A", v[0]}, {"V", v[1]}, {"T", v[2]}};
}

}  // namespace

std::string_view loss_weight_mode_name(LossWeightMode m) {
  return m == LossWeightMode::uniform ? "uniform" : "class_balanced";
}

LossWeightMode parse_loss_weight_mode(std::string_view s) {
  if (s == "uniform") return LossWeightMode::uniform;
  if (s == "class_balanced") return LossWeightMode::class_balanced;
  throw InvalidInput("config: loss_weight_mode must be 'uniform' or 'class_balanced'");
}

json to_json(const ArchConfig& a) {
  return json{{"hidden_dim", a.hidden_dim},
              {"lstm_layers", a.lstm_layers},
              {"transformer_layers", a.transformer_layers},
              {"n_heads", a.n_heads},
              {"ff_multiplier", a.ff_multiplier},
              {"positional_encoding", a.positional_encoding}};
}

void apply_json(const json& j, ArchConfig& a) {
  read(j, "hidden_dim", a.hidden_dim);
  read(j, "lstm_layers", a.lstm_layers);
  read(j, "transformer_layers", a.transformer_layers);
  read(j, "n_heads", a.n_heads);
  read(j, "ff_multiplier", a.ff_multiplier);
  read(j, "positional_encoding", a.positional_encoding);
}

json to_json(const TrainConfig& c) {
  json j{{"lr", c.lr},
         {"batch_size", c.batch_size},
         {"max_epochs", c.max_epochs},
         {"patience", c.patience},
         {"dropout_linear", c.dropout_linear},
         {"dropout_other", c.dropout_other},
         {"stage1_dropout_linear", c.stage1_dropout_linear},
         {"seed", c.seed},
         {"loss_weight_mode", loss_weight_mode_name(c.loss_weight_mode)},
         {"L_target", c.L_target},
         {"adam_beta1", c.adam_beta1},
         {"adam_beta2", c.adam_beta2},
         {"adam_eps", c.adam_eps}};
  j.update(to_json(c.arch));
  return j;
}

void apply_json(const json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"lr", "batch_size", "max_epochs", "patience", "dropout_linear", "dropout_other",
                  "stage1_dropout_linear", "seed", "loss_weight_mode", "L_target", "adam_beta1",
                  "adam_beta2", "adam_eps", "hidden_dim", "lstm_layers", "transformer_layers",
                  "n_heads", "ff_multiplier", "positional_encoding"},
                 "train");
  read(j, "lr", c.lr);
  read(j, "batch_size", c.batch_size);
  read(j, "max_epochs", c.max_epochs);
  read(j, "patience", c.patience);
  read(j, "dropout_linear", c.dropout_linear);
  read(j, "dropout_other", c.dropout_other);
  read(j, "stage1_dropout_linear", c.stage1_dropout_linear);
  read(j, "seed", c.seed);
  if (j.contains("loss_weight_mode")) {
    std::string mode;
    read(j, "loss_weight_mode", mode);
    c.loss_weight_mode = parse_loss_weight_mode(mode);
  }
  read(j, "L_target", c.L_target);
  read(j, "adam_beta1", c.adam_beta1);
  read(j, "adam_beta2", c.adam_beta2);
  read(j, "adam_eps", c.adam_eps);
  apply_json(j, c.arch);
}

json to_json(const SynthConfig& c) {
  return json{{"n_train", c.n_train},
              {"n_dev", c.n_dev},
              {"n_test", c.n_test},
              {"modality_dims", triplet(c.modality_dims)},
              {"L_target", c.L_target},
              {"signal", triplet(c.signal)},
              {"noise_scale", c.noise_scale},
              {"positive_rate", c.positive_rate},
              {"window_min", c.window_min},
              {"window_max", c.window_max},
              {"seed", c.seed}};
}

void apply_json(const json& j, SynthConfig& c) {
  reject_unknown(j,
                 {"n_train", "n_dev", "n_test", "modality_dims", "L_target", "signal",
                  "noise_scale", "positive_rate", "window_min", "window_max", "seed"},
                 "synth");
  read(j, "n_train", c.n_train);
  read(j, "n_dev", c.n_dev);
  read(j, "n_test", c.n_test);
  read_triplet(j, "modality_dims", c.modality_dims);
  read(j, "L_target", c.L_target);
  read_triplet(j, "signal", c.signal);
  read(j, "noise_scale", c.noise_scale);
  read(j, "positive_rate", c.positive_rate);
  read(j, "window_min", c.window_min);
  read(j, "window_max", c.window_max);
  read(j, "seed", c.seed);
}

RunConfig parse_run_config(const json& doc) {
  reject_unknown(doc, {"train", "synth"}, "<root>");
  RunConfig cfg;
  if (doc.contains("train")) apply_json(doc.at("train"), cfg.train);
  if (doc.contains("synth")) apply_json(doc.at("synth"), cfg.synth);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config: " + path.string() + ": " + e.what());
  }
  // A run manifest carries its resolved configuration and can be replayed.
  if (doc.is_object() && doc.contains("command") && doc.contains("config")) {
    return parse_run_config(doc.at("config"));
  }
  return parse_run_config(doc);
}

}  // namespace hmfmd
