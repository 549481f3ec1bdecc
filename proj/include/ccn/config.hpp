#pragma once

// JSON experiment files for `ccn train` and `ccn sweep`. Keys are strict:
// anything unrecognized is a ConfigError. See docs/config.md.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccn/ccn_codec.hpp"
#include "ccn/channels.hpp"
#include "ccn/errors.hpp"
#include "ccn/model_io.hpp"
#include "ccn/reed_solomon.hpp"
#include "ccn/sim_harness.hpp"
#include "ccn/trainer.hpp"

namespace ccn {

using Json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_key(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config file " + path + ": " + e.what());
  }
}

inline ChannelKind channel_from(const std::string& s) {
  try {
    return parse_channel_kind(s);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace detail

// "a:step:b" (inclusive) or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto number = [&text](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw ConfigError("bad number '" + s + "' in grid '" + text + "'");
    return v;
  };
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
      throw ConfigError("grid '" + text + "' must look like start:step:stop");
    const double a = number(text.substr(0, c1));
    const double step = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double b = number(text.substr(c2 + 1));
    if (!(step > 0.0) || b < a) throw ConfigError("grid '" + text + "' needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(std::round((a + static_cast<double>(i) * step) * 1e9) / 1e9);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    out.push_back(number(text.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<double> grid_from_json(const Json& j) {
  if (j.is_string()) return parse_grid(j.get<std::string>());
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) {
      if (!v.is_number()) throw ConfigError("ebn0_db: list entries must be numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  throw ConfigError("ebn0_db: expected a list of numbers or a \"start:step:stop\" string");
}

struct TrainJob {
  TrainConfig config;
  std::string preset;     // "", "large_inner" or "reference_ae"
  std::string model_out;  // written after training
  std::string log_out;    // CSV log, optional
};

// Relative output paths resolve against `base_dir` when given.
inline TrainJob train_job_from_json(const Json& j, const std::string& base_dir = "") {
  detail::reject_unknown_keys(j,
                              {"preset", "k1", "n1", "channel", "burst_prob", "train_ebn0_db", "rate",
                               "samples_per_epoch", "epochs", "batch_size", "learning_rate", "seed", "eval_every",
                               "eval_trials", "log_every", "model_out", "log_out"},
                              "train config");
  TrainJob job;
  ChannelKind kind = ChannelKind::Awgn;
  if (j.contains("channel")) kind = detail::channel_from(j.at("channel").get<std::string>());
  detail::read_key(j, "preset", job.preset);
  if (job.preset == "large_inner") {
    job.config = TrainConfig::large_inner(kind);
  } else if (job.preset == "reference_ae") {
    job.config = TrainConfig::reference_ae(kind);
  } else if (job.preset.empty()) {
    job.config.channel = kind;
    job.config.train_ebn0_db = TrainConfig::default_train_ebn0_db(kind);
  } else {
    throw ConfigError("train config: unknown preset '" + job.preset + "'");
  }
  auto& c = job.config;
  detail::read_key(j, "k1", c.k1);
  detail::read_key(j, "n1", c.n1);
  detail::read_key(j, "burst_prob", c.burst_prob);
  detail::read_key(j, "train_ebn0_db", c.train_ebn0_db);
  detail::read_key(j, "rate", c.rate);
  detail::read_key(j, "samples_per_epoch", c.samples_per_epoch);
  detail::read_key(j, "epochs", c.epochs);
  detail::read_key(j, "batch_size", c.batch_size);
  detail::read_key(j, "learning_rate", c.learning_rate);
  detail::read_key(j, "seed", c.seed);
  detail::read_key(j, "eval_every", c.eval_every);
  detail::read_key(j, "eval_trials", c.eval_trials);
  detail::read_key(j, "log_every", c.log_every);
  detail::read_key(j, "model_out", job.model_out);
  detail::read_key(j, "log_out", job.log_out);
  for (auto* path : {&job.model_out, &job.log_out})
    if (!base_dir.empty() && !path->empty() && std::filesystem::path(*path).is_relative())
      *path = (std::filesystem::path(base_dir) / *path).lexically_normal().string();
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return job;
}

inline Json to_json(const TrainJob& job) {
  const auto& c = job.config;
  Json j;
  if (!job.preset.empty()) j["preset"] = job.preset;
  j["k1"] = c.k1;
  j["n1"] = c.n1;
  j["channel"] = to_string(c.channel);
  j["burst_prob"] = c.burst_prob;
  j["train_ebn0_db"] = c.train_ebn0_db;
  j["rate"] = c.effective_rate();
  j["samples_per_epoch"] = c.samples_per_epoch;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["eval_every"] = c.eval_every;
  j["eval_trials"] = c.eval_trials;
  j["log_every"] = c.log_every;
  if (!job.model_out.empty()) j["model_out"] = job.model_out;
  if (!job.log_out.empty()) j["log_out"] = job.log_out;
  return j;
}

// Sweep file: what to simulate, before any model is loaded.
struct SweepJob {
  std::string target = "ccn";  // "ccn" or "reference"
  std::string model;           // model file; relative paths resolve against the config file's directory
  std::size_t rs_k = 0;        // outer code dimension (ccn only); 0 means required
  std::vector<double> thresholds{0.0};
  ChannelKind channel = ChannelKind::Awgn;
  double burst_prob = 0.1;
  std::vector<double> ebn0_db;
  std::uint64_t min_block_errors = 100;
  std::uint64_t max_blocks = 1'000'000;
  std::uint64_t seed = 1;
  std::size_t noise_draws_per_block = 1;
  std::size_t reference_batch = 15;
  std::string normalization = "batch";  // "batch" or "frozen"
  double stop_below_bler = 0.0;
  std::size_t workers = 0;
};

inline SweepJob sweep_job_from_json(const Json& j, const std::string& base_dir = "") {
  detail::reject_unknown_keys(j,
                              {"target", "model", "rs_k", "thresholds", "channel", "burst_prob", "ebn0_db",
                               "min_block_errors", "max_blocks", "seed", "noise_draws_per_block", "reference_batch",
                               "normalization", "stop_below_bler", "workers"},
                              "sweep config");
  SweepJob s;
  detail::read_key(j, "target", s.target);
  detail::read_key(j, "model", s.model);
  detail::read_key(j, "rs_k", s.rs_k);
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    s.thresholds = t.is_number() ? std::vector<double>{t.get<double>()} : std::vector<double>{};
    if (t.is_array())
      for (const auto& v : t) s.thresholds.push_back(v.get<double>());
    if (s.thresholds.empty()) throw ConfigError("sweep config: thresholds must be a number or a non-empty list");
  }
  if (j.contains("channel")) s.channel = detail::channel_from(j.at("channel").get<std::string>());
  detail::read_key(j, "burst_prob", s.burst_prob);
  if (j.contains("ebn0_db")) s.ebn0_db = grid_from_json(j.at("ebn0_db"));
  detail::read_key(j, "min_block_errors", s.min_block_errors);
  detail::read_key(j, "max_blocks", s.max_blocks);
  detail::read_key(j, "seed", s.seed);
  detail::read_key(j, "noise_draws_per_block", s.noise_draws_per_block);
  detail::read_key(j, "reference_batch", s.reference_batch);
  detail::read_key(j, "normalization", s.normalization);
  detail::read_key(j, "stop_below_bler", s.stop_below_bler);
  detail::read_key(j, "workers", s.workers);

  if (s.target != "ccn" && s.target != "reference") throw ConfigError("sweep config: target must be 'ccn' or 'reference'");
  if (s.normalization != "batch" && s.normalization != "frozen")
    throw ConfigError("sweep config: normalization must be 'batch' or 'frozen'");
  if (s.model.empty()) throw ConfigError("sweep config: 'model' is required");
  if (s.target == "ccn" && s.rs_k == 0) throw ConfigError("sweep config: 'rs_k' is required for target 'ccn'");
  if (s.ebn0_db.empty()) throw ConfigError("sweep config: 'ebn0_db' is required");
  if (!base_dir.empty() && std::filesystem::path(s.model).is_relative())
    s.model = (std::filesystem::path(base_dir) / s.model).lexically_normal().string();
  return s;
}

inline Json to_json(const SweepJob& s) {
  Json j;
  j["target"] = s.target;
  j["model"] = s.model;
  if (s.target == "ccn") j["rs_k"] = s.rs_k;
  j["thresholds"] = s.thresholds;
  j["channel"] = to_string(s.channel);
  j["burst_prob"] = s.burst_prob;
  j["ebn0_db"] = s.ebn0_db;
  j["min_block_errors"] = s.min_block_errors;
  j["max_blocks"] = s.max_blocks;
  j["seed"] = s.seed;
  j["noise_draws_per_block"] = s.noise_draws_per_block;
  if (s.target == "reference") j["reference_batch"] = s.reference_batch;
  j["normalization"] = s.normalization;
  j["stop_below_bler"] = s.stop_below_bler;
  return j;
}

// Loads the model and assembles the harness configuration.
inline SweepConfig build_sweep_config(const SweepJob& s) {
  NeuralCodeModel model = load_model(s.model);
  const NormalizationMode mode = s.normalization == "frozen" ? NormalizationMode::Frozen : NormalizationMode::PerBatch;
  if (mode == NormalizationMode::Frozen && !model.frozen_stats)
    throw ConfigError("model " + s.model + " carries no frozen normalization statistics");
  SweepConfig c;
  try {
    if (s.target == "ccn") {
      if (model.k1 != 4 && model.k1 != 8)
        throw ConfigError("model " + s.model + ": k1 = " + std::to_string(model.k1) + " has no supported RS field");
      const GfField& field = model.k1 == 4 ? GfField::gf16() : GfField::gf256();
      c.code = CcnCode(RsCode(field, s.rs_k), std::move(model), 0.0, mode);
    } else {
      c.code = std::move(model);
    }
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  c.thresholds = s.thresholds;
  c.channel = s.channel;
  c.burst_prob = s.burst_prob;
  c.ebn0_grid_db = s.ebn0_db;
  c.min_block_errors = s.min_block_errors;
  c.max_blocks = s.max_blocks;
  c.seed = s.seed;
  c.noise_draws_per_block = s.noise_draws_per_block;
  c.reference_batch = s.reference_batch;
  c.reference_normalization = mode;
  c.stop_below_bler = s.stop_below_bler;
  c.workers = s.workers;
  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline TrainJob load_train_job(const std::string& path) {
  return train_job_from_json(detail::parse_json_file(path), std::filesystem::path(path).parent_path().string());
}

inline SweepJob load_sweep_job(const std::string& path) {
  return sweep_job_from_json(detail::parse_json_file(path), std::filesystem::path(path).parent_path().string());
}

}  // namespace ccn
