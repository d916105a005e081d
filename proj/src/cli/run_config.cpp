#include "affect/cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include "affect/core/error.hpp"

namespace affect::cli {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t positive_size(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < 1) throw ConfigError(key + " must be at least 1, got " + value);
  return static_cast<std::size_t>(v);
}

double in_range(const std::string& key, const std::string& value, double lo, double hi, bool lo_open) {
  const double v = parse_double(key, value);
  if (!(lo_open ? v > lo : v >= lo) || !(v <= hi)) {
    throw ConfigError(key + " must lie in " + (lo_open ? "(" : "[") + shortest(lo) + ", " + shortest(hi) +
                      "], got " + value);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key + " must be true or false, got '" + value + "'");
}

}  // namespace

RunConfig parse_run_config(const KeyValues& kv) {
  RunConfig c;
  auto& feat = c.cascade.stage1.features;
  auto& tr = c.cascade.train;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"seg_seconds", [&](auto& k, auto& v) { feat.seg_seconds = in_range(k, v, 0.0, 3600.0, true); }},
      {"n_fft",
       [&](auto& k, auto& v) {
         feat.n_fft = positive_size(k, v);
         if ((feat.n_fft & (feat.n_fft - 1)) != 0) throw ConfigError("n_fft must be a power of two, got " + v);
       }},
      {"hop", [&](auto& k, auto& v) { feat.hop = positive_size(k, v); }},
      {"n_mels", [&](auto& k, auto& v) { feat.n_mels = positive_size(k, v); }},
      {"resize", [&](auto& k, auto& v) { c.resize = positive_size(k, v); }},
      {"stage1_input",
       [&](auto& k, auto& v) {
         if (v != "logmel" && v != "resized") throw ConfigError(k + " must be logmel or resized, got '" + v + "'");
         c.stage1_resized = v == "resized";
       }},
      {"gallery_threshold", [&](auto& k, auto& v) { c.gallery_threshold = in_range(k, v, 0.0, 2.0, true); }},
      {"stage1_rule", [&](auto&, auto& v) { c.cascade.stage1.rule = cascade::parse_stage1_rule(v); }},
      {"stage1_threshold", [&](auto& k, auto& v) { c.cascade.stage1.threshold = in_range(k, v, 0.0, 1.0, true); }},
      {"stage2_every_n_frames", [&](auto& k, auto& v) { c.cascade.stage2.every_n_frames = positive_size(k, v); }},
      {"stage2_threshold", [&](auto& k, auto& v) { c.cascade.stage2.threshold = in_range(k, v, 0.0, 1.0, true); }},
      {"f1_average", [&](auto&, auto& v) { c.f1_average = metrics::parse_f1_average(v); }},
      {"auc_level", [&](auto&, auto& v) { c.auc_level = metrics::parse_auc_level(v); }},
      {"balance", [&](auto&, auto& v) { c.cascade.balance = cascade::parse_balance(v); }},
      {"batch_size", [&](auto& k, auto& v) { tr.batch_size = positive_size(k, v); }},
      {"epochs", [&](auto& k, auto& v) { tr.epochs = positive_size(k, v); }},
      {"learning_rate", [&](auto& k, auto& v) { tr.learning_rate = in_range(k, v, 0.0, 1e6, true); }},
      {"lr_decay_factor", [&](auto& k, auto& v) { tr.lr_decay_factor = in_range(k, v, 0.0, 1.0, true); }},
      {"lr_decay_every", [&](auto& k, auto& v) { tr.lr_decay_every = positive_size(k, v); }},
      {"optimizer", [&](auto&, auto& v) { tr.optimizer = inference::parse_optimizer(v); }},
      {"augment",
       [&](auto& k, auto& v) {
         if (parse_bool(k, v)) {
           c.cascade.augment = vision::AugmentParams{};
         } else {
           c.cascade.augment.reset();
         }
       }},
      {"noise_reduction_db", [&](auto& k, auto& v) { feat.noise_reduction_db = in_range(k, v, 0.0, 200.0, false); }},
      {"silence_gate_db", [&](auto& k, auto& v) { feat.silence_gate_db = in_range(k, v, -200.0, 0.0, false); }},
      {"min_silence_ms", [&](auto& k, auto& v) { feat.min_silence_ms = in_range(k, v, 0.0, 1e7, false); }},
      {"seed",
       [&](auto& k, auto& v) {
         const long long s = parse_int(k, v);
         if (s < 0) throw ConfigError("seed must be non-negative, got " + v);
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (!kv.count("seed")) throw ConfigError("missing required config key 'seed'");
  tr.seed = c.seed;
  feat.resize = c.stage1_resized ? c.resize : 0;
  tr.validate();
  return c;
}

KeyValues run_config_values(const RunConfig& c) {
  const auto& feat = c.cascade.stage1.features;
  const auto& tr = c.cascade.train;
  KeyValues kv;
  kv["seg_seconds"] = shortest(feat.seg_seconds);
  kv["n_fft"] = std::to_string(feat.n_fft);
  kv["hop"] = std::to_string(feat.hop);
  kv["n_mels"] = std::to_string(feat.n_mels);
  kv["resize"] = std::to_string(c.resize);
  kv["stage1_input"] = c.stage1_resized ? "resized" : "logmel";
  kv["gallery_threshold"] = shortest(c.gallery_threshold);
  kv["stage1_rule"] = std::string(cascade::to_string(c.cascade.stage1.rule));
  kv["stage1_threshold"] = shortest(c.cascade.stage1.threshold);
  kv["stage2_every_n_frames"] = std::to_string(c.cascade.stage2.every_n_frames);
  kv["stage2_threshold"] = shortest(c.cascade.stage2.threshold);
  kv["f1_average"] = std::string(metrics::to_string(c.f1_average));
  kv["auc_level"] = std::string(metrics::to_string(c.auc_level));
  kv["balance"] = std::string(cascade::to_string(c.cascade.balance));
  kv["batch_size"] = std::to_string(tr.batch_size);
  kv["epochs"] = std::to_string(tr.epochs);
  kv["learning_rate"] = shortest(tr.learning_rate);
  kv["lr_decay_factor"] = shortest(tr.lr_decay_factor);
  kv["lr_decay_every"] = std::to_string(tr.lr_decay_every);
  kv["optimizer"] = std::string(inference::to_string(tr.optimizer));
  kv["augment"] = c.cascade.augment ? "true" : "false";
  kv["noise_reduction_db"] = shortest(feat.noise_reduction_db);
  kv["silence_gate_db"] = shortest(feat.silence_gate_db);
  kv["min_silence_ms"] = shortest(feat.min_silence_ms);
  kv["seed"] = std::to_string(c.seed);
  return kv;
}

}  // namespace affect::cli
