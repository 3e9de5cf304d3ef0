#include "lgp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "lgp/error.hpp"

namespace lgp {
namespace {

using nlohmann::json;

void only_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items()) {
    if (!ok.count(k)) throw ValidationError(std::string("unknown key '") + k + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "stub") return EncoderKind::stub;
  if (s == "store") return EncoderKind::store;
  if (s == "remote") return EncoderKind::remote;
  throw ValidationError("encoder.kind must be stub, store or remote, got '" + s + "'");
}

const char* kind_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::stub: return "stub";
    case EncoderKind::store: return "store";
    case EncoderKind::remote: return "remote";
  }
  return "?";
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  only_keys(j, "config", {"corpus", "split", "encoder", "templates", "descriptions", "protocol", "threshold",
                          "optimizer", "sigma_eps", "seed", "workers", "out"});
  RunConfig c;
  try {
    read(j, "corpus", c.corpus);
    read(j, "split", c.split);
    read(j, "sigma_eps", c.sigma_eps);
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    read(j, "out", c.out);
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      only_keys(e, "encoder", {"kind", "d", "m", "seed", "token_state", "store", "url"});
      if (e.contains("kind")) c.encoder.kind = parse_encoder_kind(e["kind"].get<std::string>());
      read(e, "d", c.encoder.dim);
      read(e, "m", c.encoder.mask_count);
      if (e.contains("seed") && !e["seed"].is_null()) c.encoder.seed = e["seed"].get<std::uint64_t>();
      if (e.contains("token_state")) c.encoder.token_state = parse_token_state(e["token_state"].get<std::string>());
      read(e, "store", c.encoder.store);
      read(e, "url", c.encoder.url);
    }
    if (j.contains("templates")) {
      const auto& t = j["templates"];
      only_keys(t, "templates", {"preset", "file"});
      read(t, "preset", c.template_preset);
      read(t, "file", c.template_file);
    }
    if (j.contains("descriptions")) {
      const auto& d = j["descriptions"];
      only_keys(d, "descriptions",
                {"mode", "cache", "url", "model", "auth_env", "temperature", "reply_path", "timeout_s"});
      if (d.contains("mode")) c.descriptions.mode = parse_description_mode(d["mode"].get<std::string>());
      read(d, "cache", c.descriptions.cache);
      read(d, "url", c.descriptions.remote.url);
      read(d, "model", c.descriptions.remote.model);
      read(d, "auth_env", c.descriptions.remote.auth_env);
      read(d, "temperature", c.descriptions.remote.temperature);
      read(d, "reply_path", c.descriptions.remote.reply_path);
      read(d, "timeout_s", c.descriptions.remote.timeout_s);
    }
    if (j.contains("protocol")) {
      const auto& p = j["protocol"];
      only_keys(p, "protocol", {"ways", "shots", "queries", "train_episodes", "eval_episodes", "val_episodes",
                                "epochs", "split_part"});
      read(p, "ways", c.protocol.shape.ways);
      read(p, "shots", c.protocol.shape.shots);
      read(p, "queries", c.protocol.shape.queries);
      read(p, "train_episodes", c.protocol.train_episodes);
      read(p, "eval_episodes", c.protocol.eval_episodes);
      read(p, "val_episodes", c.protocol.val_episodes);
      read(p, "epochs", c.protocol.epochs);
      read(p, "split_part", c.protocol.split_part);
    }
    if (j.contains("threshold")) {
      const auto& t = j["threshold"];
      only_keys(t, "threshold", {"alpha", "beta", "gamma", "fallback"});
      read(t, "alpha", c.threshold.alpha);
      read(t, "beta", c.threshold.beta);
      read(t, "gamma", c.threshold.gamma);
      if (t.contains("fallback")) c.fallback = parse_fallback(t["fallback"].get<std::string>());
    }
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      only_keys(o, "optimizer", {"lr", "beta1", "beta2", "eps", "weight_decay"});
      read(o, "lr", c.optimizer.lr);
      read(o, "beta1", c.optimizer.beta1);
      read(o, "beta2", c.optimizer.beta2);
      read(o, "eps", c.optimizer.eps);
      read(o, "weight_decay", c.optimizer.weight_decay);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json enc = {{"kind", kind_name(encoder.kind)},
              {"d", encoder.dim},
              {"m", encoder.mask_count},
              {"seed", encoder.seed ? json(*encoder.seed) : json(nullptr)},
              {"token_state", to_string(encoder.token_state)},
              {"store", encoder.store},
              {"url", encoder.url}};
  return {
      {"corpus", corpus},
      {"split", split},
      {"encoder", std::move(enc)},
      {"templates", {{"preset", template_preset}, {"file", template_file}}},
      {"descriptions",
       {{"mode", descriptions.mode == DescriptionMode::offline ? "offline" : "remote"},
        {"cache", descriptions.cache},
        {"url", descriptions.remote.url},
        {"model", descriptions.remote.model},
        {"auth_env", descriptions.remote.auth_env},
        {"temperature", descriptions.remote.temperature},
        {"reply_path", descriptions.remote.reply_path},
        {"timeout_s", descriptions.remote.timeout_s}}},
      {"protocol",
       {{"ways", protocol.shape.ways},
        {"shots", protocol.shape.shots},
        {"queries", protocol.shape.queries},
        {"train_episodes", protocol.train_episodes},
        {"eval_episodes", protocol.eval_episodes},
        {"val_episodes", protocol.val_episodes},
        {"epochs", protocol.epochs},
        {"split_part", protocol.split_part}}},
      {"threshold",
       {{"alpha", threshold.alpha},
        {"beta", threshold.beta},
        {"gamma", threshold.gamma},
        {"fallback", fallback == Fallback::argmax ? "argmax" : "none"}}},
      {"optimizer",
       {{"lr", optimizer.lr},
        {"beta1", optimizer.beta1},
        {"beta2", optimizer.beta2},
        {"eps", optimizer.eps},
        {"weight_decay", optimizer.weight_decay}}},
      {"sigma_eps", sigma_eps},
      {"seed", seed},
      {"workers", workers},
      {"out", out},
  };
}

void RunConfig::validate() const {
  check(encoder.dim >= 1, "encoder.d must be at least 1");
  check(encoder.mask_count >= 1, "encoder.m must be at least 1");
  check(encoder.kind != EncoderKind::store || !encoder.store.empty(), "encoder.store is required for kind=store");
  check(encoder.kind != EncoderKind::remote || !encoder.url.empty(), "encoder.url is required for kind=remote");
  check(protocol.shape.ways >= 1 && protocol.shape.shots >= 1 && protocol.shape.queries >= 1,
        "protocol ways, shots and queries must be at least 1");
  check(protocol.train_episodes >= 1 && protocol.eval_episodes >= 1, "episode counts must be at least 1");
  check(protocol.epochs >= 1, "protocol.epochs must be at least 1");
  check(protocol.split_part == "train" || protocol.split_part == "val" || protocol.split_part == "test",
        "protocol.split_part must be train, val or test");
  check(std::isfinite(threshold.alpha) && std::isfinite(threshold.beta) && std::isfinite(threshold.gamma),
        "threshold coefficients must be finite");
  check(optimizer.lr >= 0.0, "optimizer.lr must be non-negative");
  check(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0, "optimizer.beta1 must be in [0, 1)");
  check(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0, "optimizer.beta2 must be in [0, 1)");
  check(optimizer.eps > 0.0, "optimizer.eps must be positive");
  check(optimizer.weight_decay >= 0.0, "optimizer.weight_decay must be non-negative");
  check(sigma_eps > 0.0, "sigma_eps must be positive");
  check(workers >= 1, "workers must be at least 1");
  check(descriptions.mode != DescriptionMode::remote || !descriptions.remote.url.empty(),
        "descriptions.url is required for mode=remote");
  templates();
}

TemplateSet RunConfig::templates() const {
  TemplateSet t = template_file.empty() ? TemplateSet::preset(template_preset, encoder.mask_count)
                                        : TemplateSet::load(template_file);
  if (t.mask_count != encoder.mask_count) {
    throw ValidationError("template mask_count " + std::to_string(t.mask_count) + " differs from encoder.m " +
                          std::to_string(encoder.mask_count));
  }
  return t;
}

}  // namespace lgp
