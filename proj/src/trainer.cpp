#include "lgp/trainer.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "lgp/error.hpp"
#include "lgp/evaluate.hpp"
#include "lgp/model.hpp"
#include "lgp/pipeline.hpp"
#include "lgp/rng.hpp"

namespace lgp {
namespace {

void add_into(ParamMap& total, const ParamMap& part) {
  for (const auto& [name, g] : part) {
    auto [it, inserted] = total.try_emplace(name, g);
    if (!inserted) {
      for (std::size_t k = 0; k < g.size(); ++k) it->second[k] += g[k];
    }
  }
}

nlohmann::json params_to_json(const ParamMap& p) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, v] : p) out[name] = encode_f64_hex(v);
  return out;
}

ParamMap params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("checkpoint parameter block must be an object");
  ParamMap out;
  for (const auto& [name, hex] : j.items()) out.emplace(name, decode_f64_hex(hex.get<std::string>()));
  return out;
}

}  // namespace

nlohmann::json TrainConfig::to_json() const {
  return {{"ways", shape.ways},
          {"shots", shape.shots},
          {"queries", shape.queries},
          {"epochs", epochs},
          {"tasks_per_epoch", tasks_per_epoch},
          {"val_episodes", val_episodes},
          {"lr", optimizer.lr},
          {"beta1", optimizer.beta1},
          {"beta2", optimizer.beta2},
          {"eps_opt", optimizer.eps},
          {"weight_decay", optimizer.weight_decay},
          {"alpha", threshold.alpha},
          {"beta", threshold.beta},
          {"gamma", threshold.gamma},
          {"seed", seed}};
}

std::string encode_f64_hex(std::span<const double> values) {
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int byte = 0; byte < 8; ++byte) {
      const auto b = static_cast<unsigned>((bits >> (8 * byte)) & 0xFF);
      out.push_back(hex[b >> 4]);
      out.push_back(hex[b & 0xF]);
    }
  }
  return out;
}

Vec decode_f64_hex(std::string_view hex) {
  if (hex.size() % 16 != 0) throw FormatError("hex blob length is not a multiple of 16");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    throw FormatError("invalid hex digit in parameter blob");
  };
  Vec out(hex.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int byte = 0; byte < 8; ++byte) {
      const std::size_t at = i * 16 + static_cast<std::size_t>(byte) * 2;
      const std::uint64_t b = (nibble(hex[at]) << 4) | nibble(hex[at + 1]);
      bits |= b << (8 * byte);
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

Checkpoint snapshot(const StubEncoder& encoder, const AdamWState& optimizer) {
  Checkpoint c;
  c.dim = encoder.dim();
  c.mask_count = encoder.mask_count();
  c.encoder_seed = encoder.seed();
  c.token_state = encoder.token_state();
  c.params = encoder.parameters();
  c.optimizer = optimizer;
  return c;
}

void require_compatible(const Checkpoint& ckpt, std::size_t dim, std::size_t mask_count) {
  if (ckpt.dim != dim || ckpt.mask_count != mask_count) {
    throw FormatError("checkpoint has d=" + std::to_string(ckpt.dim) + ", m=" +
                      std::to_string(ckpt.mask_count) + "; configuration expects d=" +
                      std::to_string(dim) + ", m=" + std::to_string(mask_count));
  }
}

StubEncoder encoder_from_checkpoint(const Checkpoint& ckpt) {
  StubEncoder enc(ckpt.dim, ckpt.mask_count, ckpt.encoder_seed, ckpt.token_state);
  enc.parameters() = ckpt.params;
  return enc;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json moments = nlohmann::json::object();
  moments["first"] = params_to_json(ckpt.optimizer.first_moment);
  moments["second"] = params_to_json(ckpt.optimizer.second_moment);
  const nlohmann::json j = {
      {"format", kCheckpointFormat},
      {"version", 1},
      {"d", ckpt.dim},
      {"m", ckpt.mask_count},
      {"encoder_seed", ckpt.encoder_seed},
      {"token_state", to_string(ckpt.token_state)},
      {"params", params_to_json(ckpt.params)},
      {"optimizer", {{"step", ckpt.optimizer.step}, {"moments", std::move(moments)}}},
      {"config", ckpt.config},
      {"epoch", ckpt.epoch},
      {"seed", ckpt.seed},
      {"val_f1", ckpt.val_f1 ? nlohmann::json(encode_f64_hex(std::span(&*ckpt.val_f1, 1)))
                             : nlohmann::json(nullptr)},
  };
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write checkpoint " + path);
    out << j.dump(1) << '\n';
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot replace checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  Checkpoint c;
  try {
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != kCheckpointFormat || j.value("version", 0) != 1) {
      throw FormatError(path + ": not an lgp-ckpt version 1 file");
    }
    c.dim = j.at("d").get<std::size_t>();
    c.mask_count = j.at("m").get<std::size_t>();
    c.encoder_seed = j.at("encoder_seed").get<std::uint64_t>();
    c.token_state = parse_token_state(j.at("token_state").get<std::string>());
    c.params = params_from_json(j.at("params"));
    c.optimizer.step = j.at("optimizer").at("step").get<std::uint64_t>();
    c.optimizer.first_moment = params_from_json(j.at("optimizer").at("moments").at("first"));
    c.optimizer.second_moment = params_from_json(j.at("optimizer").at("moments").at("second"));
    c.config = j.value("config", nlohmann::json::object());
    c.epoch = j.at("epoch").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("val_f1").is_null()) c.val_f1 = decode_f64_hex(j["val_f1"].get<std::string>()).at(0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (c.dim == 0 || c.mask_count == 0) throw FormatError(path + ": d and m must be positive");
  for (const auto& [name, v] : c.params) {
    const std::size_t want = name == StubEncoder::kMaskParam ? c.dim * c.mask_count : c.dim;
    if (!name.starts_with(StubEncoder::kTokenPrefix) && name != StubEncoder::kMaskParam) {
      throw FormatError(path + ": unknown parameter '" + name + "'");
    }
    if (v.size() != want) {
      throw FormatError(path + ": parameter '" + name + "' has " + std::to_string(v.size()) +
                        " values, header implies " + std::to_string(want));
    }
  }
  if (!c.params.count(std::string(StubEncoder::kMaskParam))) throw FormatError(path + ": missing mask tokens");
  for (const auto* moments : {&c.optimizer.first_moment, &c.optimizer.second_moment}) {
    for (const auto& [name, v] : *moments) {
      auto it = c.params.find(name);
      if (it == c.params.end() || it->second.size() != v.size()) {
        throw FormatError(path + ": optimizer moment '" + name + "' does not match a parameter");
      }
    }
  }
  return c;
}

Trainer::Trainer(StubEncoder& encoder, TemplateSet templates, DescriptionProvider& descriptions,
                 AdamWConfig optimizer, double eps)
    : encoder_(encoder),
      templates_(std::move(templates)),
      descriptions_(descriptions),
      optimizer_(optimizer),
      eps_(eps) {}

ParamMap Trainer::parameter_gradient(const Episode& ep, const Corpus& corpus, double* loss) const {
  const Pipeline pipeline(templates_, encoder_, descriptions_, eps_);
  const auto enc = pipeline.encode(ep, corpus);
  const auto fwd = lgp::forward(enc.inputs, eps_);
  if (loss) *loss = fwd.loss;
  if (!std::isfinite(fwd.loss)) return {};
  const auto g = backward(enc.inputs, fwd, eps_);

  const std::size_t m = encoder_.mask_count();
  ParamMap total;
  for (std::size_t i = 0; i < enc.support_prompts.size(); ++i) {
    for (std::size_t k = 0; k < enc.support_prompts[i].size(); ++k) {
      add_into(total, encoder_.grad(enc.support_prompts[i][k], pooled_row_gradient(g.support[i].row(k), m)));
    }
    add_into(total, encoder_.grad(enc.description_prompts[i], pooled_row_gradient(g.descriptions[i], m)));
  }
  for (std::size_t q = 0; q < enc.query_prompts.size(); ++q) {
    add_into(total, encoder_.grad(enc.query_prompts[q], pooled_row_gradient(g.queries[q], m)));
  }
  return total;
}

double Trainer::step(const Episode& ep, const Corpus& corpus) {
  double loss = 0.0;
  const ParamMap grads = parameter_gradient(ep, corpus, &loss);
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite episode loss (" + std::to_string(loss) + ") at optimizer step " +
                       std::to_string(state_.step + 1) + "; classes: " +
                       [&] {
                         std::string s;
                         for (const auto& c : ep.classes) s += (s.empty() ? "" : ",") + c;
                         return s;
                       }());
  }
  auto& params = encoder_.parameters();
  for (const auto& [name, g] : grads) params.try_emplace(name, Vec(g.size(), 0.0));
  adamw_step(optimizer_, params, grads, state_);
  return loss;
}

std::uint64_t train_stream_seed(std::uint64_t seed, std::size_t epoch) {
  return mix64(seed ^ mix64(0x7472616E ^ epoch));
}

std::uint64_t val_stream_seed(std::uint64_t seed) { return mix64(seed ^ mix64(0x76616C)); }

TrainResult train(StubEncoder& encoder, const TemplateSet& templates, DescriptionProvider& descriptions,
                  const Corpus& corpus, const SplitSpec& split, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  if (config.epochs == 0 || config.tasks_per_epoch == 0) {
    throw ValidationError("training needs epochs >= 1 and tasks_per_epoch >= 1");
  }
  Trainer trainer(encoder, templates, descriptions, config.optimizer, config.eps);
  TrainResult result;
  result.best = snapshot(encoder, trainer.optimizer_state());
  result.best.config = config.to_json();
  result.best.seed = config.seed;

  const Protocol val_protocol{config.shape, config.val_episodes, val_stream_seed(config.seed), "val"};
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const EpisodeStream stream(train_stream_seed(config.seed, epoch), corpus, split.train, config.shape,
                               config.tasks_per_epoch);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < stream.size(); ++i) loss_sum += trainer.step(stream.at(i), corpus);

    EpochLog log;
    log.epoch = epoch;
    log.mean_loss = loss_sum / static_cast<double>(stream.size());
    std::optional<double> val_f1;
    if (config.val_episodes > 0) {
      const Pipeline pipeline(templates, encoder, descriptions, config.eps);
      const Report r = evaluate(pipeline, corpus, split.val, val_protocol, config.threshold,
                                config.fallback, config.workers);
      log.val_f1 = r.macro_f1;
      log.val_auc = r.auc;
      val_f1 = r.macro_f1;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    // Without validation the latest epoch wins.
    if (!val_f1 || !result.best.val_f1 || *val_f1 > *result.best.val_f1) {
      result.best = snapshot(encoder, trainer.optimizer_state());
      result.best.config = config.to_json();
      result.best.seed = config.seed;
      result.best.epoch = epoch;
      result.best.val_f1 = val_f1;
    }
  }
  return result;
}

}  // namespace lgp
