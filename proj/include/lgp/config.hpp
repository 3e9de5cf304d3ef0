#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "lgp/descriptions.hpp"
#include "lgp/encoder.hpp"
#include "lgp/episodes.hpp"
#include "lgp/inference.hpp"
#include "lgp/optimizer.hpp"
#include "lgp/prompts.hpp"

namespace lgp {

enum class EncoderKind { stub, store, remote };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::stub;
  std::size_t dim = 32;
  std::size_t mask_count = 3;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  TokenState token_state = TokenState::fixed;
  std::string store;  // embedding export file (kind = store)
  std::string url;    // encoder endpoint (kind = remote)
};

struct ProtocolConfig {
  EpisodeShape shape;
  std::size_t train_episodes = 800;
  std::size_t eval_episodes = 600;
  std::size_t val_episodes = 100;
  std::size_t epochs = 5;
  std::string split_part = "test";
};

struct DescriptionConfig {
  DescriptionMode mode = DescriptionMode::offline;
  std::string cache;
  RemoteChatConfig remote;
};

// One run's settings. Precedence: command-line flags > config file > defaults.
struct RunConfig {
  std::string corpus;
  std::string split;
  EncoderConfig encoder;
  std::string template_preset = "about-category";
  std::string template_file;
  DescriptionConfig descriptions;
  ProtocolConfig protocol;
  ThresholdParams threshold;
  Fallback fallback = Fallback::argmax;
  AdamWConfig optimizer;
  double sigma_eps = kDefaultSigmaEps;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out = "out";

  // Rejects unknown keys at every level (ValidationError).
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;

  // Range and consistency checks; does not touch the filesystem.
  void validate() const;
  // Template set from the preset or file, with mask_count checked against the encoder.
  TemplateSet templates() const;
  std::uint64_t encoder_seed() const { return encoder.seed.value_or(seed); }
};

}  // namespace lgp
