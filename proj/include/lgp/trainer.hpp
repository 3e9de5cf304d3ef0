#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lgp/descriptions.hpp"
#include "lgp/encoder.hpp"
#include "lgp/episodes.hpp"
#include "lgp/inference.hpp"
#include "lgp/optimizer.hpp"
#include "lgp/prompts.hpp"

namespace lgp {

struct TrainConfig {
  EpisodeShape shape;
  std::size_t epochs = 5;
  std::size_t tasks_per_epoch = 800;
  std::size_t val_episodes = 100;
  AdamWConfig optimizer;
  ThresholdParams threshold;
  Fallback fallback = Fallback::argmax;
  std::uint64_t seed = 0;
  double eps = kDefaultSigmaEps;
  std::size_t workers = 1;  // validation only

  nlohmann::json to_json() const;
};

struct Checkpoint {
  std::size_t dim = 0;
  std::size_t mask_count = 0;
  std::uint64_t encoder_seed = 0;
  TokenState token_state = TokenState::fixed;
  ParamMap params;
  AdamWState optimizer;
  nlohmann::json config = nlohmann::json::object();
  std::size_t epoch = 0;
  std::uint64_t seed = 0;
  std::optional<double> val_f1;
};

inline constexpr std::string_view kCheckpointFormat = "lgp-ckpt";

Checkpoint snapshot(const StubEncoder& encoder, const AdamWState& optimizer);
StubEncoder encoder_from_checkpoint(const Checkpoint& ckpt);
// Throws FormatError when the checkpoint's d or m differ from the expected ones.
void require_compatible(const Checkpoint& ckpt, std::size_t dim, std::size_t mask_count);

// f64 values are written as hex-encoded little-endian IEEE-754 bytes so the
// round trip is exact.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
std::string encode_f64_hex(std::span<const double> values);
Vec decode_f64_hex(std::string_view hex);

// Owns the optimizer state for one stub encoder; each step is one episode.
class Trainer {
 public:
  Trainer(StubEncoder& encoder, TemplateSet templates, DescriptionProvider& descriptions,
          AdamWConfig optimizer, double eps = kDefaultSigmaEps);

  // Forward, backward through the pooled mask rows into the stub encoder, one
  // optimizer update. Returns the episode loss; throws NumericError if it is
  // not finite.
  double step(const Episode& ep, const Corpus& corpus);

  // Gradient of the episode loss w.r.t. the encoder parameters (no update).
  ParamMap parameter_gradient(const Episode& ep, const Corpus& corpus, double* loss = nullptr) const;

  AdamWState& optimizer_state() { return state_; }
  const AdamWState& optimizer_state() const { return state_; }
  StubEncoder& encoder() { return encoder_; }

 private:
  StubEncoder& encoder_;
  TemplateSet templates_;
  DescriptionProvider& descriptions_;
  AdamWConfig optimizer_;
  double eps_;
  AdamWState state_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double val_f1 = 0.0;
  std::optional<double> val_auc;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Per-epoch stream seeds derive from config.seed; validation uses the same
// episodes every epoch. The best-by-validation-F1 snapshot is returned.
TrainResult train(StubEncoder& encoder, const TemplateSet& templates, DescriptionProvider& descriptions,
                  const Corpus& corpus, const SplitSpec& split, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

std::uint64_t train_stream_seed(std::uint64_t seed, std::size_t epoch);
std::uint64_t val_stream_seed(std::uint64_t seed);

}  // namespace lgp
