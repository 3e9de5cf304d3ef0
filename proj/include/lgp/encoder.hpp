#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lgp/numerics.hpp"
#include "lgp/prompts.hpp"

namespace lgp {

// Maps a rendered prompt to the m x d hidden states at its mask positions.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual Mat encode(const RenderedPrompt& prompt) const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t mask_count() const = 0;
  virtual std::string name() const = 0;
};

enum class TokenState { fixed, learnable };

TokenState parse_token_state(std::string_view s);
std::string to_string(TokenState s);

// Test-vehicle encoder: row j of the output is u_j plus the mean embedding of
// the prompt's non-mask tokens. Token embeddings are hash-seeded and, in the
// learnable state, carry a trainable additive offset.
class StubEncoder final : public Encoder {
 public:
  static constexpr std::string_view kMaskParam = "mask";
  static constexpr std::string_view kTokenPrefix = "token:";

  StubEncoder(std::size_t dim, std::size_t mask_count, std::uint64_t seed,
              TokenState state = TokenState::fixed);

  Mat encode(const RenderedPrompt& prompt) const override;
  std::size_t dim() const override { return dim_; }
  std::size_t mask_count() const override { return mask_count_; }
  std::string name() const override { return "stub"; }

  // Gradient of a loss w.r.t. the trainable parameters given dL/dh (m x d).
  // Keys follow parameters(): "mask" and, when learnable, "token:<tok>".
  ParamMap grad(const RenderedPrompt& prompt, const Mat& dloss_dh) const;

  Vec base_embedding(std::string_view token) const;
  Vec token_embedding(std::string_view token) const;
  std::span<const double> mask_token(std::size_t j) const;

  std::uint64_t seed() const { return seed_; }
  TokenState token_state() const { return state_; }

  ParamMap& parameters() { return params_; }
  const ParamMap& parameters() const { return params_; }

 private:
  void check_prompt(const RenderedPrompt& prompt) const;

  std::size_t dim_;
  std::size_t mask_count_;
  std::uint64_t seed_;
  TokenState state_;
  ParamMap params_;
};

struct EmbeddingStore {
  std::size_t dim = 0;
  std::size_t mask_count = 0;
  std::string encoder;
  std::unordered_map<std::string, Mat> records;
};

inline constexpr std::string_view kEmbedFormat = "lgp-embed";

// Values are stored as f32; loading narrows then widens so an in-memory store
// compares equal to what a reader sees.
EmbeddingStore store_load(const std::string& path);
void store_save(const std::string& path, const EmbeddingStore& store);
const Mat& store_lookup(const EmbeddingStore& store, std::string_view key);

class StoreEncoder final : public Encoder {
 public:
  explicit StoreEncoder(std::shared_ptr<const EmbeddingStore> store);

  Mat encode(const RenderedPrompt& prompt) const override;
  std::size_t dim() const override { return store_->dim; }
  std::size_t mask_count() const override { return store_->mask_count; }
  std::string name() const override { return "store:" + store_->encoder; }

  bool contains(std::string_view key) const;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
};

// Posts {"key","canonical_text","tokens","mask_positions"} to an HTTP
// endpoint and expects {"h": [[...] x m]} back. Replies are cached by key.
class RemoteEncoder final : public Encoder {
 public:
  RemoteEncoder(std::string url, std::size_t dim, std::size_t mask_count, double timeout_s = 30.0);

  Mat encode(const RenderedPrompt& prompt) const override;
  std::size_t dim() const override { return dim_; }
  std::size_t mask_count() const override { return mask_count_; }
  std::string name() const override { return "remote:" + url_; }

  std::size_t requests() const;

 private:
  std::string url_;
  std::size_t dim_;
  std::size_t mask_count_;
  double timeout_s_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, Mat> cache_;
  mutable std::size_t requests_ = 0;
};

// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace lgp
