#include "lgp/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "http.hpp"
#include "lgp/error.hpp"
#include "lgp/rng.hpp"

namespace lgp {
namespace {

// Components uniform in [-0.5, 0.5] / sqrt(d), drawn from a counter-based
// stream keyed by the hash.
Vec hashed_vector(std::uint64_t h, std::size_t dim) {
  Vec out(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    const std::uint64_t r = mix64(h ^ mix64(k + 1));
    out[k] = (static_cast<double>(r >> 11) * 0x1.0p-53 - 0.5) * scale;
  }
  return out;
}

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

Mat parse_hidden(const nlohmann::json& h, std::size_t dim, std::size_t mask_count,
                 const std::string& where) {
  if (!h.is_array() || h.size() != mask_count) {
    throw FormatError(where + ": expected " + std::to_string(mask_count) + " mask rows");
  }
  Mat out(mask_count, dim);
  for (std::size_t j = 0; j < mask_count; ++j) {
    const auto& row = h[j];
    if (!row.is_array() || row.size() != dim) {
      throw FormatError(where + ": mask row " + std::to_string(j) + " has length " +
                        std::to_string(row.is_array() ? row.size() : 0) + ", header says d=" +
                        std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!row[k].is_number()) throw FormatError(where + ": non-numeric hidden value");
      const double v = to_f32(row[k].get<double>());
      if (!std::isfinite(v)) throw FormatError(where + ": non-finite hidden value");
      out(j, k) = v;
    }
  }
  return out;
}

}  // namespace

TokenState parse_token_state(std::string_view s) {
  if (s == "fixed") return TokenState::fixed;
  if (s == "learnable") return TokenState::learnable;
  throw ValidationError("token_state must be 'fixed' or 'learnable', got '" + std::string(s) + "'");
}

std::string to_string(TokenState s) { return s == TokenState::fixed ? "fixed" : "learnable"; }

StubEncoder::StubEncoder(std::size_t dim, std::size_t mask_count, std::uint64_t seed,
                         TokenState state)
    : dim_(dim), mask_count_(mask_count), seed_(seed), state_(state) {
  if (dim == 0 || mask_count == 0) throw InvalidArgument("stub encoder needs d >= 1 and m >= 1");
  Vec mask(mask_count * dim);
  for (std::size_t j = 0; j < mask_count; ++j) {
    const Vec u = hashed_vector(hash_seeded(seed, "mask/" + std::to_string(j + 1)), dim);
    std::copy(u.begin(), u.end(), mask.begin() + static_cast<std::ptrdiff_t>(j * dim));
  }
  params_.emplace(std::string(kMaskParam), std::move(mask));
}

Vec StubEncoder::base_embedding(std::string_view token) const {
  return hashed_vector(hash_seeded(seed_, token), dim_);
}

Vec StubEncoder::token_embedding(std::string_view token) const {
  Vec e = base_embedding(token);
  auto it = params_.find(std::string(kTokenPrefix) + std::string(token));
  if (it != params_.end()) {
    for (std::size_t k = 0; k < dim_; ++k) e[k] += it->second[k];
  }
  return e;
}

std::span<const double> StubEncoder::mask_token(std::size_t j) const {
  return std::span<const double>(params_.at(std::string(kMaskParam))).subspan(j * dim_, dim_);
}

void StubEncoder::check_prompt(const RenderedPrompt& prompt) const {
  if (prompt.mask_positions.size() != mask_count_) {
    throw ShapeError("prompt has " + std::to_string(prompt.mask_positions.size()) +
                     " mask slots, encoder expects " + std::to_string(mask_count_));
  }
}

Mat StubEncoder::encode(const RenderedPrompt& prompt) const {
  check_prompt(prompt);
  Vec context(dim_, 0.0);
  std::size_t n = 0;
  for (const auto& tok : prompt.tokens) {
    if (is_mask_sentinel(tok)) continue;
    const Vec e = token_embedding(tok);
    for (std::size_t k = 0; k < dim_; ++k) context[k] += e[k];
    ++n;
  }
  if (n > 0) {
    for (double& v : context) v /= static_cast<double>(n);
  }
  Mat h(mask_count_, dim_);
  for (std::size_t j = 0; j < mask_count_; ++j) {
    const auto u = mask_token(j);
    for (std::size_t k = 0; k < dim_; ++k) h(j, k) = u[k] + context[k];
  }
  return h;
}

ParamMap StubEncoder::grad(const RenderedPrompt& prompt, const Mat& dloss_dh) const {
  check_prompt(prompt);
  if (dloss_dh.rows() != mask_count_ || dloss_dh.cols() != dim_) {
    throw ShapeError("dL/dh must be " + std::to_string(mask_count_) + "x" + std::to_string(dim_));
  }
  ParamMap out;
  out.emplace(std::string(kMaskParam), dloss_dh.values());
  if (state_ == TokenState::fixed) return out;

  std::size_t n = 0;
  for (const auto& tok : prompt.tokens) n += !is_mask_sentinel(tok);
  if (n == 0) return out;
  Vec row_sum(dim_, 0.0);
  for (std::size_t j = 0; j < mask_count_; ++j) {
    const auto r = dloss_dh.row(j);
    for (std::size_t k = 0; k < dim_; ++k) row_sum[k] += r[k];
  }
  const double scale = 1.0 / static_cast<double>(n);
  for (const auto& tok : prompt.tokens) {
    if (is_mask_sentinel(tok)) continue;
    auto [it, _] = out.try_emplace(std::string(kTokenPrefix) + tok, Vec(dim_, 0.0));
    for (std::size_t k = 0; k < dim_; ++k) it->second[k] += scale * row_sum[k];
  }
  return out;
}

EmbeddingStore store_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedding store " + path);
  EmbeddingStore store;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || j.value("format", "") != kEmbedFormat || j.value("version", 0) != 1) {
        throw FormatError(where + ": header must be {\"format\":\"lgp-embed\",\"version\":1,...}");
      }
      const auto d = j.value("d", 0LL);
      const auto m = j.value("m", 0LL);
      if (d < 1 || m < 1) throw FormatError(where + ": header d and m must be positive");
      store.dim = static_cast<std::size_t>(d);
      store.mask_count = static_cast<std::size_t>(m);
      store.encoder = j.value("encoder", "");
      have_header = true;
      continue;
    }
    if (!j.is_object() || !j.contains("key") || !j["key"].is_string() || !j.contains("h")) {
      throw FormatError(where + ": record needs \"key\" and \"h\"");
    }
    auto key = j["key"].get<std::string>();
    Mat h = parse_hidden(j["h"], store.dim, store.mask_count, where);
    if (!store.records.emplace(key, std::move(h)).second) {
      throw FormatError(where + ": duplicate key " + key);
    }
  }
  if (!have_header) throw FormatError(path + ": missing lgp-embed header");
  return store;
}

void store_save(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write embedding store " + path);
  nlohmann::json header = {{"format", kEmbedFormat},
                           {"version", 1},
                           {"d", store.dim},
                           {"m", store.mask_count},
                           {"encoder", store.encoder}};
  out << header.dump() << '\n';
  std::vector<std::string> keys;
  for (const auto& [k, _] : store.records) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) {
    const Mat& h = store.records.at(k);
    if (h.rows() != store.mask_count || h.cols() != store.dim) {
      throw ShapeError("record " + k + " does not match the store's d and m");
    }
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t j = 0; j < h.rows(); ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : h.row(j)) row.push_back(static_cast<float>(v));
      rows.push_back(std::move(row));
    }
    out << nlohmann::json{{"key", k}, {"h", std::move(rows)}}.dump() << '\n';
  }
}

const Mat& store_lookup(const EmbeddingStore& store, std::string_view key) {
  auto it = store.records.find(std::string(key));
  if (it == store.records.end()) {
    throw LookupMiss("no embedding for prompt key " + std::string(key));
  }
  return it->second;
}

StoreEncoder::StoreEncoder(std::shared_ptr<const EmbeddingStore> store) : store_(std::move(store)) {
  if (!store_) throw InvalidArgument("StoreEncoder needs a store");
}

Mat StoreEncoder::encode(const RenderedPrompt& prompt) const {
  if (prompt.mask_positions.size() != store_->mask_count) {
    throw ShapeError("prompt mask count does not match the embedding store");
  }
  return store_lookup(*store_, prompt.key);
}

bool StoreEncoder::contains(std::string_view key) const {
  return store_->records.count(std::string(key)) > 0;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ValidationError("URL without scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

RemoteEncoder::RemoteEncoder(std::string url, std::size_t dim, std::size_t mask_count, double timeout_s)
    : url_(std::move(url)), dim_(dim), mask_count_(mask_count), timeout_s_(timeout_s) {
  split_url(url_);
}

Mat RemoteEncoder::encode(const RenderedPrompt& prompt) const {
  if (prompt.mask_positions.size() != mask_count_) {
    throw ShapeError("prompt mask count does not match the remote encoder");
  }
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(prompt.key); it != cache_.end()) return it->second;
  }
  const nlohmann::json body = {{"key", prompt.key},
                               {"canonical_text", prompt.canonical_text},
                               {"tokens", prompt.tokens},
                               {"mask_positions", prompt.mask_positions}};
  const auto reply = detail::post_json(url_, body.dump(), {}, timeout_s_);
  {
    std::lock_guard lock(mu_);
    ++requests_;
  }
  if (reply.status < 200 || reply.status >= 300) {
    throw RemoteError("encoder endpoint " + url_ + " returned HTTP " + std::to_string(reply.status));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.body);
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError("encoder endpoint returned invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("h")) throw RemoteError("encoder reply lacks \"h\"");
  Mat h;
  try {
    h = parse_hidden(j["h"], dim_, mask_count_, "encoder reply");
  } catch (const FormatError& e) {
    throw RemoteError(e.what());
  }
  std::lock_guard lock(mu_);
  return cache_.emplace(prompt.key, std::move(h)).first->second;
}

std::size_t RemoteEncoder::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

}  // namespace lgp
