#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "lgp/prompts.hpp"

namespace lgp {

enum class DescriptionMode { offline, remote };

struct RemoteChatConfig {
  std::string url;                    // full endpoint, e.g. http://host:port/v1/chat/completions
  std::string model = "gpt-3.5-turbo";
  std::string auth_env;               // env var holding a bearer token; empty = no auth header
  double temperature = 0.0;
  std::string reply_path = "/choices/0/message/content";  // JSON pointer into the reply
  double timeout_s = 60.0;
};

// Resolves category labels to descriptions. A label, once resolved, is served
// verbatim from the cache. Thread-safe; remote fetches are serialized.
class DescriptionProvider {
 public:
  explicit DescriptionProvider(TemplateSet templates = {},
                               DescriptionMode mode = DescriptionMode::offline,
                               RemoteChatConfig remote = {});

  std::string get(std::string_view label);

  // Adds entries without overwriting existing labels; returns how many were new.
  std::size_t load_cache(const std::string& path);
  void prime(std::string_view label, std::string description);
  // Writes every cached entry in first-resolution order.
  void save_cache(const std::string& path) const;

  bool cached(std::string_view label) const;
  std::size_t size() const;
  std::size_t remote_requests() const;
  // Labels resolved by the offline generator or the remote endpoint (not the cache).
  std::size_t generated() const;

  static std::string offline_description(std::string_view label);

 private:
  std::string fetch_remote(std::string_view label);

  TemplateSet templates_;
  DescriptionMode mode_;
  RemoteChatConfig remote_;
  mutable std::mutex mu_;
  std::map<std::string, std::string, std::less<>> cache_;
  std::vector<std::string> order_;
  std::size_t remote_requests_ = 0;
  std::size_t generated_ = 0;
};

DescriptionMode parse_description_mode(std::string_view s);

}  // namespace lgp
