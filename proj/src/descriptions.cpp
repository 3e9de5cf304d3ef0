#include "lgp/descriptions.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "http.hpp"
#include "lgp/error.hpp"

namespace lgp {

DescriptionMode parse_description_mode(std::string_view s) {
  if (s == "offline") return DescriptionMode::offline;
  if (s == "remote") return DescriptionMode::remote;
  throw ValidationError("description mode must be 'offline' or 'remote', got '" + std::string(s) + "'");
}

DescriptionProvider::DescriptionProvider(TemplateSet templates, DescriptionMode mode,
                                         RemoteChatConfig remote)
    : templates_(std::move(templates)), mode_(mode), remote_(std::move(remote)) {
  if (mode_ == DescriptionMode::remote && remote_.url.empty()) {
    throw ValidationError("remote description mode needs a url");
  }
}

std::string DescriptionProvider::offline_description(std::string_view label) {
  const std::string text = label_text(label);
  return "Category " + text + ": opinions concerning " + text + ".";
}

std::string DescriptionProvider::get(std::string_view label) {
  if (label.empty()) throw InvalidArgument("description requested for an empty label");
  // One lock across the fetch: remote calls are serialized and a label is
  // never fetched twice.
  std::lock_guard lock(mu_);
  if (auto it = cache_.find(label); it != cache_.end()) return it->second;
  std::string text = mode_ == DescriptionMode::offline ? offline_description(label) : fetch_remote(label);
  if (text.empty()) throw RemoteError("empty description for label " + std::string(label));
  ++generated_;
  order_.emplace_back(label);
  return cache_.emplace(std::string(label), std::move(text)).first->second;
}

std::string DescriptionProvider::fetch_remote(std::string_view label) {
  const std::string request = render_description_request(templates_, label);
  const nlohmann::json body = {
      {"model", remote_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request}}})},
      {"temperature", remote_.temperature},
  };
  std::vector<std::pair<std::string, std::string>> headers;
  if (!remote_.auth_env.empty()) {
    const char* token = std::getenv(remote_.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw RemoteError("auth token variable " + remote_.auth_env + " is not set");
    }
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  ++remote_requests_;
  const auto reply = detail::post_json(remote_.url, body.dump(), headers, remote_.timeout_s);
  if (reply.status < 200 || reply.status >= 300) {
    throw RemoteError("description endpoint returned HTTP " + std::to_string(reply.status) +
                      " for label " + std::string(label) + ": " + reply.body.substr(0, 200));
  }
  try {
    const auto j = nlohmann::json::parse(reply.body);
    const auto& content = j.at(nlohmann::json::json_pointer(remote_.reply_path));
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteError("description reply for label " + std::string(label) + " lacks " +
                      remote_.reply_path + ": " + e.what());
  }
}

std::size_t DescriptionProvider::load_cache(const std::string& path) {
  std::ifstream in(path);
  if (!in) return 0;
  std::lock_guard lock(mu_);
  std::string line;
  std::size_t lineno = 0;
  std::size_t added = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto label = j.at("label").get<std::string>();
      auto text = j.at("description").get<std::string>();
      if (label.empty() || text.empty()) throw ParseError("empty label or description");
      if (cache_.emplace(label, std::move(text)).second) {
        order_.push_back(std::move(label));
        ++added;
      }
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return added;
}

void DescriptionProvider::prime(std::string_view label, std::string description) {
  std::lock_guard lock(mu_);
  if (cache_.emplace(std::string(label), std::move(description)).second) order_.emplace_back(label);
}

void DescriptionProvider::save_cache(const std::string& path) const {
  std::lock_guard lock(mu_);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write description cache " + path);
    for (const auto& label : order_) {
      out << nlohmann::json{{"label", label}, {"description", cache_.at(label)}}.dump() << '\n';
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot replace " + path);
}

bool DescriptionProvider::cached(std::string_view label) const {
  std::lock_guard lock(mu_);
  return cache_.find(label) != cache_.end();
}

std::size_t DescriptionProvider::size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::size_t DescriptionProvider::remote_requests() const {
  std::lock_guard lock(mu_);
  return remote_requests_;
}

std::size_t DescriptionProvider::generated() const {
  std::lock_guard lock(mu_);
  return generated_;
}

}  // namespace lgp
