#include "lgp/episodes.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "lgp/error.hpp"

namespace lgp {

Corpus::Corpus(std::vector<Sentence> sentences) : sentences_(std::move(sentences)) {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    auto& s = sentences_[i];
    std::sort(s.labels.begin(), s.labels.end());
    s.labels.erase(std::unique(s.labels.begin(), s.labels.end()), s.labels.end());
    if (s.labels.empty()) throw ValidationError("sentence '" + s.id + "' has no labels");
    if (!by_id_.emplace(s.id, i).second) throw ValidationError("duplicate sentence id '" + s.id + "'");
    for (const auto& l : s.labels) by_label_[l].push_back(i);
  }
}

Corpus Corpus::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus " + path);
  std::vector<Sentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Sentence s;
      s.id = j.at("id").get<std::string>();
      s.text = j.at("text").get<std::string>();
      s.labels = j.at("labels").get<std::vector<std::string>>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return Corpus(std::move(out));
}

void Corpus::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus " + path);
  for (const auto& s : sentences_) {
    out << nlohmann::json{{"id", s.id}, {"text", s.text}, {"labels", s.labels}}.dump() << '\n';
  }
}

std::vector<std::string> Corpus::labels() const {
  std::vector<std::string> out;
  out.reserve(by_label_.size());
  for (const auto& [l, _] : by_label_) out.push_back(l);
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::size_t>& Corpus::with_label(std::string_view label) const {
  static const std::vector<std::size_t> none;
  auto it = by_label_.find(std::string(label));
  return it == by_label_.end() ? none : it->second;
}

std::size_t Corpus::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) throw InvalidArgument("unknown sentence id '" + std::string(id) + "'");
  return it->second;
}

void SplitSpec::validate() const {
  std::set<std::string> seen;
  for (const auto* part : {&train, &val, &test}) {
    for (const auto& l : *part) {
      if (!seen.insert(l).second) {
        throw ValidationError("label '" + l + "' appears more than once across split parts");
      }
    }
  }
}

const std::vector<std::string>& SplitSpec::part(std::string_view name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw ValidationError("unknown split part '" + std::string(name) + "'");
}

SplitSpec SplitSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open split file " + path);
  SplitSpec s;
  try {
    nlohmann::json j;
    in >> j;
    for (const auto& [k, _] : j.items()) {
      if (k != "train" && k != "val" && k != "test") throw ValidationError("unknown split key '" + k + "'");
    }
    s.train = j.at("train").get<std::vector<std::string>>();
    s.val = j.at("val").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  s.validate();
  return s;
}

void SplitSpec::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write split file " + path);
  out << nlohmann::json{{"train", train}, {"val", val}, {"test", test}}.dump(2) << '\n';
}

ClassPool::ClassPool(const Corpus& corpus, std::vector<std::string> classes)
    : classes_(std::move(classes)) {
  const std::unordered_set<std::string> inside(classes_.begin(), classes_.end());
  if (inside.size() != classes_.size()) throw ValidationError("duplicate class in class pool");
  eligible_.resize(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    for (std::size_t s : corpus.with_label(classes_[c])) {
      const auto& labels = corpus.at(s).labels;
      if (std::all_of(labels.begin(), labels.end(), [&](const auto& l) { return inside.count(l) > 0; })) {
        eligible_[c].push_back(s);
      }
    }
  }
}

Episode sample_episode(Rng& rng, const Corpus& corpus, const ClassPool& pool, const EpisodeShape& shape) {
  if (shape.ways == 0 || shape.shots == 0 || shape.queries == 0) {
    throw InvalidArgument("episode shape needs N, K, Q >= 1");
  }
  if (pool.classes().size() < shape.ways) {
    throw SamplingError("split part has " + std::to_string(pool.classes().size()) +
                        " classes, episode needs " + std::to_string(shape.ways));
  }
  const auto picked = rng.sample_without_replacement(pool.classes().size(), shape.ways);
  for (std::size_t c : picked) {
    if (pool.eligible(c).size() < shape.shots + shape.queries) {
      throw SamplingError("class '" + pool.classes()[c] + "' has " +
                          std::to_string(pool.eligible(c).size()) + " sentences, needs " +
                          std::to_string(shape.shots + shape.queries));
    }
  }

  Episode ep;
  for (std::size_t c : picked) ep.classes.push_back(pool.classes()[c]);

  std::unordered_set<std::size_t> used;
  for (std::size_t i = 0; i < shape.ways; ++i) {
    const auto& cand = pool.eligible(picked[i]);
    std::vector<std::size_t> free;
    for (std::size_t s : cand) {
      if (!used.count(s)) free.push_back(s);
    }
    if (free.size() < shape.shots) {
      throw SamplingError("class '" + ep.classes[i] + "' has too few sentences left for " +
                          std::to_string(shape.shots) + " support shots");
    }
    std::vector<std::size_t> chosen;
    for (std::size_t k : rng.sample_without_replacement(free.size(), shape.shots)) {
      chosen.push_back(free[k]);
      used.insert(free[k]);
    }
    ep.support.push_back(std::move(chosen));
  }

  auto restricted = [&](std::size_t s) {
    LabelVector y(shape.ways, 0);
    const auto& labels = corpus.at(s).labels;
    for (std::size_t i = 0; i < shape.ways; ++i) {
      y[i] = std::binary_search(labels.begin(), labels.end(), ep.classes[i]) ? 1 : 0;
    }
    return y;
  };

  std::vector<std::size_t> positives(shape.ways, 0);
  for (std::size_t i = 0; i < shape.ways; ++i) {
    if (positives[i] >= shape.queries) continue;
    std::vector<std::size_t> free;
    for (std::size_t s : pool.eligible(picked[i])) {
      if (!used.count(s)) free.push_back(s);
    }
    rng.shuffle(free);
    for (std::size_t s : free) {
      if (positives[i] >= shape.queries) break;
      used.insert(s);
      auto y = restricted(s);
      for (std::size_t c = 0; c < shape.ways; ++c) positives[c] += y[c];
      ep.queries.push_back({s, std::move(y)});
    }
    if (positives[i] < shape.queries) {
      throw SamplingError("class '" + ep.classes[i] + "' has too few sentences left for " +
                          std::to_string(shape.queries) + " queries");
    }
  }
  return ep;
}

std::uint64_t episode_seed(std::uint64_t stream_seed, std::uint64_t index) {
  return mix64(mix64(stream_seed) ^ mix64(index ^ 0x5851F42D4C957F2DULL));
}

EpisodeStream::EpisodeStream(std::uint64_t seed, const Corpus& corpus, std::vector<std::string> classes,
                             EpisodeShape shape, std::size_t count)
    : seed_(seed), corpus_(&corpus), pool_(corpus, std::move(classes)), shape_(shape), count_(count) {
  if (count == 0) throw InvalidArgument("episode stream needs count >= 1");
}

Episode EpisodeStream::at(std::size_t index) const {
  if (index >= count_) throw InvalidArgument("episode index out of range");
  Rng rng(episode_seed(seed_, index));
  return sample_episode(rng, *corpus_, pool_, shape_);
}

}  // namespace lgp
