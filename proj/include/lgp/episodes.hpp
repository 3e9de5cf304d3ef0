#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lgp/rng.hpp"

namespace lgp {

// Bit i is set iff the sentence carries the episode's i-th class.
using LabelVector = std::vector<std::uint8_t>;

struct Sentence {
  std::string id;
  std::string text;
  std::vector<std::string> labels;  // sorted, unique, nonempty
};

class Corpus {
 public:
  Corpus() = default;
  // Throws ValidationError on duplicate ids or a sentence without labels.
  explicit Corpus(std::vector<Sentence> sentences);

  // JSON Lines {"id","text","labels"}; ParseError carries the line number.
  static Corpus load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& at(std::size_t i) const { return sentences_.at(i); }
  std::size_t size() const { return sentences_.size(); }
  // Sorted distinct labels.
  std::vector<std::string> labels() const;
  // Indices of sentences carrying the label, ascending.
  const std::vector<std::size_t>& with_label(std::string_view label) const;
  std::size_t index_of(std::string_view id) const;

 private:
  std::vector<Sentence> sentences_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_label_;
};

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  // Pairwise disjoint, no duplicates within a part.
  void validate() const;
  const std::vector<std::string>& part(std::string_view name) const;

  static SplitSpec load(const std::string& path);
  void save(const std::string& path) const;
};

// Classes of one split part with, per class, the sentences eligible to
// represent it: those whose every label lies inside the part.
class ClassPool {
 public:
  ClassPool(const Corpus& corpus, std::vector<std::string> classes);

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::size_t>& eligible(std::size_t class_index) const { return eligible_[class_index]; }

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<std::size_t>> eligible_;
};

struct EpisodeShape {
  std::size_t ways = 5;     // N
  std::size_t shots = 5;    // K
  std::size_t queries = 5;  // Q, positives required per class
};

struct Query {
  std::size_t sentence;
  LabelVector labels;
};

struct Episode {
  std::vector<std::string> classes;              // N labels
  std::vector<std::vector<std::size_t>> support;  // N x K sentence indices
  std::vector<Query> queries;
};

Episode sample_episode(Rng& rng, const Corpus& corpus, const ClassPool& pool, const EpisodeShape& shape);

// Per-episode seed derived from the stream seed and the episode counter.
std::uint64_t episode_seed(std::uint64_t stream_seed, std::uint64_t index);

// Deterministic, random-access episode sequence: episode i depends only on
// (seed, i), so episodes can be generated in any order or in parallel.
class EpisodeStream {
 public:
  EpisodeStream(std::uint64_t seed, const Corpus& corpus, std::vector<std::string> classes,
                EpisodeShape shape, std::size_t count);

  Episode at(std::size_t index) const;
  std::size_t size() const { return count_; }
  const EpisodeShape& shape() const { return shape_; }

 private:
  std::uint64_t seed_;
  const Corpus* corpus_;
  ClassPool pool_;
  EpisodeShape shape_;
  std::size_t count_;
};

}  // namespace lgp
