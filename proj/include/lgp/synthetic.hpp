#pragma once

#include <cstdint>
#include <string>

#include "lgp/episodes.hpp"

namespace lgp {

// Generated corpus where each sentence is filler words plus the marker token
// of each class it belongs to. Class c is labelled "aspect_mNN" and its
// marker is "mNN", so labels and offline descriptions mention the marker too.
struct SyntheticSpec {
  std::size_t train_classes = 10;
  std::size_t val_classes = 5;
  std::size_t test_classes = 5;
  std::size_t sentences_per_class = 60;
  std::size_t filler_vocab = 20;
  std::size_t filler_per_sentence = 16;
  // Fraction of sentences that also carry a second class from the same part.
  double multi_label_fraction = 0.0;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Corpus corpus;
  SplitSpec split;
};

std::string synthetic_label(std::size_t class_index);
std::string synthetic_marker(std::size_t class_index);

SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace lgp
