#include "lgp/synthetic.hpp"

#include <cstdio>

#include "lgp/error.hpp"
#include "lgp/rng.hpp"

namespace lgp {

std::string synthetic_marker(std::size_t class_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "m%02zu", class_index);
  return buf;
}

std::string synthetic_label(std::size_t class_index) { return "aspect_" + synthetic_marker(class_index); }

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  const std::size_t total = spec.train_classes + spec.val_classes + spec.test_classes;
  if (total == 0 || spec.sentences_per_class == 0 || spec.filler_vocab == 0) {
    throw InvalidArgument("synthetic corpus needs classes, sentences and a filler vocabulary");
  }
  Rng rng(spec.seed);
  SyntheticData out;
  std::vector<std::size_t> part_of(total);
  for (std::size_t c = 0; c < total; ++c) {
    auto& part = c < spec.train_classes                      ? out.split.train
                 : c < spec.train_classes + spec.val_classes ? out.split.val
                                                             : out.split.test;
    part.push_back(synthetic_label(c));
    part_of[c] = c < spec.train_classes ? 0 : c < spec.train_classes + spec.val_classes ? 1 : 2;
  }

  std::vector<Sentence> sentences;
  std::size_t next_id = 0;
  for (std::size_t c = 0; c < total; ++c) {
    for (std::size_t s = 0; s < spec.sentences_per_class; ++s) {
      std::vector<std::string> words;
      for (std::size_t w = 0; w < spec.filler_per_sentence; ++w) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "w%03zu", rng.index(spec.filler_vocab));
        words.emplace_back(buf);
      }
      std::vector<std::size_t> classes{c};
      if (rng.uniform01() < spec.multi_label_fraction) {
        std::vector<std::size_t> mates;
        for (std::size_t o = 0; o < total; ++o) {
          if (o != c && part_of[o] == part_of[c]) mates.push_back(o);
        }
        if (!mates.empty()) classes.push_back(mates[rng.index(mates.size())]);
      }
      Sentence sent;
      for (std::size_t cls : classes) {
        const std::size_t pos = rng.index(words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), synthetic_marker(cls));
        sent.labels.push_back(synthetic_label(cls));
      }
      char id[16];
      std::snprintf(id, sizeof id, "s%06zu", next_id++);
      sent.id = id;
      for (const auto& w : words) sent.text += (sent.text.empty() ? "" : " ") + w;
      sentences.push_back(std::move(sent));
    }
  }
  out.corpus = Corpus(std::move(sentences));
  return out;
}

}  // namespace lgp
