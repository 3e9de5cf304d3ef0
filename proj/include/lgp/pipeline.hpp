#pragma once

#include <string>
#include <vector>

#include "lgp/descriptions.hpp"
#include "lgp/encoder.hpp"
#include "lgp/episodes.hpp"
#include "lgp/model.hpp"
#include "lgp/prompts.hpp"

namespace lgp {

// An episode rendered into prompts and encoded into representations.
struct EncodedEpisode {
  EpisodeInputs inputs;
  std::vector<std::vector<RenderedPrompt>> support_prompts;  // N x K
  std::vector<RenderedPrompt> description_prompts;           // N
  std::vector<RenderedPrompt> query_prompts;                 // Q
  std::vector<std::string> descriptions;                     // N
};

// Binds templates, an encoder and a description provider. Support sentences
// use the class they were sampled for as the label slot; descriptions use the
// support template with the class's own label.
class Pipeline {
 public:
  Pipeline(TemplateSet templates, const Encoder& encoder, DescriptionProvider& descriptions,
           double eps = kDefaultSigmaEps);

  // Every prompt an episode needs, without encoding (used to pre-check stores).
  std::vector<RenderedPrompt> prompts(const Episode& ep, const Corpus& corpus) const;
  EncodedEpisode encode(const Episode& ep, const Corpus& corpus) const;
  ForwardPass forward(const EncodedEpisode& enc) const;

  ClassBundle class_bundle(const std::string& label, const Mat& support_reps) const;

  const TemplateSet& templates() const { return templates_; }
  const Encoder& encoder() const { return encoder_; }
  double eps() const { return eps_; }

 private:
  TemplateSet templates_;
  const Encoder& encoder_;
  DescriptionProvider& descriptions_;
  double eps_;
};

}  // namespace lgp
