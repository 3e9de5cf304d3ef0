#include "lgp/pipeline.hpp"

#include "lgp/error.hpp"

namespace lgp {

Pipeline::Pipeline(TemplateSet templates, const Encoder& encoder, DescriptionProvider& descriptions,
                   double eps)
    : templates_(std::move(templates)), encoder_(encoder), descriptions_(descriptions), eps_(eps) {
  templates_.validate();
  if (templates_.mask_count != encoder_.mask_count()) {
    throw ValidationError("template mask count " + std::to_string(templates_.mask_count) +
                          " differs from encoder mask count " + std::to_string(encoder_.mask_count()));
  }
}

std::vector<RenderedPrompt> Pipeline::prompts(const Episode& ep, const Corpus& corpus) const {
  std::vector<RenderedPrompt> out;
  for (std::size_t i = 0; i < ep.classes.size(); ++i) {
    for (std::size_t s : ep.support[i]) out.push_back(render_support(templates_, corpus.at(s).text, ep.classes[i]));
    out.push_back(render_description(templates_, descriptions_.get(ep.classes[i]), ep.classes[i]));
  }
  for (const auto& q : ep.queries) out.push_back(render_query(templates_, corpus.at(q.sentence).text));
  return out;
}

EncodedEpisode Pipeline::encode(const Episode& ep, const Corpus& corpus) const {
  EncodedEpisode enc;
  const std::size_t d = encoder_.dim();
  for (std::size_t i = 0; i < ep.classes.size(); ++i) {
    const auto& label = ep.classes[i];
    std::vector<RenderedPrompt> prompts;
    Mat V(ep.support[i].size(), d);
    for (std::size_t k = 0; k < ep.support[i].size(); ++k) {
      prompts.push_back(render_support(templates_, corpus.at(ep.support[i][k]).text, label));
      const Vec v = sentence_rep(encoder_, prompts.back());
      std::copy(v.begin(), v.end(), V.row(k).begin());
    }
    enc.support_prompts.push_back(std::move(prompts));
    enc.inputs.support.push_back(std::move(V));

    enc.descriptions.push_back(descriptions_.get(label));
    enc.description_prompts.push_back(render_description(templates_, enc.descriptions.back(), label));
    enc.inputs.descriptions.push_back(sentence_rep(encoder_, enc.description_prompts.back()));
  }
  for (const auto& q : ep.queries) {
    enc.query_prompts.push_back(render_query(templates_, corpus.at(q.sentence).text));
    enc.inputs.queries.push_back(sentence_rep(encoder_, enc.query_prompts.back()));
    enc.inputs.labels.push_back(q.labels);
  }
  return enc;
}

ForwardPass Pipeline::forward(const EncodedEpisode& enc) const {
  ForwardPass fwd = lgp::forward(enc.inputs, eps_);
  for (std::size_t i = 0; i < fwd.classes.size(); ++i) {
    fwd.classes[i].description = enc.descriptions[i];
  }
  return fwd;
}

ClassBundle Pipeline::class_bundle(const std::string& label, const Mat& support_reps) const {
  if (support_reps.rows() == 0) throw InvalidArgument("class bundle needs K >= 1");
  std::string description = descriptions_.get(label);
  Vec v_c = sentence_rep(encoder_, render_description(templates_, description, label));
  ClassBundle b = make_bundle(std::move(v_c), support_reps);
  b.label = label;
  b.description = std::move(description);
  return b;
}

}  // namespace lgp
