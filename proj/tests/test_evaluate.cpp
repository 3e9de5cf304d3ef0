#include <doctest.h>

#include <atomic>
#include <cmath>

#include "lgp/error.hpp"
#include "lgp/evaluate.hpp"
#include "lgp/synthetic.hpp"
#include "support.hpp"

using namespace lgp;

namespace {

// Maps every prompt to the one-hot vector of the first class marker it
// contains, on all mask rows. Only meaningful for synthetic corpora.
class MarkerEncoder final : public Encoder {
 public:
  MarkerEncoder(std::size_t dim, std::size_t m) : dim_(dim), m_(m) {}
  Mat encode(const RenderedPrompt& p) const override {
    for (const auto& tok : p.tokens) {
      if (tok.size() == 3 && tok[0] == 'm' && std::isdigit(static_cast<unsigned char>(tok[1]))) {
        const std::size_t c = std::stoul(tok.substr(1));
        Mat h(m_, dim_);
        for (std::size_t j = 0; j < m_; ++j) h(j, c) = 1.0;
        return h;
      }
    }
    throw DegenerateInput("no marker in prompt");
  }
  std::size_t dim() const override { return dim_; }
  std::size_t mask_count() const override { return m_; }
  std::string name() const override { return "marker"; }

 private:
  std::size_t dim_, m_;
};

SyntheticData small_data() {
  SyntheticSpec spec;
  spec.sentences_per_class = 30;
  return make_synthetic(spec);
}

}  // namespace

TEST_CASE("a separable corpus with a marker encoder scores perfectly") {
  const SyntheticData data = small_data();
  MarkerEncoder enc(20, 3);
  DescriptionProvider desc;
  Pipeline pipe(TemplateSet{}, enc, desc);
  Protocol proto;
  proto.episodes = 40;
  proto.seed = 3;
  const Report r = evaluate(pipe, data.corpus, data.split.test, proto, ThresholdParams{});
  CHECK(r.macro_f1 == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.episodes.size() == 40);
  CHECK(r.degenerate_auc_episodes == 0);
}

TEST_CASE("reports are reproducible and independent of worker count") {
  const SyntheticData data = small_data();
  StubEncoder enc(16, 3, 5);
  DescriptionProvider desc;
  Pipeline pipe(TemplateSet{}, enc, desc);
  Protocol proto;
  proto.episodes = 30;
  proto.seed = 7;
  const std::string a = evaluate(pipe, data.corpus, data.split.test, proto, ThresholdParams{}).to_json().dump();
  const std::string b = evaluate(pipe, data.corpus, data.split.test, proto, ThresholdParams{}).to_json().dump();
  const std::string c =
      evaluate(pipe, data.corpus, data.split.test, proto, ThresholdParams{}, Fallback::argmax, 4).to_json().dump();
  CHECK(a == b);
  CHECK(a == c);

  proto.seed = 8;
  const std::string d = evaluate(pipe, data.corpus, data.split.test, proto, ThresholdParams{}).to_json().dump();
  CHECK(a != d);
}

TEST_CASE("report JSON carries the summary fields") {
  const SyntheticData data = small_data();
  StubEncoder enc(8, 3, 5);
  DescriptionProvider desc;
  Pipeline pipe(TemplateSet{}, enc, desc);
  Protocol proto;
  proto.episodes = 5;
  proto.seed = 1;
  const auto j = evaluate(pipe, data.corpus, data.split.test, proto, ThresholdParams{}).to_json();
  for (const char* key : {"macro_f1", "auc", "degenerate_auc_episodes", "episodes", "protocol", "seed"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["seed"] == 1);
}

TEST_CASE("run_episode yields one score vector per query") {
  const SyntheticData data = small_data();
  StubEncoder enc(8, 3, 5);
  DescriptionProvider desc;
  Pipeline pipe(TemplateSet{}, enc, desc);
  EpisodeStream stream(2, data.corpus, data.split.test, EpisodeShape{}, 1);
  const Episode ep = stream.at(0);
  const EpisodeOutcome out = run_episode(pipe, ep, data.corpus, ThresholdParams{}, Fallback::argmax);
  CHECK(out.y_hat.size() == ep.queries.size());
  CHECK(out.predictions.size() == ep.queries.size());
  CHECK(out.gold.size() == ep.queries.size());
  for (const auto& y : out.y_hat) CHECK(y.size() == 5);
}

TEST_CASE("pipeline rejects an encoder whose m differs from the templates") {
  StubEncoder enc(8, 2, 5);
  DescriptionProvider desc;
  CHECK_THROWS_AS(Pipeline(TemplateSet{}, enc, desc), ValidationError);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  for (std::size_t workers : {1, 2, 4, 9}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(50, workers,
                                 [](std::size_t i) {
                                   if (i == 17) throw NumericError("boom");
                                 }),
                    NumericError);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}
