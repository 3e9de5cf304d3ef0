#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lgp/episodes.hpp"
#include "lgp/inference.hpp"
#include "lgp/model.hpp"
#include "lgp/pipeline.hpp"

namespace lgp {

struct Protocol {
  EpisodeShape shape;
  std::size_t episodes = 600;
  std::uint64_t seed = 0;
  std::string split = "test";
};

struct EpisodeOutcome {
  std::vector<Vec> y_hat;
  std::vector<Prediction> predictions;
  std::vector<LabelVector> gold;
};

struct EpisodeMetrics {
  double f1 = 0.0;
  std::optional<double> auc;  // empty when every class was degenerate
};

struct Report {
  double macro_f1 = 0.0;
  std::optional<double> auc;
  std::vector<EpisodeMetrics> episodes;
  std::size_t degenerate_auc_episodes = 0;
  nlohmann::json protocol;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  void save(const std::string& path) const;
};

EpisodeOutcome run_episode(const Pipeline& pipeline, const Episode& ep, const Corpus& corpus,
                           const ThresholdParams& threshold, Fallback fallback);
EpisodeMetrics score_episode(const EpisodeOutcome& outcome, std::size_t n_classes);

// Streams protocol.episodes episodes from the split part, scores each, and
// averages per-episode metrics. Worker threads split the episodes; the
// reduction runs in episode order so results do not depend on `workers`.
Report evaluate(const Pipeline& pipeline, const Corpus& corpus, const std::vector<std::string>& classes,
                const Protocol& protocol, const ThresholdParams& threshold,
                Fallback fallback = Fallback::argmax, std::size_t workers = 1);

// Runs fn(i) for i in [0, count) on `workers` threads; rethrows the first error.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace lgp
