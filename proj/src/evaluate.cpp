#include "lgp/evaluate.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "lgp/error.hpp"
#include "lgp/metrics.hpp"

namespace lgp {

nlohmann::json Report::to_json() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : episodes) {
    eps.push_back({{"f1", e.f1}, {"auc", e.auc ? nlohmann::json(*e.auc) : nlohmann::json(nullptr)}});
  }
  return {{"macro_f1", macro_f1},
          {"auc", auc ? nlohmann::json(*auc) : nlohmann::json(nullptr)},
          {"degenerate_auc_episodes", degenerate_auc_episodes},
          {"episodes", std::move(eps)},
          {"protocol", protocol},
          {"seed", seed}};
}

void Report::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report " + path);
  out << to_json().dump(2) << '\n';
}

EpisodeOutcome run_episode(const Pipeline& pipeline, const Episode& ep, const Corpus& corpus,
                           const ThresholdParams& threshold, Fallback fallback) {
  const auto enc = pipeline.encode(ep, corpus);
  const auto fwd = pipeline.forward(enc);
  EpisodeOutcome out;
  out.gold = enc.inputs.labels;
  for (const auto& s : fwd.scores) {
    out.predictions.push_back(predict(s.y_hat, threshold, fallback));
    out.y_hat.push_back(s.y_hat);
  }
  return out;
}

EpisodeMetrics score_episode(const EpisodeOutcome& outcome, std::size_t n_classes) {
  std::vector<std::vector<std::size_t>> positives;
  for (const auto& p : outcome.predictions) positives.push_back(p.positives);
  EpisodeMetrics m;
  m.f1 = macro_f1(positives, outcome.gold, n_classes);
  try {
    m.auc = macro_auc(outcome.y_hat, outcome.gold, n_classes);
  } catch (const DegenerateInput&) {
    m.auc.reset();
  }
  return m;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

Report evaluate(const Pipeline& pipeline, const Corpus& corpus, const std::vector<std::string>& classes,
                const Protocol& protocol, const ThresholdParams& threshold, Fallback fallback,
                std::size_t workers) {
  const EpisodeStream stream(protocol.seed, corpus, classes, protocol.shape, protocol.episodes);
  std::vector<EpisodeMetrics> per(stream.size());
  parallel_for(stream.size(), workers, [&](std::size_t i) {
    per[i] = score_episode(run_episode(pipeline, stream.at(i), corpus, threshold, fallback),
                           protocol.shape.ways);
  });

  Report r;
  r.seed = protocol.seed;
  r.protocol = {{"ways", protocol.shape.ways},
                {"shots", protocol.shape.shots},
                {"queries", protocol.shape.queries},
                {"episodes", protocol.episodes},
                {"split", protocol.split},
                {"alpha", threshold.alpha},
                {"beta", threshold.beta},
                {"gamma", threshold.gamma},
                {"fallback", fallback == Fallback::argmax ? "argmax" : "none"}};
  double f1_sum = 0.0;
  double auc_sum = 0.0;
  std::size_t auc_count = 0;
  for (const auto& m : per) {
    f1_sum += m.f1;
    if (m.auc) {
      auc_sum += *m.auc;
      ++auc_count;
    } else {
      ++r.degenerate_auc_episodes;
    }
  }
  r.macro_f1 = f1_sum / static_cast<double>(per.size());
  if (auc_count > 0) r.auc = auc_sum / static_cast<double>(auc_count);
  r.episodes = std::move(per);
  return r;
}

}  // namespace lgp
