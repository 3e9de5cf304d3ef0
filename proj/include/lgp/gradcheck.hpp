#pragma once

#include <cstdint>
#include <string>

#include "lgp/model.hpp"
#include "lgp/rng.hpp"

namespace lgp {

struct GradcheckOptions {
  std::size_t episodes = 100;
  std::size_t ways = 5;
  std::size_t shots = 5;
  std::size_t queries = 5;
  std::size_t dim = 16;
  std::size_t mask_count = 3;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so coordinates whose true
  // gradient is ~0 are judged on absolute error.
  double floor = 1e-6;
  double eps = kDefaultSigmaEps;
  std::uint64_t seed = 0;
  // Mutation hook: negates the analytic gradient of the first query before
  // comparison. The check must then fail.
  bool flip_sign = false;
};

struct GradcheckResult {
  bool passed = false;
  bool skipped = false;
  std::string notice;
  double max_rel_err = 0.0;
  std::size_t episodes = 0;
  std::size_t coordinates = 0;
  std::size_t worst_episode = 0;
};

// Hidden states (m x d per prompt) for one random episode; reps are their
// row means.
struct RandomEpisode {
  std::vector<std::vector<Mat>> support;  // N x K hidden matrices
  std::vector<Mat> descriptions;          // N
  std::vector<Mat> queries;               // Q
  std::vector<LabelVector> labels;
};

RandomEpisode random_episode(Rng& rng, const GradcheckOptions& opt);
EpisodeInputs pool_episode(const RandomEpisode& ep);

double relative_error(double analytic, double numeric, double floor);

// Central finite differences of the episode loss w.r.t. every hidden-state
// entry, compared with the analytic backward chained through mean pooling.
GradcheckResult run_gradcheck(const GradcheckOptions& opt);

}  // namespace lgp
