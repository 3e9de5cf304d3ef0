#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace lgp {

// Dynamic threshold t = alpha*mean + beta*std + gamma*max + (1-gamma)*min
// over a query's standardized scores (population std).
struct ThresholdParams {
  double alpha = 0.3;
  double beta = 0.7;
  double gamma = 0.7;
};

enum class Fallback { none, argmax };

Fallback parse_fallback(std::string_view s);

struct Prediction {
  std::vector<std::size_t> positives;  // ascending class indices
  double threshold = 0.0;
  bool fallback_used = false;
};

double dynamic_threshold(std::span<const double> y_hat, const ThresholdParams& params);

// Positives are the classes scoring strictly above the threshold. With the
// argmax fallback an empty set becomes the single best class.
Prediction predict(std::span<const double> y_hat, const ThresholdParams& params,
                   Fallback fallback = Fallback::argmax);

}  // namespace lgp
