#include "lgp/inference.hpp"

#include <algorithm>
#include <string>

#include "lgp/error.hpp"
#include "lgp/numerics.hpp"

namespace lgp {

Fallback parse_fallback(std::string_view s) {
  if (s == "none") return Fallback::none;
  if (s == "argmax") return Fallback::argmax;
  throw ValidationError("fallback must be 'none' or 'argmax', got '" + std::string(s) + "'");
}

double dynamic_threshold(std::span<const double> y_hat, const ThresholdParams& params) {
  if (y_hat.empty()) throw InvalidArgument("dynamic threshold of an empty score vector");
  const auto [lo, hi] = std::minmax_element(y_hat.begin(), y_hat.end());
  return params.alpha * mean(y_hat) + params.beta * stddev(y_hat) + params.gamma * *hi +
         (1.0 - params.gamma) * *lo;
}

Prediction predict(std::span<const double> y_hat, const ThresholdParams& params, Fallback fallback) {
  Prediction p;
  p.threshold = dynamic_threshold(y_hat, params);
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    if (y_hat[i] > p.threshold) p.positives.push_back(i);
  }
  if (p.positives.empty() && fallback == Fallback::argmax) {
    p.positives.push_back(static_cast<std::size_t>(
        std::distance(y_hat.begin(), std::max_element(y_hat.begin(), y_hat.end()))));
    p.fallback_used = true;
  }
  return p;
}

}  // namespace lgp
