#include "lgp/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "lgp/error.hpp"

namespace lgp {

double macro_f1(std::span<const std::vector<std::size_t>> predicted, std::span<const LabelVector> gold,
                std::size_t n_classes) {
  if (predicted.size() != gold.size()) throw ShapeError("macro_f1: prediction and gold counts differ");
  if (gold.empty()) throw InvalidArgument("macro_f1 needs at least one query");
  if (n_classes == 0) throw InvalidArgument("macro_f1 needs N >= 1");
  std::vector<std::size_t> tp(n_classes), fp(n_classes), fn(n_classes);
  for (std::size_t q = 0; q < gold.size(); ++q) {
    if (gold[q].size() != n_classes) throw ShapeError("macro_f1: gold vector length differs from N");
    std::vector<std::uint8_t> pred(n_classes, 0);
    for (std::size_t c : predicted[q]) {
      if (c >= n_classes) throw ShapeError("macro_f1: predicted class index out of range");
      pred[c] = 1;
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
      tp[c] += pred[c] && gold[q][c];
      fp[c] += pred[c] && !gold[q][c];
      fn[c] += !pred[c] && gold[q][c];
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    // F1 = 2TP / (2TP + FP + FN), which is 0 whenever TP = 0.
    if (tp[c] > 0) total += 2.0 * tp[c] / static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
  }
  return total / static_cast<double>(n_classes);
}

double binary_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ShapeError("binary_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups, 1-based.
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DegenerateInput("binary_auc needs both positives and negatives");
  const double u = pos_rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double macro_auc(std::span<const Vec> scores, std::span<const LabelVector> gold, std::size_t n_classes) {
  if (scores.size() != gold.size()) throw ShapeError("macro_auc: score and gold counts differ");
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> column(scores.size());
  std::vector<std::uint8_t> labels(scores.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t pos = 0;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (scores[q].size() != n_classes || gold[q].size() != n_classes) {
        throw ShapeError("macro_auc: vector length differs from N");
      }
      column[q] = scores[q][c];
      labels[q] = gold[q][c];
      pos += labels[q];
    }
    if (pos == 0 || pos == scores.size()) continue;
    total += binary_auc(column, labels);
    ++used;
  }
  if (used == 0) throw DegenerateInput("AUC undefined: every class lacks positives or negatives");
  return total / static_cast<double>(used);
}

}  // namespace lgp
