#pragma once

#include <span>
#include <vector>

#include "lgp/episodes.hpp"
#include "lgp/numerics.hpp"

namespace lgp {

// Per-class F1 from query-level confusion counts, averaged over the N classes.
// A class with no true positives scores 0 (including 0/0 cases).
double macro_f1(std::span<const std::vector<std::size_t>> predicted, std::span<const LabelVector> gold,
                std::size_t n_classes);

// One-vs-rest ROC AUC per class (ties count one half), averaged over the
// classes that have both positive and negative queries. Throws
// DegenerateInput when no class qualifies.
double macro_auc(std::span<const Vec> scores, std::span<const LabelVector> gold, std::size_t n_classes);

// ROC AUC of one score column against binary labels via the rank-sum
// statistic; requires at least one positive and one negative.
double binary_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace lgp
