#pragma once

#include <span>
#include <string>
#include <vector>

#include "lgp/encoder.hpp"
#include "lgp/episodes.hpp"
#include "lgp/numerics.hpp"
#include "lgp/prompts.hpp"

namespace lgp {

struct ClassBundle {
  std::string label;
  std::string description;
  Vec v_c;  // description representation
  Mat V;    // K x d support representations
  Vec a;    // attention over the K supports
  Vec r;    // prototype, a * V
};

struct QueryScore {
  std::vector<Vec> attended;  // prototype-specific query representation per class
  Vec raw_cos;
  double mu = 0.0;
  double sigma = 0.0;
  Vec y_hat;
};

// Everything the loss depends on, at the representation level.
struct EpisodeInputs {
  std::vector<Mat> support;          // N matrices, K x d
  std::vector<Vec> descriptions;     // N vectors
  std::vector<Vec> queries;          // Q vectors
  std::vector<LabelVector> labels;   // Q vectors of length N
};

struct ForwardPass {
  std::vector<ClassBundle> classes;
  std::vector<QueryScore> scores;
  double loss = 0.0;
};

struct EpisodeGradients {
  std::vector<Mat> support;
  std::vector<Vec> descriptions;
  std::vector<Vec> queries;
};

// Mean over the m mask rows of the encoder output.
Vec sentence_rep(const Encoder& encoder, const RenderedPrompt& prompt);

// softmax over supports of the feature-mean of v_c (Hadamard) V_k, which is
// softmax((1/d) V v_c).
Vec support_attention(std::span<const double> v_c, const Mat& V);
Vec prototype(std::span<const double> a, const Mat& V);
ClassBundle make_bundle(Vec v_c, Mat V);

// softmax over features of tanh(r) * v_q, applied back onto v_q.
Vec query_attention(std::span<const double> r, std::span<const double> v_q);

QueryScore episode_scores(std::span<const Vec> prototypes, std::span<const double> v_q,
                          double eps = kDefaultSigmaEps);
QueryScore episode_scores(std::span<const ClassBundle> classes, std::span<const double> v_q,
                          double eps = kDefaultSigmaEps);

// -(1/N) sum_i y_i (y_hat_i - logsumexp(y_hat)) for one query.
double query_loss(std::span<const double> y_hat, const LabelVector& y);
// Mean of query_loss over the queries.
double episode_loss(std::span<const Vec> y_hats, std::span<const LabelVector> labels);

ForwardPass forward(const EpisodeInputs& in, double eps = kDefaultSigmaEps);
EpisodeGradients backward(const EpisodeInputs& in, const ForwardPass& fwd, double eps = kDefaultSigmaEps);

// dL/dh for an m-row hidden matrix that was mean-pooled into a rep with
// gradient dv: every row receives dv / m.
Mat pooled_row_gradient(std::span<const double> dv, std::size_t mask_count);

}  // namespace lgp
