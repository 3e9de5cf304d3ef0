#include "lgp/model.hpp"

#include <cmath>

#include "lgp/error.hpp"

namespace lgp {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

void check_inputs(const EpisodeInputs& in) {
  const std::size_t n = in.support.size();
  require(n >= 1, "episode needs at least one class");
  require(in.descriptions.size() == n, "one description representation per class");
  require(in.labels.size() == in.queries.size(), "one label vector per query");
  const std::size_t d = in.descriptions.front().size();
  require(d >= 1, "representation dimension must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    require(in.support[i].rows() >= 1, "each class needs at least one support");
    require(in.support[i].cols() == d, "support dimension mismatch");
    require(in.descriptions[i].size() == d, "description dimension mismatch");
  }
  for (std::size_t q = 0; q < in.queries.size(); ++q) {
    require(in.queries[q].size() == d, "query dimension mismatch");
    require(in.labels[q].size() == n, "label vector length must equal N");
  }
}

// Recomputed by backward; forward keeps only the attended vectors.
struct QueryAttentionTrace {
  Vec t;  // tanh(r)
  Vec w;  // softmax(t * v_q)
};

QueryAttentionTrace trace_query_attention(std::span<const double> r, std::span<const double> v_q) {
  QueryAttentionTrace tr;
  tr.t.resize(r.size());
  Vec z(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    tr.t[k] = std::tanh(r[k]);
    z[k] = tr.t[k] * v_q[k];
  }
  tr.w = softmax(z);
  return tr;
}

}  // namespace

Vec sentence_rep(const Encoder& encoder, const RenderedPrompt& prompt) {
  const Mat h = encoder.encode(prompt);
  if (h.rows() != encoder.mask_count() || h.cols() != encoder.dim()) {
    throw ShapeError("encoder returned a hidden matrix of the wrong shape");
  }
  return mean_over_rows(h);
}

Vec support_attention(std::span<const double> v_c, const Mat& V) {
  require(V.rows() >= 1, "support attention needs at least one support");
  require(V.cols() == v_c.size(), "support attention shape mismatch");
  Mat hadamard(V.rows(), V.cols());
  for (std::size_t k = 0; k < V.rows(); ++k) {
    for (std::size_t j = 0; j < V.cols(); ++j) hadamard(k, j) = v_c[j] * V(k, j);
  }
  return softmax(mean_over_features(hadamard));
}

Vec prototype(std::span<const double> a, const Mat& V) {
  require(a.size() == V.rows(), "prototype weights must match the support count");
  Vec r(V.cols(), 0.0);
  for (std::size_t k = 0; k < V.rows(); ++k) {
    for (std::size_t j = 0; j < V.cols(); ++j) r[j] += a[k] * V(k, j);
  }
  return r;
}

ClassBundle make_bundle(Vec v_c, Mat V) {
  ClassBundle b;
  b.a = support_attention(v_c, V);
  b.r = prototype(b.a, V);
  b.v_c = std::move(v_c);
  b.V = std::move(V);
  return b;
}

Vec query_attention(std::span<const double> r, std::span<const double> v_q) {
  require(r.size() == v_q.size(), "query attention shape mismatch");
  require(!r.empty(), "query attention needs d >= 1");
  const auto tr = trace_query_attention(r, v_q);
  Vec out(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) out[k] = tr.w[k] * v_q[k];
  return out;
}

QueryScore episode_scores(std::span<const Vec> prototypes, std::span<const double> v_q, double eps) {
  require(!prototypes.empty(), "scores need at least one prototype");
  QueryScore s;
  s.raw_cos.reserve(prototypes.size());
  for (const auto& r : prototypes) {
    s.attended.push_back(query_attention(r, v_q));
    s.raw_cos.push_back(cosine(r, s.attended.back()));
  }
  auto z = standardize(s.raw_cos, eps);
  s.mu = z.mu;
  s.sigma = z.sigma;
  s.y_hat = std::move(z.values);
  return s;
}

QueryScore episode_scores(std::span<const ClassBundle> classes, std::span<const double> v_q, double eps) {
  std::vector<Vec> protos;
  protos.reserve(classes.size());
  for (const auto& c : classes) protos.push_back(c.r);
  return episode_scores(protos, v_q, eps);
}

double query_loss(std::span<const double> y_hat, const LabelVector& y) {
  require(y_hat.size() == y.size(), "score and label lengths differ");
  require(!y_hat.empty(), "loss needs N >= 1");
  const double lse = logsumexp(y_hat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) s += y_hat[i] - lse;
  }
  return -s / static_cast<double>(y.size());
}

double episode_loss(std::span<const Vec> y_hats, std::span<const LabelVector> labels) {
  require(y_hats.size() == labels.size(), "one label vector per query");
  if (y_hats.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t q = 0; q < y_hats.size(); ++q) total += query_loss(y_hats[q], labels[q]);
  return total / static_cast<double>(y_hats.size());
}

ForwardPass forward(const EpisodeInputs& in, double eps) {
  check_inputs(in);
  ForwardPass out;
  for (std::size_t i = 0; i < in.support.size(); ++i) {
    out.classes.push_back(make_bundle(in.descriptions[i], in.support[i]));
  }
  std::vector<Vec> y_hats;
  for (const auto& v_q : in.queries) {
    out.scores.push_back(episode_scores(out.classes, v_q, eps));
    y_hats.push_back(out.scores.back().y_hat);
  }
  out.loss = episode_loss(y_hats, in.labels);
  return out;
}

EpisodeGradients backward(const EpisodeInputs& in, const ForwardPass& fwd, double eps) {
  check_inputs(in);
  const std::size_t n = in.support.size();
  const std::size_t d = in.descriptions.front().size();
  const std::size_t nq = in.queries.size();
  require(fwd.classes.size() == n && fwd.scores.size() == nq, "forward record does not match inputs");

  EpisodeGradients g;
  for (const auto& V : in.support) g.support.emplace_back(V.rows(), V.cols());
  g.descriptions.assign(n, Vec(d, 0.0));
  g.queries.assign(nq, Vec(d, 0.0));
  if (nq == 0) return g;

  std::vector<Vec> grad_r(n, Vec(d, 0.0));
  const double inv_q = 1.0 / static_cast<double>(nq);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t q = 0; q < nq; ++q) {
    const auto& score = fwd.scores[q];
    const auto& y = in.labels[q];
    const auto& v_q = in.queries[q];

    // Loss -> standardized scores.
    double positives = 0.0;
    for (auto b : y) positives += b;
    if (positives == 0.0) continue;
    const Vec p = softmax(score.y_hat);
    Vec g_yhat(n);
    for (std::size_t i = 0; i < n; ++i) g_yhat[i] = -inv_q * inv_n * (y[i] - positives * p[i]);

    // Standardized scores -> raw cosines.
    const double g_mean = mean(g_yhat);
    Vec g_cos(n);
    if (score.sigma > eps) {
      double gy = 0.0;
      for (std::size_t i = 0; i < n; ++i) gy += g_yhat[i] * score.y_hat[i];
      gy *= inv_n;
      for (std::size_t i = 0; i < n; ++i) {
        g_cos[i] = (g_yhat[i] - g_mean - score.y_hat[i] * gy) / score.sigma;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) g_cos[i] = (g_yhat[i] - g_mean) / eps;
    }

    for (std::size_t i = 0; i < n; ++i) {
      const Vec& r = fwd.classes[i].r;
      const Vec& att = score.attended[i];
      const double nr = norm(r);
      const double na = norm(att);
      if (nr == 0.0 || na == 0.0) throw DegenerateInput("zero-norm vector in cosine backward");
      const double c = score.raw_cos[i];

      // Cosine -> prototype and attended query.
      Vec g_att(d);
      for (std::size_t k = 0; k < d; ++k) {
        grad_r[i][k] += g_cos[i] * (att[k] / (nr * na) - c * r[k] / (nr * nr));
        g_att[k] = g_cos[i] * (r[k] / (nr * na) - c * att[k] / (na * na));
      }

      // attended = w * v_q, w = softmax(tanh(r) * v_q).
      const auto tr = trace_query_attention(r, v_q);
      Vec g_w(d);
      double gw_dot_w = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        g_w[k] = g_att[k] * v_q[k];
        g.queries[q][k] += g_att[k] * tr.w[k];
        gw_dot_w += g_w[k] * tr.w[k];
      }
      for (std::size_t k = 0; k < d; ++k) {
        const double g_z = tr.w[k] * (g_w[k] - gw_dot_w);
        g.queries[q][k] += g_z * tr.t[k];
        grad_r[i][k] += g_z * v_q[k] * (1.0 - tr.t[k] * tr.t[k]);
      }
    }
  }

  // Prototype r = a V, a = softmax((1/d) V v_c).
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& bundle = fwd.classes[i];
    const Mat& V = in.support[i];
    const std::size_t kk = V.rows();
    Vec g_a(kk);
    double ga_dot_a = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      g_a[k] = dot(grad_r[i], V.row(k));
      ga_dot_a += g_a[k] * bundle.a[k];
      auto gv = g.support[i].row(k);
      for (std::size_t j = 0; j < d; ++j) gv[j] += bundle.a[k] * grad_r[i][j];
    }
    for (std::size_t k = 0; k < kk; ++k) {
      const double g_s = bundle.a[k] * (g_a[k] - ga_dot_a) * inv_d;
      auto gv = g.support[i].row(k);
      const auto vk = V.row(k);
      for (std::size_t j = 0; j < d; ++j) {
        gv[j] += g_s * in.descriptions[i][j];
        g.descriptions[i][j] += g_s * vk[j];
      }
    }
  }
  return g;
}

Mat pooled_row_gradient(std::span<const double> dv, std::size_t mask_count) {
  Mat out(mask_count, dv.size());
  const double scale = 1.0 / static_cast<double>(mask_count);
  for (std::size_t j = 0; j < mask_count; ++j) {
    for (std::size_t k = 0; k < dv.size(); ++k) out(j, k) = dv[k] * scale;
  }
  return out;
}

}  // namespace lgp
