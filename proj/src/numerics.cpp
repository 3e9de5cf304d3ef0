#include "lgp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lgp/error.hpp"

namespace lgp {

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                     " given " + std::to_string(values_.size()) + " values");
  }
}

Mat Mat::from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return Mat{};
  const std::size_t cols = rows.front().size();
  Mat out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ShapeError("ragged rows in Mat::from_rows");
    std::copy(rows[i].begin(), rows[i].end(), out.row(i).begin());
  }
  return out;
}

std::span<double> Mat::row(std::size_t i) {
  return std::span<double>(values_).subspan(i * cols_, cols_);
}

std::span<const double> Mat::row(std::size_t i) const {
  return std::span<const double>(values_).subspan(i * cols_, cols_);
}

Vec softmax(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("softmax of an empty vector");
  const double peak = *std::max_element(x.begin(), x.end());
  Vec out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double logsumexp(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("logsumexp of an empty vector");
  const double peak = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (double v : x) total += std::exp(v - peak);
  return peak + std::log(total);
}

Vec mean_over_rows(const Mat& m) {
  if (m.rows() == 0) throw InvalidArgument("mean_over_rows of a matrix with zero rows");
  Vec out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += r[j];
  }
  for (double& v : out) v /= static_cast<double>(m.rows());
  return out;
}

Vec mean_over_features(const Mat& m) {
  if (m.cols() == 0) throw InvalidArgument("mean_over_features of a matrix with zero columns");
  Vec out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    double s = 0.0;
    for (double v : r) s += v;
    out[i] = s / static_cast<double>(m.cols());
  }
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("dot of vectors with different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("cosine of vectors with different lengths");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw DegenerateInput("cosine of a zero-norm vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of an empty vector");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(x.size()));
}

Standardized standardize(std::span<const double> x, double eps) {
  if (x.empty()) throw InvalidArgument("standardize of an empty vector");
  if (!(eps > 0.0)) throw InvalidArgument("standardize eps must be positive");
  Standardized out;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) {
    out.mu = *lo;
    out.values.assign(x.size(), 0.0);
    return out;
  }
  out.mu = mean(x);
  out.sigma = stddev(x);
  const double scale = std::max(out.sigma, eps);
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = (x[i] - out.mu) / scale;
  return out;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace lgp
