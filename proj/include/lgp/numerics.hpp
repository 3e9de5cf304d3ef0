#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <span>
#include <vector>

namespace lgp {

using Vec = std::vector<double>;

// Named flat parameter (or gradient) tensors.
using ParamMap = std::map<std::string, Vec>;

// Dense row-major matrix. Rows are handed out as spans so callers never
// index the flat buffer directly.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Mat from_rows(const std::vector<Vec>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

inline constexpr double kDefaultSigmaEps = 1e-8;

struct Standardized {
  Vec values;
  double mu = 0.0;
  double sigma = 0.0;
};

Vec softmax(std::span<const double> x);
double logsumexp(std::span<const double> x);
Vec mean_over_rows(const Mat& m);
Vec mean_over_features(const Mat& m);
double cosine(std::span<const double> u, std::span<const double> v);
Standardized standardize(std::span<const double> x, double eps = kDefaultSigmaEps);

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);
double mean(std::span<const double> x);
// Population standard deviation.
double stddev(std::span<const double> x);

bool all_finite(std::span<const double> x);

}  // namespace lgp
