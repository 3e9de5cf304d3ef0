#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgp/error.hpp"
#include "lgp/metrics.hpp"
#include "oracles.hpp"

using namespace lgp;

namespace {

struct Instance {
  std::size_t n;
  std::vector<Vec> scores;
  std::vector<LabelVector> gold;
  std::vector<std::vector<std::size_t>> pred;
};

// Small random instances with frequent ties (scores on a coarse grid).
Instance random_instance(Rng& rng) {
  Instance in;
  in.n = 1 + rng.index(5);
  const std::size_t q = 1 + rng.index(25);
  for (std::size_t i = 0; i < q; ++i) {
    Vec s(in.n);
    for (double& v : s) v = static_cast<double>(rng.index(7)) / 2.0 - 1.5;
    LabelVector y(in.n);
    for (auto& b : y) b = rng.uniform01() < 0.35;
    std::vector<std::size_t> p;
    for (std::size_t c = 0; c < in.n; ++c) {
      if (rng.uniform01() < 0.3) p.push_back(c);
    }
    in.scores.push_back(s);
    in.gold.push_back(y);
    in.pred.push_back(p);
  }
  return in;
}

}  // namespace

TEST_CASE("macro F1 examples") {
  const std::vector<LabelVector> gold{{1, 0}, {0, 1}, {1, 0}};
  CHECK(macro_f1(std::vector<std::vector<std::size_t>>{{0}, {1}, {0}}, gold, 2) == 1.0);
  // class 0: TP=1 FP=1 FN=0 (2/3); class 1: TP=0 FN=1
  const std::vector<LabelVector> g2{{1, 0}, {0, 1}};
  CHECK(std::abs(macro_f1(std::vector<std::vector<std::size_t>>{{0}, {0}}, g2, 2) - 1.0 / 3.0) < 1e-12);
  CHECK(macro_f1(std::vector<std::vector<std::size_t>>{{}, {}, {}}, gold, 2) == 0.0);
  CHECK_THROWS_AS(macro_f1(std::vector<std::vector<std::size_t>>{}, std::vector<LabelVector>{}, 2), InvalidArgument);
  CHECK_THROWS_AS(macro_f1(std::vector<std::vector<std::size_t>>{{5}}, std::vector<LabelVector>{{1, 0}}, 2), ShapeError);
}

TEST_CASE("AUC examples") {
  CHECK(binary_auc(Vec{0.9, 0.1, 0.5}, std::vector<std::uint8_t>{1, 0, 1}) == 1.0);
  CHECK(binary_auc(Vec{0.3, 0.3, 0.3, 0.3}, std::vector<std::uint8_t>{1, 0, 1, 0}) == 0.5);
  CHECK(binary_auc(Vec{0.1, 0.9}, std::vector<std::uint8_t>{1, 0}) == 0.0);
  CHECK_THROWS_AS(binary_auc(Vec{0.1, 0.9}, std::vector<std::uint8_t>{1, 1}), DegenerateInput);

  // class 1 is all-positive and skipped; class 0 is perfect
  const std::vector<Vec> s{{0.9, 0.1}, {0.2, 0.3}};
  const std::vector<LabelVector> g{{1, 1}, {0, 1}};
  CHECK(macro_auc(s, g, 2) == 1.0);
  const std::vector<LabelVector> all{{1, 1}, {1, 1}};
  CHECK_THROWS_AS(macro_auc(s, all, 2), DegenerateInput);
}

TEST_CASE("metrics equal brute-force references on random instances") {
  Rng rng(61);
  int auc_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng);
    CHECK(std::abs(macro_f1(in.pred, in.gold, in.n) - oracle::macro_f1(in.pred, in.gold, in.n)) <= 1e-9);
    const double ref = oracle::macro_auc(in.scores, in.gold, in.n);
    if (ref < 0) {
      CHECK_THROWS_AS(macro_auc(in.scores, in.gold, in.n), DegenerateInput);
    } else {
      CHECK(std::abs(macro_auc(in.scores, in.gold, in.n) - ref) <= 1e-9);
      ++auc_checked;
    }
  }
  CHECK(auc_checked > 500);
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
  Rng rng(62);
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng);
    if (oracle::macro_auc(in.scores, in.gold, in.n) < 0) continue;
    const double base = macro_auc(in.scores, in.gold, in.n);
    const double a = rng.uniform(0.1, 10), b = rng.uniform(-5, 5);
    std::vector<Vec> affine = in.scores, expd = in.scores, cubed = in.scores;
    for (std::size_t q = 0; q < in.scores.size(); ++q) {
      for (std::size_t c = 0; c < in.n; ++c) {
        affine[q][c] = a * in.scores[q][c] + b;
        expd[q][c] = std::exp(in.scores[q][c]);
        cubed[q][c] = std::pow(in.scores[q][c], 3);
      }
    }
    CHECK(macro_auc(affine, in.gold, in.n) == base);
    CHECK(macro_auc(expd, in.gold, in.n) == base);
    CHECK(macro_auc(cubed, in.gold, in.n) == base);
  }
}

TEST_CASE("metrics are invariant to query and class order") {
  Rng rng(63);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = random_instance(rng);
    const double f1 = macro_f1(in.pred, in.gold, in.n);
    const double ref_auc = oracle::macro_auc(in.scores, in.gold, in.n);

    std::vector<std::size_t> qp(in.gold.size());
    std::iota(qp.begin(), qp.end(), std::size_t{0});
    rng.shuffle(qp);
    std::vector<std::size_t> cp(in.n);
    std::iota(cp.begin(), cp.end(), std::size_t{0});
    rng.shuffle(cp);

    Instance out;
    out.n = in.n;
    for (std::size_t q : qp) {
      Vec s(in.n);
      LabelVector y(in.n);
      for (std::size_t c = 0; c < in.n; ++c) {
        s[cp[c]] = in.scores[q][c];
        y[cp[c]] = in.gold[q][c];
      }
      std::vector<std::size_t> p;
      for (std::size_t c : in.pred[q]) p.push_back(cp[c]);
      out.scores.push_back(s);
      out.gold.push_back(y);
      out.pred.push_back(p);
    }
    CHECK(std::abs(macro_f1(out.pred, out.gold, out.n) - f1) <= 1e-12);
    if (ref_auc >= 0) CHECK(std::abs(macro_auc(out.scores, out.gold, out.n) - macro_auc(in.scores, in.gold, in.n)) <= 1e-12);
  }
}
