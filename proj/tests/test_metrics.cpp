#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "gnrfm/metrics.hpp"
#include "gnrfm/rng.hpp"

using namespace gnrfm;

namespace {

// Best bijection by exhaustive search over permutations of the padded table.
double brute_accuracy(const Labels& pred, const Labels& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const std::size_t kp = t.counts.size(), kt = t.counts.front().size();
  const std::size_t k = std::max(kp, kt);
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t a = 0; a < kp; ++a)
      if (perm[a] < kt) hit += t.counts[a][perm[a]];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(t.n);
}

Labels random_labels(Rng& rng, std::size_t n, std::size_t k) {
  Labels l(n);
  for (int& x : l) x = static_cast<int>(rng.below(k));
  return l;
}

}  // namespace

TEST_CASE("accuracy examples") {
  const Labels t{0, 0, 1, 1, 2, 2};
  CHECK(accuracy(t, t) == 1.0);
  CHECK(accuracy(Labels{1, 1, 0, 0}, Labels{0, 0, 1, 1}) == 1.0);
  CHECK(accuracy(Labels{0, 0, 1, 1, 2, 2}, Labels{0, 0, 0, 1, 1, 1}) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(brute_accuracy(Labels{0, 0, 1, 1, 2, 2}, Labels{0, 0, 0, 1, 1, 1}) == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(accuracy(Labels{0, 1}, Labels{0}), DimensionError);
  CHECK_THROWS_AS(accuracy(Labels{}, Labels{}), ParameterError);
}

TEST_CASE("accuracy of a constant prediction is the largest truth share") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 5 + rng.below(40);
    const Labels truth = random_labels(rng, n, 1 + rng.below(5));
    const Labels pred(n, 7);
    std::vector<std::size_t> counts(8, 0);
    for (int x : truth) ++counts[static_cast<std::size_t>(x)];
    const double largest = static_cast<double>(*std::max_element(counts.begin(), counts.end())) / static_cast<double>(n);
    CHECK(accuracy(pred, truth) >= largest - 1e-15);
  }
}

TEST_CASE("Hungarian accuracy equals brute force on 500 random pairs") {
  Rng rng(2024);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 1 + rng.below(60);
    const Labels a = random_labels(rng, n, 1 + rng.below(6));
    const Labels b = random_labels(rng, n, 1 + rng.below(6));
    CHECK(accuracy(a, b) == doctest::Approx(brute_accuracy(a, b)).epsilon(1e-15));
  }
}

TEST_CASE("hungarian_max on a known matrix") {
  const std::vector<std::vector<double>> w{{1, 2, 3}, {2, 4, 6}, {3, 6, 9}};
  const auto a = hungarian_max(w);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) total += w[i][a[i]];
  CHECK(total == 14.0);  // rearrangement: the diagonal 1 + 4 + 9 is optimal
  CHECK_THROWS_AS(hungarian_max({{1, 2}}), DimensionError);
}

TEST_CASE("nmi examples") {
  const Labels t{0, 0, 1, 1, 2, 2};
  CHECK(nmi(t, t) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nmi(Labels{0, 0, 0, 0}, Labels{0, 0, 1, 1}) == 0.0);
  CHECK(std::abs(nmi(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1})) <= 1e-12);
  CHECK(nmi(Labels{3, 3, 3}, Labels{1, 1, 1}) == 1.0);
  CHECK(nmi(Labels{5, 5, 9, 9}, Labels{0, 0, 1, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(nmi(Labels{0}, Labels{0, 1}), DimensionError);
}

TEST_CASE("nmi: independent balanced partitions, symmetry, relabeling") {
  // 4 x 4 grid: rows and columns of the grid are independent partitions.
  Labels a, b;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      a.push_back(i);
      b.push_back(j);
    }
  CHECK(std::abs(nmi(a, b)) <= 1e-12);
  CHECK(std::abs(nmi(a, b, NmiNorm::mean)) <= 1e-12);
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.below(50);
    const Labels x = random_labels(rng, n, 1 + rng.below(6));
    const Labels y = random_labels(rng, n, 1 + rng.below(6));
    CHECK(nmi(x, y) == nmi(y, x));
    CHECK(nmi(x, y, NmiNorm::mean) == nmi(y, x, NmiNorm::mean));
    Labels xr = x;
    for (int& v : xr) v = 10 - 3 * v;
    CHECK(nmi(xr, y) == doctest::Approx(nmi(x, y)).epsilon(1e-12));
    CHECK(accuracy(xr, y) == accuracy(x, y));
    const double v = nmi(x, y);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(nmi(x, y, NmiNorm::mean) <= v + 1e-12);  // arithmetic mean >= geometric mean
  }
}
