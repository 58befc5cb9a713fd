#include <algorithm>
#include <limits>
#include <span>

#include "gnrfm/rng.hpp"
#include "gnrfm/segmentation.hpp"

namespace gnrfm {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Matrix plus_plus_seeds(const Matrix& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.rows();
  Matrix centers(k, pts.cols());
  auto put = [&](std::size_t c, std::size_t i) {
    const auto src = pts.row(i);
    std::copy(src.begin(), src.end(), centers.row(c).begin());
  };
  put(0, rng.below(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(pts.row(i), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double x : d2) total += x;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (d2[i] > 0.0) pick = i;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    put(c, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(pts.row(i), centers.row(c)));
  }
  return centers;
}

KMeansResult lloyd(const Matrix& pts, Matrix centers, std::size_t max_iter) {
  const std::size_t n = pts.rows();
  const std::size_t k = centers.rows();
  const std::size_t d = pts.cols();
  KMeansResult res;
  res.labels.assign(n, -1);
  std::vector<double> best(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int arg = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dist = sq_dist(pts.row(i), centers.row(c));
        if (dist < bd) {
          bd = dist;
          arg = static_cast<int>(c);
        }
      }
      best[i] = bd;
      if (res.labels[i] != arg) {
        res.labels[i] = arg;
        changed = true;
      }
    }
    if (!changed && it > 0) break;

    Matrix sums(k, d);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.labels[i]);
      ++count[c];
      auto dst = sums.row(c);
      const auto src = pts.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) {
        // Empty cluster: move it onto the point worst served by its center.
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
          if (best[i] > best[far]) far = i;
        const auto src = pts.row(far);
        std::copy(src.begin(), src.end(), centers.row(c).begin());
        best[far] = 0.0;
        changed = true;
        continue;
      }
      auto dst = centers.row(c);
      const auto s = sums.row(c);
      for (std::size_t j = 0; j < d; ++j) dst[j] = s[j] / static_cast<double>(count[c]);
    }
  }
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res.inertia += sq_dist(pts.row(i), centers.row(static_cast<std::size_t>(res.labels[i])));
  res.centers = std::move(centers);
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opt) {
  if (points.rows() == 0) throw ParameterError("kmeans: no points");
  if (k < 1 || k > points.rows()) throw ParameterError("kmeans: k must lie in [1, number of points]");
  if (opt.restarts < 1 || opt.max_iter < 1) throw ParameterError("kmeans: restarts and max_iter must be >= 1");
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    KMeansResult cur = lloyd(points, plus_plus_seeds(points, k, rng), opt.max_iter);
    if (!have || cur.inertia < best.inertia) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

}  // namespace gnrfm
