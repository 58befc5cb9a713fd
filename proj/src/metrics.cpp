#include "gnrfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gnrfm/matrix.hpp"

namespace gnrfm {

namespace {

void check_pair(const Labels& pred, const Labels& truth, const char* what) {
  if (pred.size() != truth.size())
    throw DimensionError(std::string(what) + ": label vectors differ in length (" +
                         std::to_string(pred.size()) + " vs " + std::to_string(truth.size()) + ")");
  if (pred.empty()) throw ParameterError(std::string(what) + ": empty label vectors");
}

std::map<int, std::size_t> index_of(const Labels& l) {
  std::map<int, std::size_t> m;
  for (int x : l) m.emplace(x, 0);
  std::size_t i = 0;
  for (auto& [label, idx] : m) idx = i++;
  return m;
}

// Entropy terms are summed in sorted order so the result does not depend on
// which side of the table they came from.
double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double entropy(const std::vector<std::size_t>& sizes, double n) {
  std::vector<double> terms;
  for (std::size_t c : sizes)
    if (c > 0) {
      const double q = static_cast<double>(c) / n;
      terms.push_back(-q * std::log(q));
    }
  return sorted_sum(std::move(terms));
}

}  // namespace

ContingencyTable contingency(const Labels& pred, const Labels& truth) {
  check_pair(pred, truth, "contingency");
  const auto pi = index_of(pred);
  const auto ti = index_of(truth);
  ContingencyTable t;
  t.n = pred.size();
  t.counts.assign(pi.size(), std::vector<std::size_t>(ti.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++t.counts[pi.at(pred[i])][ti.at(truth[i])];
  return t;
}

std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& weight) {
  const std::size_t n = weight.size();
  for (const auto& row : weight)
    if (row.size() != n) throw DimensionError("hungarian_max: weight matrix must be square");
  if (n == 0) return {};
  double wmax = 0.0;
  for (const auto& row : weight)
    for (double w : row) wmax = std::max(wmax, w);

  // Shortest augmenting path with potentials on cost = wmax - weight; 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = (wmax - weight[i0 - 1][j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t j = 1; j <= n; ++j) assign[match[j] - 1] = j - 1;
  return assign;
}

double accuracy(const Labels& pred, const Labels& truth) {
  const ContingencyTable t = contingency(pred, truth);
  const std::size_t kp = t.counts.size();
  const std::size_t kt = t.counts.front().size();
  const std::size_t k = std::max(kp, kt);
  std::vector<std::vector<double>> w(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < kp; ++a)
    for (std::size_t b = 0; b < kt; ++b) w[a][b] = static_cast<double>(t.counts[a][b]);
  const auto assign = hungarian_max(w);
  std::size_t hit = 0;
  for (std::size_t a = 0; a < kp; ++a)
    if (assign[a] < kt) hit += t.counts[a][assign[a]];
  return static_cast<double>(hit) / static_cast<double>(t.n);
}

double nmi(const Labels& pred, const Labels& truth, NmiNorm norm) {
  const ContingencyTable t = contingency(pred, truth);
  const std::size_t kp = t.counts.size();
  const std::size_t kt = t.counts.front().size();
  const double n = static_cast<double>(t.n);
  std::vector<std::size_t> rows(kp, 0), cols(kt, 0);
  for (std::size_t a = 0; a < kp; ++a)
    for (std::size_t b = 0; b < kt; ++b) {
      rows[a] += t.counts[a][b];
      cols[b] += t.counts[a][b];
    }
  const double hp = entropy(rows, n);
  const double ht = entropy(cols, n);
  if (hp == 0.0 || ht == 0.0) {
    // Identical partitions: every row and column of the table has one nonzero.
    if (kp != kt) return 0.0;
    for (std::size_t a = 0; a < kp; ++a) {
      std::size_t nz = 0;
      for (std::size_t b = 0; b < kt; ++b) nz += t.counts[a][b] > 0;
      if (nz != 1) return 0.0;
    }
    return 1.0;
  }
  std::vector<double> terms;
  for (std::size_t a = 0; a < kp; ++a)
    for (std::size_t b = 0; b < kt; ++b) {
      const std::size_t c = t.counts[a][b];
      if (c == 0) continue;
      const double q = static_cast<double>(c) / n;
      const double outer = static_cast<double>(rows[a]) * static_cast<double>(cols[b]);
      terms.push_back(q * std::log(n * static_cast<double>(c) / outer));
    }
  const double mi = std::max(0.0, sorted_sum(std::move(terms)));
  const double denom = norm == NmiNorm::sqrt ? std::sqrt(hp * ht) : 0.5 * (hp + ht);
  return std::clamp(mi / denom, 0.0, 1.0);
}

}  // namespace gnrfm
