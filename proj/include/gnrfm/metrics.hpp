#pragma once

#include <cstddef>
#include <vector>

#include "gnrfm/segmentation.hpp"

namespace gnrfm {

/// counts(a, b) = #{i : pred_i = a-th distinct pred label, truth_i = b-th distinct truth label};
/// distinct labels are taken in ascending order.
struct ContingencyTable {
  std::vector<std::vector<std::size_t>> counts;  // k_pred x k_true
  std::size_t n = 0;
};

ContingencyTable contingency(const Labels& pred, const Labels& truth);

/// Maximum-weight perfect matching on a square (padded) weight matrix.
/// Returns assignment[row] = column.
std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& weight);

/// Fraction of samples matched under the best label bijection.
double accuracy(const Labels& pred, const Labels& truth);

enum class NmiNorm { sqrt, mean };

/// I(pred; truth) / sqrt(H(pred) H(truth)) (or / mean of the entropies),
/// natural logarithms. If either entropy is zero: 1 for identical
/// partitions, else 0.
double nmi(const Labels& pred, const Labels& truth, NmiNorm norm = NmiNorm::sqrt);

}  // namespace gnrfm
