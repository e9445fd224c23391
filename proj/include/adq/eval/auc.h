#pragma once

#include <span>

namespace adq::eval {

/// Mann-Whitney AUC: (concordant + 0.5 tied) / (pos * neg). Labels are 0 or 1.
/// Throws DataError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// O(n^2) pair counting; same contract as auc.
double auc_brute_force(std::span<const double> scores, std::span<const int> labels);

}  // namespace adq::eval
