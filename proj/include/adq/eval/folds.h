#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adq::eval {

struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;  ///< sample indices, ascending
  std::vector<int> fold_of;                     ///< per sample

  /// Indices outside fold f, ascending.
  std::vector<std::size_t> train_indices(int f) const;
  const std::vector<std::size_t>& test_indices(int f) const { return folds[static_cast<std::size_t>(f)]; }
};

/// Shuffles each class with the seed and deals the classes round-robin onto folds, so fold sizes
/// and per-class counts differ by at most one. With `groups`, samples sharing a group id move
/// together and are dealt as a unit; a group must carry a single label.
FoldPlan stratified_kfold(const std::vector<int>& labels, int k, std::uint64_t seed,
                          const std::vector<std::string>* groups = nullptr);

}  // namespace adq::eval
