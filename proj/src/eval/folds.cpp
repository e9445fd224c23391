#include "adq/eval/folds.h"

#include <algorithm>
#include <map>

#include "adq/error.h"
#include "adq/models/random.h"

namespace adq::eval {

std::vector<std::size_t> FoldPlan::train_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != f) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_kfold(const std::vector<int>& labels, int k, std::uint64_t seed,
                          const std::vector<std::string>* groups) {
  if (k < 2) throw ParameterError("k must be at least 2");
  if (groups && groups->size() != labels.size()) {
    throw DataError("stratified_kfold: group ids and labels differ in length");
  }
  // Units are samples, or groups of samples in first-appearance order.
  std::vector<std::vector<std::size_t>> units;
  std::vector<int> unit_label;
  if (groups) {
    std::map<std::string, std::size_t> unit_of;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto [it, fresh] = unit_of.try_emplace((*groups)[i], units.size());
      if (fresh) {
        units.emplace_back();
        unit_label.push_back(labels[i]);
      } else if (unit_label[it->second] != labels[i]) {
        throw DataError("stratified_kfold: group '" + (*groups)[i] + "' mixes labels");
      }
      units[it->second].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      units.push_back({i});
      unit_label.push_back(labels[i]);
    }
  }
  if (units.size() < static_cast<std::size_t>(k)) {
    throw DataError("stratified_kfold: fewer units than folds");
  }

  std::vector<int> classes(unit_label.begin(), unit_label.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  models::Rng rng = models::make_rng(seed, 11);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.assign(static_cast<std::size_t>(k), {});
  plan.fold_of.assign(labels.size(), -1);
  std::size_t dealt = 0;
  for (int c : classes) {
    std::vector<std::size_t> members;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (unit_label[u] == c) members.push_back(u);
    }
    models::shuffle(members, rng);
    for (std::size_t u : members) {
      const int f = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
      for (std::size_t i : units[u]) {
        plan.fold_of[i] = f;
        plan.folds[static_cast<std::size_t>(f)].push_back(i);
      }
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

}  // namespace adq::eval
