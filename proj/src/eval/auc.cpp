#include "adq/eval/auc.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "adq/error.h"

namespace adq::eval {

namespace {

struct Counts {
  long long pos = 0;
  long long neg = 0;
};

Counts check(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("auc: scores and labels differ in length");
  Counts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++c.pos;
    } else if (labels[i] == 0) {
      ++c.neg;
    } else {
      throw DataError("auc: labels must be 0 or 1");
    }
    if (std::isnan(scores[i])) throw DataError("auc: NaN score");
  }
  if (c.pos == 0 || c.neg == 0) throw DataError("auc: both classes must be present");
  return c;
}

/// 2 * concordant + tied, kept integral so both implementations divide identical numbers.
double finish(long long twice_credit, const Counts& c) {
  return static_cast<double>(twice_credit) / (2.0 * static_cast<double>(c.pos) * static_cast<double>(c.neg));
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = check(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  long long twice = 0;
  long long neg_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    long long pos_here = 0;
    long long neg_here = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos_here : neg_here) += 1;
      ++j;
    }
    twice += pos_here * (2 * neg_below + neg_here);
    neg_below += neg_here;
    i = j;
  }
  return finish(twice, c);
}

double auc_brute_force(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = check(scores, labels);
  long long twice = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        twice += 2;
      } else if (scores[i] == scores[j]) {
        twice += 1;
      }
    }
  }
  return finish(twice, c);
}

}  // namespace adq::eval
