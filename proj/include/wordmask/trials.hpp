#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "wordmask/common.hpp"

namespace wordmask {

struct Embedding {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<double> vector;
};

struct Trial {
  std::string enroll_id;
  std::string test_id;
  bool is_target = false;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// All unordered utterance pairs, each once, enroll = lexicographically
// smaller id; n(n-1)/2 trials total. With ordered = true both directions
// are emitted (n(n-1) trials), matching an enrollment-vs-test sweep where
// each utterance serves on both sides.
inline std::vector<Trial> enumerate_trials(const std::vector<Embedding>& embs,
                                           bool ordered = false) {
  if (embs.size() < 2) throw ContractError("need at least 2 utterances");
  std::set<std::string> ids;
  for (const auto& e : embs)
    if (!ids.insert(e.utterance_id).second)
      throw ContractError("duplicate utterance id '" + e.utterance_id + "'");

  std::vector<const Embedding*> order;
  order.reserve(embs.size());
  for (const auto& e : embs) order.push_back(&e);
  std::sort(order.begin(), order.end(),
            [](const Embedding* a, const Embedding* b) {
              return a->utterance_id < b->utterance_id;
            });

  std::vector<Trial> trials;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      bool tgt = order[i]->speaker_id == order[j]->speaker_id;
      trials.push_back({order[i]->utterance_id, order[j]->utterance_id, tgt});
      if (ordered)
        trials.push_back({order[j]->utterance_id, order[i]->utterance_id, tgt});
    }
  }
  return trials;
}

inline double cosine_score(const Embedding& a, const Embedding& b) {
  if (a.vector.size() != b.vector.size())
    throw ContractError("embedding dimension mismatch: " +
                        std::to_string(a.vector.size()) + " vs " +
                        std::to_string(b.vector.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.vector.size(); ++i) {
    dot += a.vector[i] * b.vector[i];
    na += a.vector[i] * a.vector[i];
    nb += b.vector[i] * b.vector[i];
  }
  if (na == 0.0 || nb == 0.0) throw ContractError("zero-norm embedding");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// EER via a threshold sweep over score midpoints with linear interpolation
// at the FAR/FRR crossing. FRR(t) = fraction of targets < t,
// FAR(t) = fraction of non-targets >= t.
inline EerResult eer(const std::vector<std::pair<double, bool>>& scores) {
  std::size_t n_target = 0, n_nontarget = 0;
  for (const auto& [s, tgt] : scores) (tgt ? n_target : n_nontarget) += 1;
  if (n_target == 0 || n_nontarget == 0)
    throw ContractError("need both target and non-target scores");

  std::vector<std::pair<double, bool>> sorted = scores;
  std::sort(sorted.begin(), sorted.end());

  // Candidate thresholds: below the minimum, every midpoint between
  // distinct consecutive scores, above the maximum.
  std::vector<double> thresholds;
  thresholds.push_back(sorted.front().first - 1.0);
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first > sorted[i - 1].first)
      thresholds.push_back(0.5 * (sorted[i - 1].first + sorted[i].first));
  thresholds.push_back(sorted.back().first + 1.0);

  // One pass: at threshold k, counts of targets/non-targets strictly below.
  std::vector<double> frr(thresholds.size()), far(thresholds.size());
  std::size_t idx = 0, tgt_below = 0, non_below = 0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    while (idx < sorted.size() && sorted[idx].first < thresholds[k]) {
      (sorted[idx].second ? tgt_below : non_below) += 1;
      ++idx;
    }
    frr[k] = static_cast<double>(tgt_below) / n_target;
    far[k] = static_cast<double>(n_nontarget - non_below) / n_nontarget;
  }

  // far - frr falls from +1 to -1; find the sign change and interpolate.
  for (std::size_t k = 0; k + 1 < thresholds.size(); ++k) {
    double d0 = far[k] - frr[k];
    double d1 = far[k + 1] - frr[k + 1];
    if (d0 == 0.0)
      return {0.5 * (far[k] + frr[k]), thresholds[k]};
    if (d0 > 0.0 && d1 <= 0.0) {
      if (d1 == 0.0) return {0.5 * (far[k + 1] + frr[k + 1]), thresholds[k + 1]};
      double alpha = d0 / (d0 - d1);
      double e = frr[k] + alpha * (frr[k + 1] - frr[k]);
      double t = thresholds[k] + alpha * (thresholds[k + 1] - thresholds[k]);
      return {e, t};
    }
  }
  // Monotonicity guarantees a crossing; fall through only on degenerate
  // floating-point input.
  return {0.5 * (far.back() + frr.back()), thresholds.back()};
}

}  // namespace wordmask
