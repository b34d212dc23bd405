#ifndef ADFUSE_TFIDF_ORACLE_HPP
#define ADFUSE_TFIDF_ORACLE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "adfuse/text_features.hpp"

namespace adfuse::testing {

/// Brute-force top-k: linear scans for tf and df, then repeated extraction of
/// the best remaining token (higher score, then smaller token).
inline std::vector<std::string> brute_force_top_k(const TranscriptionRecord& record,
                                                  const std::vector<TranscriptionRecord>& corpus,
                                                  std::size_t k) {
  std::vector<std::string> distinct;
  for (const auto& w : record.words) {
    bool seen = false;
    for (const auto& d : distinct) seen = seen || d == w.token;
    if (!seen) distinct.push_back(w.token);
  }
  std::vector<double> score(distinct.size());
  for (std::size_t t = 0; t < distinct.size(); ++t) {
    double tf = 0;
    for (const auto& w : record.words) tf += w.token == distinct[t] ? 1 : 0;
    double df = 0;
    for (const auto& doc : corpus) {
      bool present = false;
      for (const auto& w : doc.words) present = present || w.token == distinct[t];
      df += present ? 1 : 0;
    }
    if (df == 0) df = 1;
    score[t] = tf * std::log(static_cast<double>(corpus.size()) / df);
  }
  std::vector<bool> taken(distinct.size(), false);
  std::vector<std::string> out;
  while (out.size() < k) {
    int best = -1;
    for (std::size_t t = 0; t < distinct.size(); ++t) {
      if (taken[t]) continue;
      if (best < 0 || score[t] > score[best] ||
          (score[t] == score[best] && distinct[t] < distinct[best])) {
        best = static_cast<int>(t);
      }
    }
    if (best < 0) break;
    taken[best] = true;
    out.push_back(distinct[best]);
  }
  return out;
}

}  // namespace adfuse::testing

#endif  // ADFUSE_TFIDF_ORACLE_HPP
