// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "lineread/alphabet.hpp"
#include "lineread/errors.hpp"

namespace lineread {

template <typename Sym>
EditCounts edit_counts(const std::vector<Sym>& ref, const std::vector<Sym>& hyp) {
  const size_t m = ref.size(), n = hyp.size();
  // d[i][j] = distance between ref[0..i) and hyp[0..j)
  std::vector<size_t> d((m + 1) * (n + 1));
  auto at = [&](size_t i, size_t j) -> size_t& { return d[i * (n + 1) + j]; };
  for (size_t i = 0; i <= m; ++i) at(i, 0) = i;
  for (size_t j = 0; j <= n; ++j) at(0, j) = j;
  for (size_t i = 1; i <= m; ++i)
    for (size_t j = 1; j <= n; ++j) {
      const size_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const size_t del = at(i - 1, j) + 1;
      const size_t ins = at(i, j - 1) + 1;
      at(i, j) = std::min({sub, del, ins});
    }

  EditCounts counts;
  counts.reference_length = m;
  // Backtrace one optimal alignment, preferring match/substitution.
  size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++counts.substitutions;
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

template EditCounts edit_counts<std::string>(const std::vector<std::string>&,
                                             const std::vector<std::string>&);
template EditCounts edit_counts<char>(const std::vector<char>&, const std::vector<char>&);
template EditCounts edit_counts<int>(const std::vector<int>&, const std::vector<int>&);

EditCounts char_edit_counts(const std::string& reference, const std::string& hypothesis) {
  return edit_counts(utf8_split(reference), utf8_split(hypothesis));
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

EditCounts word_edit_counts(const std::string& reference, const std::string& hypothesis) {
  return edit_counts(whitespace_tokens(reference), whitespace_tokens(hypothesis));
}

ErrorRate cer(const std::string& reference, const std::string& hypothesis) {
  const auto counts = char_edit_counts(reference, hypothesis);
  if (counts.reference_length == 0)
    throw NumericError("cer: empty reference makes the metric undefined");
  return {counts.distance(), counts.reference_length};
}

ErrorRate wer(const std::string& reference, const std::string& hypothesis) {
  const auto counts = word_edit_counts(reference, hypothesis);
  if (counts.reference_length == 0)
    throw NumericError("wer: reference has no words, metric undefined");
  return {counts.distance(), counts.reference_length};
}

std::pair<ErrorRate, ErrorRate> corpus_metrics(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  ErrorRate c{0, 0}, w{0, 0};
  for (size_t i = 0; i < pairs.size(); ++i) {
    try {
      const auto pc = cer(pairs[i].first, pairs[i].second);
      const auto pw = wer(pairs[i].first, pairs[i].second);
      c.edits += pc.edits;
      c.reference_length += pc.reference_length;
      w.edits += pw.edits;
      w.reference_length += pw.reference_length;
    } catch (const NumericError& e) {
      throw NumericError("pair " + std::to_string(i) + ": " + e.what());
    }
  }
  return {c, w};
}

void write_eval_report(std::ostream& os, const std::vector<std::string>& ids,
                       const std::vector<std::pair<std::string, std::string>>& pairs) {
  char buf[64];
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto pc = cer(pairs[i].first, pairs[i].second);
    const auto pw = wer(pairs[i].first, pairs[i].second);
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", pc.value(), pw.value());
    os << ids[i] << '\t' << buf << '\n';
  }
  const auto [c, w] = corpus_metrics(pairs);
  std::snprintf(buf, sizeof(buf), "%.4f\t%.4f", c.value(), w.value());
  os << "corpus\t" << buf << '\n';
}

}  // namespace lineread
