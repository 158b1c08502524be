// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace lineread {

// Unit-cost edit operations of one optimal alignment. The split between the
// three counters can vary between optimal alignments; their sum always equals
// the Levenshtein distance.
struct EditCounts {
  size_t substitutions = 0;
  size_t insertions = 0;
  size_t deletions = 0;
  size_t reference_length = 0;

  size_t distance() const { return substitutions + insertions + deletions; }
};

// Exact error rate as a ratio of edit operations to reference length.
struct ErrorRate {
  size_t edits = 0;
  size_t reference_length = 0;

  double value() const { return static_cast<double>(edits) / static_cast<double>(reference_length); }
};

// Levenshtein distance over arbitrary symbol sequences (dynamic programming,
// unit costs), with an operation-count backtrace.
template <typename Sym>
EditCounts edit_counts(const std::vector<Sym>& ref, const std::vector<Sym>& hyp);

// Character-level counts; characters are UTF-8 codepoints.
EditCounts char_edit_counts(const std::string& reference, const std::string& hypothesis);
// Word-level counts; words are runs of non-whitespace.
EditCounts word_edit_counts(const std::string& reference, const std::string& hypothesis);

std::vector<std::string> whitespace_tokens(const std::string& text);

// Character error rate. The reference must be nonempty.
ErrorRate cer(const std::string& reference, const std::string& hypothesis);
// Word error rate. The reference must contain at least one word.
ErrorRate wer(const std::string& reference, const std::string& hypothesis);

// Micro average over a corpus: total edits divided by total reference length,
// at both granularities.
std::pair<ErrorRate, ErrorRate> corpus_metrics(
    const std::vector<std::pair<std::string, std::string>>& pairs);

// Evaluation report: one line per sample "id TAB cer TAB wer", then a footer
// with the corpus CER/WER to 4 decimals.
void write_eval_report(std::ostream& os, const std::vector<std::string>& ids,
                       const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace lineread
