// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace lineread {

// Splits a UTF-8 string into codepoint substrings. Malformed bytes are kept
// as single-byte symbols.
std::vector<std::string> utf8_split(const std::string& text);

// Character inventory with the three reserved control symbols at fixed
// indices: <S> start, <E> end, <P> padding; content characters follow in
// file order.
class Alphabet {
 public:
  static constexpr int kStart = 0;
  static constexpr int kEnd = 1;
  static constexpr int kPad = 2;

  Alphabet() = default;
  // Content symbols only; specials are added in front.
  explicit Alphabet(const std::vector<std::string>& content_chars);

  // File format: three header lines naming the start/end/pad symbols,
  // then one content character per line. Line order defines indices.
  static Alphabet load(const std::string& path);
  static Alphabet from_lines(const std::vector<std::string>& lines, const std::string& origin);
  void save(const std::string& path) const;

  size_t size() const { return symbols_.size(); }
  const std::string& symbol(int index) const { return symbols_.at(index); }
  bool is_special(int index) const { return index < 3; }

  bool contains(const std::string& ch) const { return index_.count(ch) > 0; }
  // Index of a content character; VocabularyError names the character and
  // byte offset when unknown.
  int index_of(const std::string& ch, size_t byte_offset = 0) const;

  // All symbols including specials, in index order.
  const std::vector<std::string>& symbols() const { return symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Fixed-layout target sequence: <S>, characters, <E>, then <P> up to
// max_len positions.
struct TokenSequence {
  std::vector<int> ids;
  size_t content_length = 0;

  size_t max_len() const { return ids.size(); }
};

// Lays out <S> + text + <E> + padding to max_len. The text may hold at most
// max_len - 2 characters.
TokenSequence encode_transcription(const std::string& text, const Alphabet& alphabet,
                                   size_t max_len);

// Inverse of encode_transcription on well-formed sequences: the content
// characters between <S> and <E>.
std::string decode_transcription(const TokenSequence& seq, const Alphabet& alphabet);
std::string decode_ids(const std::vector<int>& ids, const Alphabet& alphabet);

}  // namespace lineread
