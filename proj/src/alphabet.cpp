// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/alphabet.hpp"

#include <fstream>
#include <sstream>

#include "lineread/errors.hpp"

namespace lineread {

std::vector<std::string> utf8_split(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if ((c & 0x80u) == 0)
      len = 1;
    else if ((c & 0xE0u) == 0xC0u)
      len = 2;
    else if ((c & 0xF0u) == 0xE0u)
      len = 3;
    else if ((c & 0xF8u) == 0xF0u)
      len = 4;
    if (i + len > text.size()) len = 1;
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Alphabet::Alphabet(const std::vector<std::string>& content_chars) {
  symbols_ = {"<S>", "<E>", "<P>"};
  symbols_.insert(symbols_.end(), content_chars.begin(), content_chars.end());
  for (size_t i = 0; i < symbols_.size(); ++i) {
    if (i >= 3 && index_.count(symbols_[i]))
      throw ConfigError("alphabet: duplicate character '" + symbols_[i] + "'");
    index_[symbols_[i]] = static_cast<int>(i);
  }
}

Alphabet Alphabet::from_lines(const std::vector<std::string>& lines,
                              const std::string& origin) {
  if (lines.size() < 3)
    throw DataError("alphabet " + origin + ": missing 3-line specials header");
  Alphabet a;
  a.symbols_.assign(lines.begin(), lines.begin() + 3);
  for (size_t i = 3; i < lines.size(); ++i) {
    const std::string& ch = lines[i];
    if (ch.empty())
      throw DataError("alphabet " + origin + ": empty character at line " +
                      std::to_string(i + 1));
    a.symbols_.push_back(ch);
  }
  for (size_t i = 0; i < a.symbols_.size(); ++i) {
    if (i >= 3 && a.index_.count(a.symbols_[i]))
      throw DataError("alphabet " + origin + ": duplicate character '" + a.symbols_[i] +
                      "' at line " + std::to_string(i + 1));
    a.index_[a.symbols_[i]] = static_cast<int>(i);
  }
  return a;
}

Alphabet Alphabet::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open alphabet: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing blank line is file formatting, not a character.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return from_lines(lines, path);
}

void Alphabet::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write alphabet: " + path);
  for (const auto& s : symbols_) os << s << '\n';
}

int Alphabet::index_of(const std::string& ch, size_t byte_offset) const {
  auto it = index_.find(ch);
  if (it == index_.end())
    throw VocabularyError("character '" + ch + "' at byte offset " +
                          std::to_string(byte_offset) + " is not in the alphabet");
  return it->second;
}

TokenSequence encode_transcription(const std::string& text, const Alphabet& alphabet,
                                   size_t max_len) {
  const auto chars = utf8_split(text);
  if (chars.size() + 2 > max_len)
    throw DataError("transcription of " + std::to_string(chars.size()) +
                    " characters does not fit max length " + std::to_string(max_len));
  TokenSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(Alphabet::kStart);
  size_t offset = 0;
  for (const auto& ch : chars) {
    seq.ids.push_back(alphabet.index_of(ch, offset));
    offset += ch.size();
  }
  seq.ids.push_back(Alphabet::kEnd);
  seq.ids.resize(max_len, Alphabet::kPad);
  seq.content_length = chars.size();
  return seq;
}

std::string decode_ids(const std::vector<int>& ids, const Alphabet& alphabet) {
  std::string out;
  for (int id : ids) {
    if (id == Alphabet::kEnd || id == Alphabet::kPad) break;
    if (id == Alphabet::kStart) continue;
    out += alphabet.symbol(id);
  }
  return out;
}

std::string decode_transcription(const TokenSequence& seq, const Alphabet& alphabet) {
  return decode_ids(seq.ids, alphabet);
}

}  // namespace lineread
