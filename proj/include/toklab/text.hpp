#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "toklab/errors.hpp"

namespace toklab {

inline const icu::Normalizer2& nfkc_normalizer() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
      throw Error("ICU NFKC normalizer unavailable");
    }
    return n;
  }();
  return *instance;
}

// NFKC-normalizes UTF-8 text.
inline std::string normalize(std::string_view text) {
  if (text.empty()) return {};
  const icu::UnicodeString in =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString out = nfkc_normalizer().normalize(in, status);
  if (U_FAILURE(status)) throw Error("NFKC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

// Splits UTF-8 into one string per code point. Invalid bytes pass through as
// single-byte units so malformed input cannot crash downstream loops.
inline std::vector<std::string> codepoints(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    std::int32_t offset = static_cast<std::int32_t>(i);
    UChar32 c;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), offset, static_cast<std::int32_t>(n), c);
    if (offset <= static_cast<std::int32_t>(i)) offset = static_cast<std::int32_t>(i) + 1;
    out.emplace_back(s.substr(i, static_cast<std::size_t>(offset) - i));
    i = static_cast<std::size_t>(offset);
  }
  return out;
}

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::int32_t offset = static_cast<std::int32_t>(i);
    UChar32 c;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), offset, static_cast<std::int32_t>(s.size()), c);
    if (offset <= static_cast<std::int32_t>(i)) offset = static_cast<std::int32_t>(i) + 1;
    i = static_cast<std::size_t>(offset);
    ++count;
  }
  return count;
}

// Splits on Unicode whitespace; never returns empty words.
inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  std::size_t i = 0;
  while (i < s.size()) {
    std::int32_t offset = static_cast<std::int32_t>(i);
    UChar32 c;
    U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), offset, static_cast<std::int32_t>(s.size()), c);
    if (offset <= static_cast<std::int32_t>(i)) offset = static_cast<std::int32_t>(i) + 1;
    const bool ws = c >= 0 && u_isWhitespace(c);
    if (ws) {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.append(s.substr(i, static_cast<std::size_t>(offset) - i));
    }
    i = static_cast<std::size_t>(offset);
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

inline std::string remove_whitespace(std::string_view s) {
  std::string out;
  for (const std::string& w : split_whitespace(s)) out += w;
  return out;
}

}  // namespace toklab
