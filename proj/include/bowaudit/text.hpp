#pragma once

// Code-point classification used by normalization and tokenization. Covers
// ASCII exactly and the common Unicode blocks seen in tweets; anything not
// recognised as a letter, digit, space or punctuation counts as a special
// character (emoji, symbols, control and replacement characters).

#include <string>
#include <string_view>
#include <vector>

#include "bowaudit/utf8.hpp"

namespace bowaudit::text {

enum class CharClass { letter, digit, space, punctuation, special };

inline bool is_space(char32_t c) {
  return c == U' ' || (c >= U'\t' && c <= U'\r') || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

inline bool is_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x0660 && c <= 0x0669) ||
         (c >= 0x06F0 && c <= 0x06F9) || (c >= 0x0966 && c <= 0x096F) ||
         (c >= 0xFF10 && c <= 0xFF19);
}

inline bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x037E: case 0x0387: case 0x055C: case 0x055D: case 0x0589:
    case 0x060C: case 0x061B: case 0x061F: case 0x06D4:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x2E00 && c <= 0x2E4F) || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0x3014 && c <= 0x301F) ||
         (c >= 0xFE50 && c <= 0xFE6B) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65);
}

inline bool is_letter(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
  if (c >= 0xC0 && c <= 0x024F) return c != 0xD7 && c != 0xF7;
  return (c >= 0x0250 && c <= 0x02AF) ||                                   // IPA
         (c >= 0x0300 && c <= 0x036F) ||                                   // combining marks
         (c >= 0x0370 && c <= 0x03FF && c != 0x037E && c != 0x0387) ||    // Greek
         (c >= 0x0400 && c <= 0x052F) ||                                   // Cyrillic
         (c >= 0x0531 && c <= 0x0587 && c != 0x055C && c != 0x055D) ||    // Armenian
         (c >= 0x05D0 && c <= 0x05EA) ||                                   // Hebrew
         (c >= 0x0620 && c <= 0x065F) || (c >= 0x066E && c <= 0x06D3) ||  // Arabic
         (c >= 0x0900 && c <= 0x0963) ||                                   // Devanagari
         (c >= 0x0E00 && c <= 0x0E7F) ||                                   // Thai
         (c >= 0x1E00 && c <= 0x1FFF) ||                                   // Latin/Greek ext.
         (c >= 0x3040 && c <= 0x30FF) ||                                   // kana
         (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||  // CJK
         (c >= 0xAC00 && c <= 0xD7AF);                                     // Hangul
}

inline CharClass classify(char32_t c) {
  if (is_space(c)) return CharClass::space;
  if (is_letter(c)) return CharClass::letter;
  if (is_digit(c)) return CharClass::digit;
  if (is_punctuation(c)) return CharClass::punctuation;
  return CharClass::special;
}

namespace detail {
// Case pairs in Latin Extended-A alternate, but the parity flips twice.
inline bool latin_ext_a_upper(char32_t c) {
  if (c <= 0x0137) return c % 2 == 0;
  if (c >= 0x0139 && c <= 0x0148) return c % 2 == 1;
  if (c >= 0x014A && c <= 0x0177) return c % 2 == 0;
  if (c == 0x0178) return true;
  if (c >= 0x0179 && c <= 0x017E) return c % 2 == 1;
  return false;
}
}  // namespace detail

inline bool is_upper(char32_t c) {
  if (c < 0x80) return c >= U'A' && c <= U'Z';
  if (c >= 0xC0 && c <= 0xDE) return c != 0xD7;
  if (c >= 0x0100 && c <= 0x017F) return detail::latin_ext_a_upper(c);
  return (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) || (c >= 0x0400 && c <= 0x042F);
}

inline char32_t to_lower(char32_t c) {
  if (!is_upper(c)) return c;
  if (c <= 0xDE) return c + 32;
  if (c == 0x0130) return U'i';
  if (c == 0x0178) return 0xFF;
  if (c <= 0x017F) return c + 1;
  if (c <= 0x03A9 || c >= 0x0410) return c + 32;
  return c + 80;  // U+0400..U+040F
}

// Splits on any whitespace (ASCII or Unicode space separators); drops empties.
inline std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  const std::u32string cps = utf8::decode(s);
  std::u32string cur;
  for (char32_t c : cps) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(utf8::encode(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(utf8::encode(cur));
  return out;
}

inline std::size_t count_whitespace_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in_token = false;
  for (char32_t c : utf8::decode(s)) {
    const bool space = is_space(c);
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

}  // namespace bowaudit::text
