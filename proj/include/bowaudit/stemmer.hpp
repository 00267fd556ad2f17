#pragma once

// Snowball English ("Porter2") stemmer, matching the reference Snowball 3.x
// english.sbl output. The implementation mirrors Snowball's cursor model:
// the word is a code-point string, backward steps work on a window
// [limit_backward, cursor), and slices [bra, ket) are what gets replaced.
//
// Input is not case-folded. Uppercase letters fall outside the vowel
// groupings and are treated like consonants, as the reference does.

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include "bowaudit/utf8.hpp"

namespace bowaudit {

namespace detail {

class EnglishStemmer {
 public:
  std::u32string stem(std::u32string word) {
    w_ = std::move(word);
    cursor_ = 0;
    limit_ = static_cast<int>(w_.size());
    limit_backward_ = 0;
    bra_ = 0;
    ket_ = limit_;

    if (exception1()) return w_;
    if (limit_ < 3) return w_;

    prelude();
    mark_regions();
    limit_backward_ = 0;

    const auto step = [this](auto&& fn) {
      cursor_ = limit_;
      (this->*fn)();
    };
    step(&EnglishStemmer::step_1a);
    step(&EnglishStemmer::step_1b);
    step(&EnglishStemmer::step_1c);
    step(&EnglishStemmer::step_2);
    step(&EnglishStemmer::step_3);
    step(&EnglishStemmer::step_4);
    step(&EnglishStemmer::step_5);

    if (y_found_) {
      for (auto& c : w_)
        if (c == U'Y') c = U'y';
    }
    return w_;
  }

 private:
  struct Among {
    std::u32string_view s;
    int result;
  };

  static bool is_vowel(char32_t c) {
    return c == U'a' || c == U'e' || c == U'i' || c == U'o' || c == U'u' || c == U'y';
  }
  static bool is_vowel_wxy(char32_t c) {
    return is_vowel(c) || c == U'w' || c == U'x' || c == U'Y';
  }
  static bool is_valid_li(char32_t c) {
    return std::u32string_view(U"cdeghkmnrt").find(c) != std::u32string_view::npos;
  }

  char32_t before(int pos) const { return w_[static_cast<std::size_t>(pos - 1)]; }
  bool r1() const { return p1_ <= cursor_; }
  bool r2() const { return p2_ <= cursor_; }

  // Backward grouping tests on the character just before the cursor.
  template <typename Pred>
  bool in_b(Pred pred) {
    if (cursor_ <= limit_backward_ || !pred(before(cursor_))) return false;
    --cursor_;
    return true;
  }
  template <typename Pred>
  bool out_b(Pred pred) {
    if (cursor_ <= limit_backward_ || pred(before(cursor_))) return false;
    --cursor_;
    return true;
  }
  // Move backward until the character before the cursor satisfies pred.
  template <typename Pred>
  bool go_out_b(Pred pred) {
    while (cursor_ > limit_backward_) {
      if (pred(before(cursor_))) return true;
      --cursor_;
    }
    return false;
  }
  bool eq_char_b(char32_t c) {
    if (cursor_ <= limit_backward_ || before(cursor_) != c) return false;
    --cursor_;
    return true;
  }
  bool eq_s_b(std::u32string_view s) {
    const int n = static_cast<int>(s.size());
    if (cursor_ - limit_backward_ < n) return false;
    if (std::u32string_view(w_).substr(static_cast<std::size_t>(cursor_ - n), s.size()) != s)
      return false;
    cursor_ -= n;
    return true;
  }

  // Longest entry that is a suffix of [limit_backward, cursor); 0 when none.
  template <std::size_t N>
  int find_among_b(const std::array<Among, N>& table) {
    const Among* best = nullptr;
    const std::u32string_view window =
        std::u32string_view(w_).substr(static_cast<std::size_t>(limit_backward_),
                                       static_cast<std::size_t>(cursor_ - limit_backward_));
    for (const auto& a : table) {
      if (window.ends_with(a.s) && (!best || a.s.size() > best->s.size())) best = &a;
    }
    if (!best) return 0;
    cursor_ -= static_cast<int>(best->s.size());
    return best->result;
  }

  void replace(int from, int to, std::u32string_view s) {
    const int adjustment = static_cast<int>(s.size()) - (to - from);
    w_.replace(static_cast<std::size_t>(from), static_cast<std::size_t>(to - from), s);
    limit_ += adjustment;
    if (cursor_ >= to) cursor_ += adjustment;
    else if (cursor_ > from) cursor_ = from;
  }
  void slice_from(std::u32string_view s) {
    replace(bra_, ket_, s);
    ket_ = bra_ + static_cast<int>(s.size());
  }
  void slice_del() { slice_from(U""); }

  bool exception1() {
    static constexpr std::array<std::pair<std::u32string_view, std::u32string_view>, 15> kWords{{
        {U"andes", U""},     {U"atlas", U""},  {U"bias", U""},    {U"cosmos", U""},
        {U"early", U"earli"}, {U"gently", U"gentl"}, {U"howe", U""}, {U"idly", U"idl"},
        {U"news", U""},      {U"only", U"onli"}, {U"singly", U"singl"}, {U"skies", U"sky"},
        {U"skis", U"ski"},   {U"sky", U""},    {U"ugly", U"ugli"},
    }};
    for (const auto& [word, replacement] : kWords) {
      if (w_ == word) {
        if (!replacement.empty()) w_ = replacement;
        return true;
      }
    }
    return false;
  }

  void prelude() {
    y_found_ = false;
    if (!w_.empty() && w_[0] == U'\'') {
      w_.erase(0, 1);
      --limit_;
    }
    if (!w_.empty() && w_[0] == U'y') {
      w_[0] = U'Y';
      y_found_ = true;
    }
    for (std::size_t i = 0; i + 1 < w_.size(); ++i) {
      if (is_vowel(w_[i]) && w_[i + 1] == U'y') {
        w_[i + 1] = U'Y';
        y_found_ = true;
      }
    }
  }

  // Forward scan helpers for region marking.
  bool go_to_vowel(int& c) const {
    while (c < limit_) {
      if (is_vowel(w_[static_cast<std::size_t>(c)])) return true;
      ++c;
    }
    return false;
  }
  bool go_to_non_vowel(int& c) const {
    while (c < limit_) {
      if (!is_vowel(w_[static_cast<std::size_t>(c)])) return true;
      ++c;
    }
    return false;
  }

  void mark_regions() {
    p1_ = limit_;
    p2_ = limit_;
    static constexpr std::array<std::u32string_view, 9> kPrefixes{
        U"arsen", U"commun", U"emerg", U"gener", U"inter", U"later", U"organ", U"past",
        U"univers"};
    int c = 0;
    bool prefixed = false;
    for (auto p : kPrefixes) {
      if (std::u32string_view(w_).substr(0, static_cast<std::size_t>(limit_)).starts_with(p)) {
        c = static_cast<int>(p.size());
        prefixed = true;
        break;
      }
    }
    if (!prefixed) {
      if (!go_to_vowel(c)) return;
      ++c;
      if (!go_to_non_vowel(c)) return;
      ++c;
    }
    p1_ = c;
    if (!go_to_vowel(c)) return;
    ++c;
    if (!go_to_non_vowel(c)) return;
    ++c;
    p2_ = c;
  }

  bool short_v() {
    const int saved = cursor_;
    if (out_b(is_vowel_wxy) && in_b(is_vowel) && out_b(is_vowel)) return true;
    cursor_ = saved;
    if (out_b(is_vowel) && in_b(is_vowel) && cursor_ <= limit_backward_) return true;
    cursor_ = saved;
    return eq_s_b(U"past");
  }

  void step_1a() {
    static constexpr std::array<Among, 3> kApostrophe{{{U"'", 1}, {U"'s'", 1}, {U"'s", 1}}};
    static constexpr std::array<Among, 6> kPlural{
        {{U"ied", 2}, {U"s", 3}, {U"ies", 2}, {U"sses", 1}, {U"ss", -1}, {U"us", -1}}};

    ket_ = cursor_;
    const int saved = cursor_;
    if (find_among_b(kApostrophe) != 0) {
      bra_ = cursor_;
      slice_del();
    } else {
      cursor_ = saved;
    }

    ket_ = cursor_;
    const int found = find_among_b(kPlural);
    if (found == 0) return;
    bra_ = cursor_;
    switch (found) {
      case 1:
        slice_from(U"ss");
        break;
      case 2:
        if (cursor_ - 2 >= limit_backward_) {
          cursor_ -= 2;
          slice_from(U"i");
        } else {
          slice_from(U"ie");
        }
        break;
      case 3:
        if (cursor_ <= limit_backward_) return;
        --cursor_;
        if (!go_out_b(is_vowel)) return;
        --cursor_;
        slice_del();
        break;
      default:
        break;
    }
  }

  void step_1b() {
    static constexpr std::array<Among, 7> kSuffixes{{{U"", -1},
                                                     {U"ed", 2},
                                                     {U"eed", 1},
                                                     {U"ing", 3},
                                                     {U"edly", 2},
                                                     {U"eedly", 1},
                                                     {U"ingly", 2}}};
    static constexpr std::array<Among, 3> kEedExceptions{{{U"succ", 1}, {U"proc", 1}, {U"exc", 1}}};
    static constexpr std::array<Among, 7> kIngExceptions{{{U"even", 2},
                                                          {U"cann", 2},
                                                          {U"inn", 2},
                                                          {U"earr", 2},
                                                          {U"herr", 2},
                                                          {U"out", 2},
                                                          {U"y", 1}}};
    static constexpr std::array<Among, 13> kEndings{{{U"", 3},
                                                     {U"bb", 2},
                                                     {U"dd", 2},
                                                     {U"ff", 2},
                                                     {U"gg", 2},
                                                     {U"bl", 1},
                                                     {U"mm", 2},
                                                     {U"nn", 2},
                                                     {U"pp", 2},
                                                     {U"rr", 2},
                                                     {U"at", 1},
                                                     {U"tt", 2},
                                                     {U"iz", 1}}};

    ket_ = cursor_;
    const int found = find_among_b(kSuffixes);
    bra_ = cursor_;
    const int suffix_start = cursor_;

    bool delete_suffix = false;
    switch (found) {
      case 1:  // eed, eedly
        if (r1()) {
          if (!(find_among_b(kEedExceptions) != 0 && cursor_ <= limit_backward_)) {
            slice_from(U"ee");
          }
        }
        return;
      case 2:  // ed, edly, ingly
        delete_suffix = true;
        break;
      case 3: {  // ing
        const int exc = find_among_b(kIngExceptions);
        if (exc == 0) {
          delete_suffix = true;
        } else if (exc == 1) {  // C + "y" + "ing" at word start: dying -> die
          const int at_y = cursor_;
          if (out_b(is_vowel) && cursor_ <= limit_backward_) {
            cursor_ = at_y;
            bra_ = cursor_;
            slice_from(U"ie");
            return;
          }
          delete_suffix = true;
        } else {
          if (cursor_ > limit_backward_) delete_suffix = true;
          else return;
        }
        break;
      }
      default:
        return;
    }
    if (!delete_suffix) return;

    cursor_ = suffix_start;
    if (!go_out_b(is_vowel)) return;
    cursor_ = suffix_start;
    slice_del();
    ket_ = cursor_;
    bra_ = cursor_;
    const int end = cursor_;
    switch (find_among_b(kEndings)) {
      case 1:
        slice_from(U"e");
        return;
      case 2: {
        const int at_double = cursor_;
        if (in_b([](char32_t c) { return c == U'a' || c == U'e' || c == U'o'; }) &&
            cursor_ <= limit_backward_) {
          return;
        }
        cursor_ = at_double;
        break;
      }
      default:  // "" matched
        if (cursor_ != p1_) return;
        {
          const int saved = cursor_;
          if (!short_v()) return;
          cursor_ = saved;
        }
        slice_from(U"e");
        return;
    }
    cursor_ = end;
    ket_ = cursor_;
    if (cursor_ <= limit_backward_) return;
    --cursor_;
    bra_ = cursor_;
    slice_del();
  }

  void step_1c() {
    ket_ = cursor_;
    if (!eq_char_b(U'y') && !eq_char_b(U'Y')) return;
    bra_ = cursor_;
    if (!out_b(is_vowel)) return;
    if (cursor_ <= limit_backward_) return;
    slice_from(U"i");
  }

  void step_2() {
    static constexpr std::array<Among, 25> kSuffixes{{
        {U"anci", 3},    {U"enci", 2},    {U"ogi", 14},     {U"li", 16},     {U"bli", 12},
        {U"abli", 4},    {U"alli", 8},    {U"fulli", 9},    {U"lessli", 15}, {U"ousli", 10},
        {U"entli", 5},   {U"aliti", 8},   {U"biliti", 12},  {U"iviti", 11},  {U"tional", 1},
        {U"ational", 7}, {U"alism", 8},   {U"ation", 7},    {U"ization", 6}, {U"izer", 6},
        {U"ator", 7},    {U"iveness", 11}, {U"fulness", 9}, {U"ousness", 10}, {U"ogist", 13},
    }};
    static constexpr std::array<std::u32string_view, 16> kReplacement{
        U"",    U"tion", U"ence", U"ance", U"able", U"ent", U"ize",  U"ate",
        U"al",  U"ful",  U"ous",  U"ive",  U"ble",  U"og",  U"og",   U"less"};

    ket_ = cursor_;
    const int found = find_among_b(kSuffixes);
    if (found == 0) return;
    bra_ = cursor_;
    if (!r1()) return;
    if (found == 14) {
      if (!eq_char_b(U'l')) return;
      slice_from(U"og");
    } else if (found == 16) {
      if (!in_b(is_valid_li)) return;
      slice_del();
    } else {
      slice_from(kReplacement[static_cast<std::size_t>(found)]);
    }
  }

  void step_3() {
    static constexpr std::array<Among, 9> kSuffixes{{
        {U"icate", 4}, {U"ative", 6}, {U"alize", 3}, {U"iciti", 4}, {U"ical", 4},
        {U"tional", 1}, {U"ational", 2}, {U"ful", 5}, {U"ness", 5},
    }};
    ket_ = cursor_;
    const int found = find_among_b(kSuffixes);
    if (found == 0) return;
    bra_ = cursor_;
    if (!r1()) return;
    switch (found) {
      case 1: slice_from(U"tion"); break;
      case 2: slice_from(U"ate"); break;
      case 3: slice_from(U"al"); break;
      case 4: slice_from(U"ic"); break;
      case 5: slice_del(); break;
      default:
        if (r2()) slice_del();
        break;
    }
  }

  void step_4() {
    static constexpr std::array<Among, 18> kSuffixes{{
        {U"ic", 1},  {U"ance", 1}, {U"ence", 1}, {U"able", 1}, {U"ible", 1}, {U"ate", 1},
        {U"ive", 1}, {U"ize", 1},  {U"iti", 1},  {U"al", 1},   {U"ism", 1},  {U"ion", 2},
        {U"er", 1},  {U"ous", 1},  {U"ant", 1},  {U"ent", 1},  {U"ment", 1}, {U"ement", 1},
    }};
    ket_ = cursor_;
    const int found = find_among_b(kSuffixes);
    if (found == 0) return;
    bra_ = cursor_;
    if (!r2()) return;
    if (found == 1) {
      slice_del();
    } else if (eq_char_b(U's') || eq_char_b(U't')) {
      slice_del();
    }
  }

  void step_5() {
    static constexpr std::array<Among, 2> kSuffixes{{{U"e", 1}, {U"l", 2}}};
    ket_ = cursor_;
    const int found = find_among_b(kSuffixes);
    if (found == 0) return;
    bra_ = cursor_;
    if (found == 1) {
      if (!r2()) {
        if (!r1()) return;
        const int saved = cursor_;
        if (short_v()) return;
        cursor_ = saved;
      }
      slice_del();
    } else {
      if (!r2()) return;
      if (!eq_char_b(U'l')) return;
      slice_del();
    }
  }

  std::u32string w_;
  int cursor_ = 0;
  int limit_ = 0;
  int limit_backward_ = 0;
  int bra_ = 0;
  int ket_ = 0;
  int p1_ = 0;
  int p2_ = 0;
  bool y_found_ = false;
};

}  // namespace detail

// Snowball English stem of a single token (UTF-8 in, UTF-8 out).
inline std::string stem_token(std::string_view token) {
  detail::EnglishStemmer stemmer;
  return utf8::encode(stemmer.stem(utf8::decode(token)));
}

}  // namespace bowaudit
