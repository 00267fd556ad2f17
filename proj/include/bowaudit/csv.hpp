#pragma once

// Minimal RFC 4180 reader/writer: quoted fields may contain commas, quotes
// ("" escape) and line breaks. Only what the corpus and report code needs.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bowaudit/error.hpp"

namespace bowaudit::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns nullopt at end of input. Throws DataError on an unterminated quote.
  std::optional<Record> next() {
    Record rec;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool field_was_quoted = false;
    rec.line = line_;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"' && field.empty() && !field_was_quoted) {
        in_quotes = true;
        field_was_quoted = true;
      } else if (ch == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (ch == '\r') {
        if (in_.peek() == '\n') continue;
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      } else if (ch == '\n') {
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      } else {
        field.push_back(ch);
      }
    }
    if (in_quotes) {
      throw DataError("unterminated quoted field starting on line " + std::to_string(rec.line));
    }
    if (!any) return std::nullopt;
    rec.fields.push_back(std::move(field));
    return rec;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

inline std::string escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace bowaudit::csv
