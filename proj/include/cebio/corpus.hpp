#ifndef CEBIO_CORPUS_HPP
#define CEBIO_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cebio/error.hpp"

namespace cebio {

/// Half-open character range [start, end) within an instance text,
/// together with the text slice it covers.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

inline bool spans_overlap(const CharSpan& a, const CharSpan& b) {
  return a.start < b.end && b.start < a.end;
}

/// One corpus row: a text and (in training data) its gold cause/effect pair.
/// Distinct instances may carry identical text with different pairs.
struct Instance {
  std::string id;
  std::string text;
  std::optional<CharSpan> cause;
  std::optional<CharSpan> effect;
};

enum class CorpusMode { training, test };

struct Corpus {
  std::vector<Instance> instances;
  CorpusMode mode = CorpusMode::training;

  std::size_t size() const { return instances.size(); }
};

namespace detail {

struct DelimitedRecord {
  std::vector<std::string> fields;
  std::vector<bool> quoted;  // per field: was it quote-enclosed
  std::size_t line = 0;      // 1-based line where the record starts
};

/// Reads one delimiter-separated record. Supports double-quote enclosed
/// fields with "" escapes; quoted fields may contain delimiters and
/// newlines. Returns false at end of input.
inline bool read_record(std::istream& in, char delimiter, std::size_t& line_counter,
                        DelimitedRecord& rec) {
  rec.fields.clear();
  rec.quoted.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  rec.line = line_counter;

  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool blank_prefix = true;  // field so far holds only spaces/tabs
  bool after_close = false;  // a closing quote ended this field's content
  bool any = false;

  auto push_field = [&] {
    rec.fields.push_back(std::move(field));
    rec.quoted.push_back(field_quoted);
    field.clear();
    field_quoted = false;
    blank_prefix = true;
    after_close = false;
  };

  int ci;
  while ((ci = in.get()) != std::char_traits<char>::eof()) {
    char c = static_cast<char>(ci);
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          in_quotes = false;
          after_close = true;
        }
      } else {
        if (c == '\n') ++line_counter;
        field += c;
      }
      continue;
    }
    if (c == '"' && blank_prefix && !field_quoted) {
      // opening quote; surrounding whitespace outside the quotes is dropped
      in_quotes = true;
      field_quoted = true;
      field.clear();
      blank_prefix = false;
    } else if (c == delimiter) {
      push_field();
    } else if (c == '\n') {
      ++line_counter;
      break;
    } else if (c == '\r' && in.peek() == '\n') {
      in.get();
      ++line_counter;
      break;
    } else {
      if (after_close) {
        if (c == ' ' || c == '\t') continue;
        throw FormatError("unexpected character after a closing quote", line_counter);
      }
      field += c;
      blank_prefix = blank_prefix && (c == ' ' || c == '\t');
    }
  }
  if (in_quotes) throw FormatError("unterminated quoted field", rec.line);
  if (!any) return false;
  push_field();
  return true;
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

inline std::string lower_ascii(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

/// Field value with surrounding-whitespace trim applied to unquoted fields.
/// Quoted fields are taken verbatim so significant edge whitespace survives.
inline std::string field_value(const DelimitedRecord& rec, std::size_t i) {
  return rec.quoted[i] ? rec.fields[i] : trim(rec.fields[i]);
}

inline std::optional<std::size_t> find_column(const DelimitedRecord& header,
                                              const std::string& name) {
  const std::string want = lower_ascii(name);
  for (std::size_t i = 0; i < header.fields.size(); ++i)
    if (lower_ascii(trim(header.fields[i])) == want) return i;
  return std::nullopt;
}

inline std::optional<std::size_t> parse_offset(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  std::size_t v = 0, pos = 0;
  try {
    v = std::stoull(t, &pos);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (pos != t.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Locates a gold span inside `text`. When both offsets are supplied they
/// take precedence and the surface is checked against them; otherwise the
/// first occurrence of `needle` is used.
inline CharSpan locate_span(const std::string& text, const std::string& needle,
                            std::optional<std::size_t> off_start,
                            std::optional<std::size_t> off_end,
                            const std::string& row_id) {
  if (off_start && off_end) {
    if (*off_start >= *off_end || *off_end > text.size())
      throw AlignmentError("row " + row_id + ": offset range [" + std::to_string(*off_start) +
                           ", " + std::to_string(*off_end) + ") outside text of length " +
                           std::to_string(text.size()));
    CharSpan span{*off_start, *off_end, text.substr(*off_start, *off_end - *off_start)};
    if (!needle.empty() && span.surface != needle)
      throw AlignmentError("row " + row_id + ": text at offsets [" + std::to_string(*off_start) +
                           ", " + std::to_string(*off_end) + ") does not match the given span string");
    return span;
  }
  if (needle.empty()) throw AlignmentError("row " + row_id + ": empty span string");
  const std::size_t pos = text.find(needle);
  if (pos == std::string::npos)
    throw AlignmentError("row " + row_id + ": span string not found in text: \"" + needle + "\"");
  return CharSpan{pos, pos + needle.size(), needle};
}

/// Parses the semicolon-delimited corpus table. Required columns: Index and
/// Text; training mode also requires Cause and Effect. Optional offset
/// columns Cause_Start/Cause_End/Effect_Start/Effect_End take precedence
/// over substring search when present and numeric.
inline Corpus parse_corpus(std::istream& in, CorpusMode mode, char delimiter = ';') {
  using namespace detail;
  Corpus corpus;
  corpus.mode = mode;

  std::size_t line_counter = 1;
  DelimitedRecord header;
  if (!read_record(in, delimiter, line_counter, header))
    throw FormatError("empty corpus file: missing header row", 1);

  const auto col_index = find_column(header, "Index");
  const auto col_text = find_column(header, "Text");
  const auto col_cause = find_column(header, "Cause");
  const auto col_effect = find_column(header, "Effect");
  const auto col_cs = find_column(header, "Cause_Start");
  const auto col_ce = find_column(header, "Cause_End");
  const auto col_es = find_column(header, "Effect_Start");
  const auto col_ee = find_column(header, "Effect_End");

  if (!col_text) throw FormatError("missing Text column", header.line);
  if (!col_index) throw FormatError("missing Index column", header.line);
  if (mode == CorpusMode::training && (!col_cause || !col_effect))
    throw FormatError("training mode requires Cause and Effect columns", header.line);

  std::unordered_set<std::string> seen_ids;
  DelimitedRecord rec;
  while (read_record(in, delimiter, line_counter, rec)) {
    if (rec.fields.size() == 1 && trim(rec.fields[0]).empty()) continue;  // stray blank line
    if (rec.fields.size() != header.fields.size())
      throw FormatError("row has " + std::to_string(rec.fields.size()) + " fields, header has " +
                            std::to_string(header.fields.size()),
                        rec.line);

    Instance inst;
    inst.id = field_value(rec, *col_index);
    inst.text = field_value(rec, *col_text);
    if (inst.id.empty()) throw FormatError("empty Index field", rec.line);
    if (inst.text.empty()) throw FormatError("empty Text field", rec.line);
    if (!seen_ids.insert(inst.id).second)
      throw FormatError("duplicate instance id \"" + inst.id + "\"", rec.line);

    const std::string cause_str = col_cause ? field_value(rec, *col_cause) : std::string();
    const std::string effect_str = col_effect ? field_value(rec, *col_effect) : std::string();

    auto offset_at = [&](std::optional<std::size_t> col) -> std::optional<std::size_t> {
      if (!col || *col >= rec.fields.size()) return std::nullopt;
      return parse_offset(rec.fields[*col]);
    };

    const bool want_spans =
        mode == CorpusMode::training || !cause_str.empty() || !effect_str.empty();
    if (mode == CorpusMode::training && (cause_str.empty() || effect_str.empty()) &&
        !(offset_at(col_cs) && offset_at(col_ce) && offset_at(col_es) && offset_at(col_ee)))
      throw AlignmentError("row " + inst.id + ": training instance is missing its cause or effect");

    if (want_spans) {
      inst.cause = locate_span(inst.text, cause_str, offset_at(col_cs), offset_at(col_ce), inst.id);
      inst.effect =
          locate_span(inst.text, effect_str, offset_at(col_es), offset_at(col_ee), inst.id);
      if (spans_overlap(*inst.cause, *inst.effect))
        throw AlignmentError("row " + inst.id + ": cause and effect spans overlap");
    }
    corpus.instances.push_back(std::move(inst));
  }
  return corpus;
}

inline Corpus parse_corpus_file(const std::filesystem::path& path, CorpusMode mode,
                                char delimiter = ';') {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path.string());
  return parse_corpus(in, mode, delimiter);
}

namespace detail {

/// Bounded draw with rejection sampling; mt19937_64 output is fully
/// specified by the standard, so results are identical on every platform.
inline std::uint64_t bounded_uint64(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace detail

/// Deterministic seeded shuffle + partition. The train side receives
/// round(train_fraction * N) instances; relative corpus order is kept
/// within each side.
inline std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction,
                                              std::uint64_t seed) {
  if (corpus.mode != CorpusMode::training)
    throw DataError("split_corpus requires a training-mode corpus");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("train_fraction must lie strictly between 0 and 1");
  const std::size_t n = corpus.size();
  if (n < 2) throw DataError("cannot split a corpus with fewer than 2 instances");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(detail::bounded_uint64(rng, i + 1));
    std::swap(order[i], order[j]);
  }

  auto train_count = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  train_count = std::clamp<std::size_t>(train_count, 1, n - 1);

  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < train_count; ++i) in_train[order[i]] = true;

  Corpus train, validation;
  train.mode = validation.mode = CorpusMode::training;
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? train : validation).instances.push_back(corpus.instances[i]);
  return {std::move(train), std::move(validation)};
}

}  // namespace cebio

#endif  // CEBIO_CORPUS_HPP
