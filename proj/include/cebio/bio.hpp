#ifndef CEBIO_BIO_HPP
#define CEBIO_BIO_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cebio/corpus.hpp"
#include "cebio/error.hpp"
#include "cebio/tokenize.hpp"

namespace cebio {

/// Label ids are a fixed wire contract shared with external classifiers:
/// "-" 0, B-C 1, I-C 2, B-E 3, I-E 4. Outside-of-span tokens carry the
/// padding label "-".
enum class BioLabel : int {
  Pad = 0,
  BeginCause = 1,
  InsideCause = 2,
  BeginEffect = 3,
  InsideEffect = 4,
};

inline constexpr int kNumBioLabels = 5;

/// Value marking positions excluded from the training loss (sequence
/// padding and special bracketing positions).
inline constexpr int kLossMaskId = -100;

inline constexpr std::string_view bio_name(BioLabel label) {
  switch (label) {
    case BioLabel::Pad: return "-";
    case BioLabel::BeginCause: return "B-C";
    case BioLabel::InsideCause: return "I-C";
    case BioLabel::BeginEffect: return "B-E";
    case BioLabel::InsideEffect: return "I-E";
  }
  return "?";
}

inline std::optional<BioLabel> parse_bio(std::string_view name) {
  if (name == "-") return BioLabel::Pad;
  if (name == "B-C") return BioLabel::BeginCause;
  if (name == "I-C") return BioLabel::InsideCause;
  if (name == "B-E") return BioLabel::BeginEffect;
  if (name == "I-E") return BioLabel::InsideEffect;
  return std::nullopt;
}

inline bool is_cause(BioLabel l) {
  return l == BioLabel::BeginCause || l == BioLabel::InsideCause;
}
inline bool is_effect(BioLabel l) {
  return l == BioLabel::BeginEffect || l == BioLabel::InsideEffect;
}
inline bool is_begin(BioLabel l) {
  return l == BioLabel::BeginCause || l == BioLabel::BeginEffect;
}

/// Per-token labels for one instance, aligned 1:1 with its tokens.
struct TagSequence {
  std::string instance_id;
  std::vector<BioLabel> labels;

  std::size_t size() const { return labels.size(); }
  friend bool operator==(const TagSequence&, const TagSequence&) = default;
};

namespace detail {

struct TokenRange {
  std::size_t first = 0;  // inclusive token indices
  std::size_t last = 0;
};

/// Maps a character span onto token indices. Strict mode requires the span
/// to begin exactly at a token start and end exactly at a token end;
/// loose mode snaps to the covering tokens instead.
inline TokenRange span_token_range(std::span<const Token> tokens, const CharSpan& span,
                                   std::string_view what, bool loose) {
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!first) {
      if (t.start == span.start) first = i;
      else if (loose && t.end > span.start && t.start < span.end) first = i;
      else if (!loose && t.start < span.start && span.start < t.end)
        throw AlignmentError(std::string(what) + " span start at offset " +
                             std::to_string(span.start) + " splits token \"" + t.surface + "\"");
    }
    if (t.end == span.end) last = i;
    else if (loose && t.start < span.end && t.end > span.start) last = i;
    else if (!loose && t.start < span.end && span.end < t.end)
      throw AlignmentError(std::string(what) + " span end at offset " + std::to_string(span.end) +
                           " splits token \"" + t.surface + "\"");
  }
  if (!first || !last || *last < *first)
    throw AlignmentError(std::string(what) + " span [" + std::to_string(span.start) + ", " +
                         std::to_string(span.end) + ") \"" + span.surface +
                         "\" does not align with token boundaries");
  return TokenRange{*first, *last};
}

}  // namespace detail

/// Encodes gold spans as per-token labels: the first token of a span gets
/// its B label, later tokens the I label, everything else the padding
/// label. Spans must fall on token boundaries unless `loose` snapping is
/// requested.
inline TagSequence encode_bio(std::span<const Token> tokens, const std::optional<CharSpan>& cause,
                              const std::optional<CharSpan>& effect, std::string instance_id = {},
                              bool loose = false) {
  TagSequence seq;
  seq.instance_id = std::move(instance_id);
  seq.labels.assign(tokens.size(), BioLabel::Pad);

  std::optional<detail::TokenRange> cause_range, effect_range;
  if (cause) cause_range = detail::span_token_range(tokens, *cause, "cause", loose);
  if (effect) effect_range = detail::span_token_range(tokens, *effect, "effect", loose);
  if (cause_range && effect_range && cause_range->first <= effect_range->last &&
      effect_range->first <= cause_range->last)
    throw AlignmentError("cause and effect spans overlap at the token level");

  if (cause_range)
    for (std::size_t i = cause_range->first; i <= cause_range->last; ++i)
      seq.labels[i] = i == cause_range->first ? BioLabel::BeginCause : BioLabel::InsideCause;
  if (effect_range)
    for (std::size_t i = effect_range->first; i <= effect_range->last; ++i)
      seq.labels[i] = i == effect_range->first ? BioLabel::BeginEffect : BioLabel::InsideEffect;
  return seq;
}

/// A decoded span candidate: token range plus the original-text slice it
/// covers (inner whitespace and punctuation preserved).
struct SpanCandidate {
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  CharSpan span;
};

struct DecodedSpans {
  std::vector<SpanCandidate> causes;
  std::vector<SpanCandidate> effects;
};

/// Recovers maximal same-type label runs as span candidates. A run opened
/// by a bare I label (no preceding B) is repaired by treating its first
/// token as the beginning; classifier output is unconstrained, so this
/// only affects decoding.
inline DecodedSpans decode_spans(std::span<const Token> tokens, const TagSequence& tags,
                                 std::string_view original_text) {
  if (tags.size() != tokens.size())
    throw DataError("tag sequence length " + std::to_string(tags.size()) +
                    " does not match token count " + std::to_string(tokens.size()));
  DecodedSpans out;

  std::optional<std::size_t> run_start;
  bool run_is_cause = false;
  auto close_run = [&](std::size_t end_idx) {
    if (!run_start) return;
    SpanCandidate c;
    c.first_token = *run_start;
    c.last_token = end_idx;
    const std::size_t s = tokens[c.first_token].start;
    const std::size_t e = tokens[c.last_token].end;
    c.span = CharSpan{s, e, std::string(original_text.substr(s, e - s))};
    (run_is_cause ? out.causes : out.effects).push_back(std::move(c));
    run_start.reset();
  };

  for (std::size_t i = 0; i < tags.size(); ++i) {
    const BioLabel l = tags.labels[i];
    if (l == BioLabel::Pad) {
      close_run(i ? i - 1 : 0);
      continue;
    }
    const bool cause = is_cause(l);
    if (run_start && run_is_cause == cause && !is_begin(l)) continue;  // extends current run
    close_run(i ? i - 1 : 0);
    run_start = i;
    run_is_cause = cause;
  }
  close_run(tags.size() ? tags.size() - 1 : 0);
  return out;
}

enum class Bracketing { none, start_end, end_only };

inline std::string_view bracketing_name(Bracketing b) {
  switch (b) {
    case Bracketing::none: return "none";
    case Bracketing::start_end: return "start_end";
    case Bracketing::end_only: return "end_only";
  }
  return "?";
}

inline std::optional<Bracketing> parse_bracketing(std::string_view s) {
  if (s == "none") return Bracketing::none;
  if (s == "start_end") return Bracketing::start_end;
  if (s == "end_only") return Bracketing::end_only;
  return std::nullopt;
}

inline constexpr std::size_t bracketing_overhead(Bracketing b) {
  switch (b) {
    case Bracketing::none: return 0;
    case Bracketing::start_end: return 2;
    case Bracketing::end_only: return 1;
  }
  return 0;
}

/// Number of label positions that map to real tokens in a padded layout.
inline std::size_t real_token_capacity(std::size_t token_count, std::size_t max_seq_len,
                                       Bracketing b) {
  const std::size_t overhead = bracketing_overhead(b);
  const std::size_t cap = max_seq_len > overhead ? max_seq_len - overhead : 0;
  return std::min(token_count, cap);
}

/// Index of the first real-token position in a padded layout.
inline constexpr std::size_t bracketing_offset(Bracketing b) {
  return b == Bracketing::start_end ? 1 : 0;
}

/// Fixed-length label-id layout for training: real tokens keep their label
/// ids 0-4, bracketing positions and tail padding carry -100. Sequences
/// longer than the capacity are truncated at the tail; `truncated`
/// reports how many labels were dropped.
inline std::vector<int> to_loss_ids(const TagSequence& tags, std::size_t max_seq_len,
                                    Bracketing bracketing, std::size_t* truncated = nullptr) {
  if (max_seq_len < 1) throw DataError("max_seq_len must be at least 1");
  const std::size_t real = real_token_capacity(tags.size(), max_seq_len, bracketing);
  if (truncated) *truncated = tags.size() - real;

  std::vector<int> ids(max_seq_len, kLossMaskId);
  const std::size_t offset = bracketing_offset(bracketing);
  for (std::size_t i = 0; i < real; ++i) ids[offset + i] = static_cast<int>(tags.labels[i]);
  return ids;
}

/// Companion POS-id layout: bracketing positions and tail padding carry
/// the pseudo POS id 0.
inline std::vector<int> to_pos_ids(std::span<const Token> tokens, std::size_t max_seq_len,
                                   Bracketing bracketing, std::size_t* truncated = nullptr) {
  if (max_seq_len < 1) throw DataError("max_seq_len must be at least 1");
  const std::size_t real = real_token_capacity(tokens.size(), max_seq_len, bracketing);
  if (truncated) *truncated = tokens.size() - real;

  std::vector<int> ids(max_seq_len, 0);
  const std::size_t offset = bracketing_offset(bracketing);
  for (std::size_t i = 0; i < real; ++i) ids[offset + i] = tokens[i].pos.id;
  return ids;
}

}  // namespace cebio

#endif  // CEBIO_BIO_HPP
