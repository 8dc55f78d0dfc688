#ifndef CEBIO_ENSEMBLE_HPP
#define CEBIO_ENSEMBLE_HPP

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cebio/bio.hpp"
#include "cebio/corpus.hpp"
#include "cebio/error.hpp"
#include "cebio/tagger.hpp"

namespace cebio {

struct EnsembleConfig {
  std::vector<std::string> members;  // member order fixes the vote input order
  std::string priority_model;       // tie-breaker
  std::size_t merge_threshold = 3;  // PAD-gap merge threshold, in tokens
};

inline void validate_config(const EnsembleConfig& config) {
  if (config.members.empty()) throw DataError("ensemble has no members");
  std::unordered_set<std::string> names(config.members.begin(), config.members.end());
  if (names.size() != config.members.size()) throw DataError("ensemble member names must be unique");
  if (!names.count(config.priority_model))
    throw DataError("priority model \"" + config.priority_model + "\" is not an ensemble member");
}

/// Per-position mode voting. The strictly most frequent label wins; when
/// the maximum frequency is shared by two or more labels, the priority
/// model's label is taken at that position.
inline TagSequence vote(std::span<const TagSequence> predictions, const EnsembleConfig& config) {
  validate_config(config);
  if (predictions.size() != config.members.size())
    throw DataError("vote got " + std::to_string(predictions.size()) + " sequences for " +
                    std::to_string(config.members.size()) + " members");
  const std::size_t len = predictions.front().size();
  for (const TagSequence& seq : predictions)
    if (seq.size() != len)
      throw DataError("member sequences disagree on length (" + std::to_string(seq.size()) +
                      " vs " + std::to_string(len) + ")");

  const std::size_t priority = static_cast<std::size_t>(
      std::find(config.members.begin(), config.members.end(), config.priority_model) -
      config.members.begin());

  TagSequence fused;
  fused.instance_id = predictions.front().instance_id;
  fused.labels.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    std::array<int, kNumBioLabels> counts{};
    for (const TagSequence& seq : predictions) ++counts[static_cast<int>(seq.labels[i])];
    int best = 0;
    for (int c = 1; c < kNumBioLabels; ++c)
      if (counts[c] > counts[best]) best = c;
    int at_max = 0;
    for (int c = 0; c < kNumBioLabels; ++c)
      if (counts[c] == counts[best]) ++at_max;
    fused.labels.push_back(at_max > 1 ? predictions[priority].labels[i]
                                      : static_cast<BioLabel>(best));
  }
  return fused;
}

namespace detail {

struct LabelRun {
  std::size_t first = 0;
  std::size_t last = 0;
  bool cause = false;
};

/// Segments a tag sequence into same-type runs, treating a bare I run as a
/// run of its type (mirrors the decode-time repair).
inline std::vector<LabelRun> label_runs(const TagSequence& tags) {
  std::vector<LabelRun> runs;
  std::optional<LabelRun> current;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const BioLabel l = tags.labels[i];
    if (l == BioLabel::Pad) {
      if (current) runs.push_back(*current), current.reset();
      continue;
    }
    const bool cause = is_cause(l);
    if (current && current->cause == cause && !is_begin(l)) {
      current->last = i;
      continue;
    }
    if (current) runs.push_back(*current);
    current = LabelRun{i, i, cause};
  }
  if (current) runs.push_back(*current);
  return runs;
}

}  // namespace detail

/// Bridges two consecutive same-type runs separated only by k padding
/// tokens when k < threshold: the gap and the second run's first label
/// become I of that type. Applied left to right until a fixpoint.
inline TagSequence merge_gapped_spans(TagSequence tags, std::size_t threshold) {
  if (threshold == 0) return tags;  // no k satisfies k < 0
  bool changed = true;
  while (changed) {
    changed = false;
    const auto runs = detail::label_runs(tags);
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
      const auto& a = runs[r];
      const auto& b = runs[r + 1];
      if (a.cause != b.cause) continue;
      // tokens between consecutive runs are all PAD by construction
      const std::size_t gap = b.first - a.last - 1;
      if (gap >= threshold) continue;
      const BioLabel inside = a.cause ? BioLabel::InsideCause : BioLabel::InsideEffect;
      for (std::size_t i = a.last + 1; i <= b.first; ++i) tags.labels[i] = inside;
      changed = true;
      break;  // rescan from the left on the updated sequence
    }
  }
  return tags;
}

/// Final extraction result for one instance: the two selected phrases as
/// contiguous slices of the original text.
struct CausalPair {
  std::string cause_text;
  std::string effect_text;
  std::size_t cause_first = 0, cause_last = 0;    // token range
  std::size_t effect_first = 0, effect_last = 0;  // token range

  friend bool operator==(const CausalPair&, const CausalPair&) = default;
};

namespace detail {

inline const SpanCandidate* longest_candidate(std::span<const SpanCandidate> candidates) {
  const SpanCandidate* best = nullptr;
  for (const SpanCandidate& c : candidates) {
    const std::size_t len = c.last_token - c.first_token + 1;
    if (!best || len > best->last_token - best->first_token + 1) best = &c;
    // ties keep the earliest candidate, which is the one already held
  }
  return best;
}

}  // namespace detail

/// Picks the cause candidate with the most tokens and the effect candidate
/// with the most tokens, independently; ties go to the earliest start.
/// Returns nothing when either candidate list is empty.
inline std::optional<CausalPair> select_pair(const DecodedSpans& candidates) {
  const SpanCandidate* cause = detail::longest_candidate(candidates.causes);
  const SpanCandidate* effect = detail::longest_candidate(candidates.effects);
  if (!cause || !effect) return std::nullopt;
  CausalPair pair;
  pair.cause_text = cause->span.surface;
  pair.effect_text = effect->span.surface;
  pair.cause_first = cause->first_token;
  pair.cause_last = cause->last_token;
  pair.effect_first = effect->first_token;
  pair.effect_last = effect->last_token;
  return pair;
}

struct PipelineResult {
  TagSequence tags;  // after voting and gap merging
  std::optional<CausalPair> pair;
};

/// vote -> merge -> decode -> select over a whole corpus. Prediction sets
/// must cover every corpus instance (import_predictions guarantees this
/// for file-loaded sets).
inline std::map<std::string, PipelineResult> run_pipeline(
    std::span<const PredictionSet> prediction_sets, const Corpus& corpus,
    const EnsembleConfig& config) {
  validate_config(config);
  std::map<std::string, const PredictionSet*> by_name;
  for (const PredictionSet& set : prediction_sets) by_name.emplace(set.model_name, &set);
  std::vector<const PredictionSet*> ordered;
  for (const std::string& name : config.members) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("no prediction set for ensemble member \"" + name + "\"");
    ordered.push_back(it->second);
  }

  std::map<std::string, PipelineResult> results;
  for (const Instance& inst : corpus.instances) {
    std::vector<TagSequence> member_tags;
    member_tags.reserve(ordered.size());
    for (const PredictionSet* set : ordered) {
      auto it = set->sequences.find(inst.id);
      if (it == set->sequences.end())
        throw DataError("prediction set \"" + set->model_name + "\" does not cover instance \"" +
                        inst.id + "\"");
      member_tags.push_back(it->second);
    }
    try {
      TagSequence fused = merge_gapped_spans(vote(member_tags, config), config.merge_threshold);
      const std::vector<Token> tokens = tokenize(inst.text);
      const DecodedSpans decoded = decode_spans(tokens, fused, inst.text);
      results.emplace(inst.id, PipelineResult{std::move(fused), select_pair(decoded)});
    } catch (const Error& e) {
      throw DataError("instance \"" + inst.id + "\": " + e.what());
    }
  }
  return results;
}

namespace detail {

/// Quotes a field for the answer table when it contains the delimiter,
/// quotes, newlines, or significant edge whitespace.
inline std::string quote_field(const std::string& value, char delimiter) {
  const bool needs =
      value.find(delimiter) != std::string::npos || value.find('"') != std::string::npos ||
      value.find('\n') != std::string::npos || value.find('\r') != std::string::npos ||
      (!value.empty() && (value.front() == ' ' || value.back() == ' '));
  if (!needs) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

/// Shared-task answer shape: "Index; Text; Cause; Effect" rows in corpus
/// order. Unextracted instances get empty cause/effect fields.
inline void write_answers(std::ostream& out, const Corpus& corpus,
                          const std::map<std::string, PipelineResult>& results,
                          char delimiter = ';') {
  const std::string sep = std::string(1, delimiter) + " ";
  out << "Index" << sep << "Text" << sep << "Cause" << sep << "Effect" << '\n';
  for (const Instance& inst : corpus.instances) {
    auto it = results.find(inst.id);
    const CausalPair* pair =
        it != results.end() && it->second.pair ? &*it->second.pair : nullptr;
    out << detail::quote_field(inst.id, delimiter) << sep
        << detail::quote_field(inst.text, delimiter) << sep
        << detail::quote_field(pair ? pair->cause_text : "", delimiter) << sep
        << detail::quote_field(pair ? pair->effect_text : "", delimiter) << '\n';
  }
}

}  // namespace cebio

#endif  // CEBIO_ENSEMBLE_HPP
