#ifndef CEBIO_SCORER_HPP
#define CEBIO_SCORER_HPP

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cebio/bio.hpp"
#include "cebio/corpus.hpp"
#include "cebio/ensemble.hpp"
#include "cebio/error.hpp"

namespace cebio {

struct LabelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;  // gold count of this label
};

/// Token-level weighted precision/recall/F1 plus the instance-level exact
/// match rate. All five labels (padding included) are scored; aggregates
/// are support-weighted means over labels.
struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> exact_match;
  std::map<std::string, LabelScore> per_label;
  std::uint64_t total_support = 0;
  std::uint64_t instances = 0;
};

/// Pools the 5x5 confusion over all instances (matched by instance id) and
/// derives per-label and support-weighted metrics. Zero-division
/// convention: a label with no predictions has precision 0; a label with
/// no gold support contributes zero weight.
inline ScoreReport token_prf(std::span<const TagSequence> gold, std::span<const TagSequence> pred) {
  std::map<std::string, const TagSequence*> pred_by_id;
  for (const TagSequence& p : pred) {
    if (!pred_by_id.emplace(p.instance_id, &p).second)
      throw DataError("duplicate predicted sequence for instance \"" + p.instance_id + "\"");
  }
  if (gold.empty()) throw DataError("empty evaluation set");
  if (pred.size() != gold.size())
    throw DataError("prediction set has " + std::to_string(pred.size()) + " sequences, gold has " +
                    std::to_string(gold.size()));

  std::array<std::array<std::uint64_t, kNumBioLabels>, kNumBioLabels> confusion{};
  for (const TagSequence& g : gold) {
    auto it = pred_by_id.find(g.instance_id);
    if (it == pred_by_id.end())
      throw DataError("no prediction for instance \"" + g.instance_id + "\"");
    const TagSequence& p = *it->second;
    if (p.size() != g.size())
      throw DataError("instance \"" + g.instance_id + "\": prediction length " +
                      std::to_string(p.size()) + " does not match gold length " +
                      std::to_string(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i)
      ++confusion[static_cast<int>(g.labels[i])][static_cast<int>(p.labels[i])];
  }

  ScoreReport report;
  report.instances = gold.size();
  double wp = 0.0, wr = 0.0, wf = 0.0;
  std::uint64_t total = 0;
  for (int l = 0; l < kNumBioLabels; ++l) {
    std::uint64_t tp = confusion[l][l], fp = 0, fn = 0, support = 0;
    for (int o = 0; o < kNumBioLabels; ++o) {
      if (o != l) {
        fp += confusion[o][l];
        fn += confusion[l][o];
      }
      support += confusion[l][o];
    }
    LabelScore s;
    s.support = support;
    s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    report.per_label.emplace(std::string(bio_name(static_cast<BioLabel>(l))), s);
    wp += static_cast<double>(support) * s.precision;
    wr += static_cast<double>(support) * s.recall;
    wf += static_cast<double>(support) * s.f1;
    total += support;
  }
  if (total == 0) throw DataError("empty evaluation set: no labeled positions");
  report.total_support = total;
  report.precision = wp / static_cast<double>(total);
  report.recall = wr / static_cast<double>(total);
  report.f1 = wf / static_cast<double>(total);
  return report;
}

/// Gold pair strings for one instance.
struct GoldPair {
  std::string cause;
  std::string effect;
};

/// Fraction of instances whose predicted cause AND effect strings equal
/// the gold strings byte for byte. Unextracted instances count as misses,
/// as do instances absent from the prediction map.
inline double exact_match(const std::map<std::string, GoldPair>& gold,
                          const std::map<std::string, std::optional<CausalPair>>& pred) {
  if (gold.empty()) throw DataError("empty evaluation set");
  for (const auto& [id, pair] : pred)
    if (!gold.count(id)) throw DataError("prediction for unknown instance \"" + id + "\"");
  std::size_t hits = 0;
  for (const auto& [id, gp] : gold) {
    auto it = pred.find(id);
    if (it == pred.end() || !it->second) continue;
    if (it->second->cause_text == gp.cause && it->second->effect_text == gp.effect) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

/// Composes token-level metrics and exact match into one report.
inline ScoreReport score_report(std::span<const TagSequence> gold_tags,
                                std::span<const TagSequence> pred_tags,
                                const std::map<std::string, GoldPair>& gold_pairs,
                                const std::map<std::string, std::optional<CausalPair>>& pred_pairs) {
  ScoreReport report = token_prf(gold_tags, pred_tags);
  report.exact_match = exact_match(gold_pairs, pred_pairs);
  return report;
}

/// Reads an answer-shape table (Index; Text; Cause; Effect) as predicted
/// pair strings. Pair texts are taken verbatim for byte comparison; they
/// are never re-located inside the text, so a cause that happens to occur
/// within the effect region parses fine. Rows with an empty cause or
/// effect count as unextracted.
inline std::map<std::string, std::optional<CausalPair>> read_answer_pairs(std::istream& in,
                                                                          char delimiter = ';') {
  using namespace detail;
  std::size_t line_counter = 1;
  DelimitedRecord header;
  if (!read_record(in, delimiter, line_counter, header))
    throw FormatError("empty answers file: missing header row", 1);
  const auto col_index = find_column(header, "Index");
  const auto col_cause = find_column(header, "Cause");
  const auto col_effect = find_column(header, "Effect");
  if (!col_index || !col_cause || !col_effect)
    throw FormatError("answers file needs Index, Cause and Effect columns", header.line);

  std::map<std::string, std::optional<CausalPair>> pairs;
  DelimitedRecord rec;
  while (read_record(in, delimiter, line_counter, rec)) {
    if (rec.fields.size() == 1 && trim(rec.fields[0]).empty()) continue;
    if (rec.fields.size() != header.fields.size())
      throw FormatError("row has " + std::to_string(rec.fields.size()) + " fields, header has " +
                            std::to_string(header.fields.size()),
                        rec.line);
    const std::string id = field_value(rec, *col_index);
    if (id.empty()) throw FormatError("empty Index field", rec.line);
    const std::string cause = field_value(rec, *col_cause);
    const std::string effect = field_value(rec, *col_effect);
    std::optional<CausalPair> pair;
    if (!cause.empty() && !effect.empty()) pair = CausalPair{cause, effect, 0, 0, 0, 0};
    if (!pairs.emplace(id, std::move(pair)).second)
      throw FormatError("duplicate Index \"" + id + "\"", rec.line);
  }
  return pairs;
}

inline std::map<std::string, std::optional<CausalPair>> read_answer_pairs_file(
    const std::filesystem::path& path, char delimiter = ';') {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open answers file: " + path.string());
  return read_answer_pairs(in, delimiter);
}

namespace detail {

/// Shortest round-trip decimal form; identical doubles print identically
/// on every platform.
inline std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double value, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << value;
  return os.str();
}

}  // namespace detail

/// Human-readable aligned table.
inline std::string render_report_text(const ScoreReport& report) {
  std::ostringstream os;
  auto row = [&](const std::string& name, const std::string& p, const std::string& r,
                 const std::string& f, const std::string& support) {
    os << name;
    for (std::size_t i = name.size(); i < 10; ++i) os << ' ';
    auto cell = [&](const std::string& s) {
      for (std::size_t i = s.size(); i < 12; ++i) os << ' ';
      os << s;
    };
    cell(p);
    cell(r);
    cell(f);
    cell(support);
    os << '\n';
  };
  row("label", "precision", "recall", "f1", "support");
  for (const auto& [name, s] : report.per_label)
    row(name, detail::format_fixed(s.precision), detail::format_fixed(s.recall),
        detail::format_fixed(s.f1), std::to_string(s.support));
  row("weighted", detail::format_fixed(report.precision), detail::format_fixed(report.recall),
      detail::format_fixed(report.f1), std::to_string(report.total_support));
  if (report.exact_match)
    os << "exact_match " << detail::format_fixed(*report.exact_match) << " over "
       << report.instances << " instances\n";
  return os.str();
}

/// Flat key=value form for machine consumption.
inline std::string render_report_kv(const ScoreReport& report) {
  std::ostringstream os;
  os << "precision=" << detail::format_double(report.precision) << '\n';
  os << "recall=" << detail::format_double(report.recall) << '\n';
  os << "f1=" << detail::format_double(report.f1) << '\n';
  if (report.exact_match) os << "exact_match=" << detail::format_double(*report.exact_match) << '\n';
  os << "instances=" << report.instances << '\n';
  for (const auto& [name, s] : report.per_label) {
    os << "label." << name << ".precision=" << detail::format_double(s.precision) << '\n';
    os << "label." << name << ".recall=" << detail::format_double(s.recall) << '\n';
    os << "label." << name << ".f1=" << detail::format_double(s.f1) << '\n';
    os << "label." << name << ".support=" << s.support << '\n';
  }
  return os.str();
}

}  // namespace cebio

#endif  // CEBIO_SCORER_HPP
