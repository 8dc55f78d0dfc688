#ifndef CEBIO_TESTS_FIXTURE_HPP
#define CEBIO_TESTS_FIXTURE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

/// One corpus row plus the generator's own knowledge of whether its spans
/// fall on token boundaries (the independent expectation for alignment
/// audits).
struct FixtureRow {
  std::string id;
  std::string text;
  std::string cause;
  std::string effect;
  bool aligned = true;
};

/// Deterministic financial-flavored corpus in the shared-task shape.
/// Every clause carries a unique amount so window features can tell
/// instances apart. Roughly a tenth of the rows have spans deliberately
/// chopped mid-token; a few pairs of rows share identical text with
/// different pairs.
inline std::vector<FixtureRow> make_fixture_rows(std::size_t count, std::uint64_t seed) {
  static const char* cause_subjects[] = {
      "revenue",       "net income",     "operating profit", "customer demand",
      "factory output", "consumer spending", "free cash flow", "order intake",
      "the backlog",   "segment revenue"};
  static const char* effect_subjects[] = {
      "the shares",        "full-year guidance", "the dividend",     "hiring",
      "capital spending",  "the outlook",        "investor sentiment", "the stock price",
      "management confidence", "the payout ratio"};
  static const char* verbs[] = {"rose", "fell", "climbed", "declined", "improved",
                                "weakened", "surged", "slipped", "recovered", "dropped"};
  // every tail token sits within two positions of the unique amount
  static const char* tails[] = {"by AMT %", "to $ AMT million", "to AMT cents",
                                "since week AMT", "by nearly AMT %"};

  std::mt19937_64 rng(seed);
  std::vector<FixtureRow> rows;
  std::size_t serial = 0;

  auto clause = [&](const char* const* subjects) {
    const std::string amount =
        std::to_string(2 + serial++) + "." + std::to_string(static_cast<int>(rng() % 10));
    std::string tail = tails[rng() % 5];
    tail.replace(tail.find("AMT"), 3, amount);
    return std::string(subjects[rng() % 10]) + " " + verbs[rng() % 10] + " " + tail;
  };

  auto check_first = [](const std::string& text, const std::string& needle, std::size_t at) {
    if (text.find(needle) != at)
      throw std::logic_error("fixture generator: span is not first-anchored as constructed");
  };

  while (rows.size() < count) {
    const std::size_t i = rows.size();
    FixtureRow row;
    row.id = std::to_string(1000 + i) + "." + std::to_string(i % 7 + 1);

    if (i % 25 == 3 && rows.size() + 2 <= count) {
      // two chains over one text
      const std::string cause = clause(cause_subjects);
      const std::string effect_a = clause(effect_subjects);
      const std::string effect_b = clause(effect_subjects);
      const std::string text = cause + ", so " + effect_a + " and " + effect_b + ".";
      check_first(text, cause, 0);
      check_first(text, effect_a, cause.size() + 5);
      row.text = text;
      row.cause = cause;
      row.effect = effect_a;
      rows.push_back(row);
      FixtureRow second = row;
      second.id = row.id + "b";
      second.effect = effect_b;
      check_first(text, effect_b, cause.size() + 5 + effect_a.size() + 5);
      rows.push_back(second);
      continue;
    }

    const std::string cause = clause(cause_subjects);
    const std::string effect = clause(effect_subjects);
    std::size_t cause_at = 0, effect_at = 0;
    switch (i % 3) {
      case 0:
        row.text = cause + ", so " + effect + ".";
        cause_at = 0;
        effect_at = cause.size() + 5;
        break;
      case 1:
        row.text = effect + " because " + cause + ".";
        effect_at = 0;
        cause_at = effect.size() + 9;
        break;
      default:
        row.text = "Analysts said " + effect + " after " + cause + ".";
        effect_at = 14;
        cause_at = 14 + effect.size() + 7;
        break;
    }
    check_first(row.text, cause, cause_at);
    check_first(row.text, effect, effect_at);
    row.cause = cause;
    row.effect = effect;

    if (i % 10 == 7) {
      // span start chopped into the first token
      row.cause = cause.substr(1);
      check_first(row.text, row.cause, cause_at + 1);
      row.aligned = false;
    } else if (i % 20 == 14) {
      // span end chopped so the cut lands strictly inside a token
      std::size_t cut = effect.size() - 1;
      while (cut > 1 && (effect[cut - 1] == ' ' || effect[cut] == ' ')) --cut;
      row.effect = effect.substr(0, cut);
      check_first(row.text, row.effect, effect_at);
      row.aligned = false;
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_fixture_csv(const std::filesystem::path& path,
                              const std::vector<FixtureRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fixture: " + path.string());
  out << "Index; Text; Cause; Effect\n";
  for (const FixtureRow& r : rows)
    out << r.id << "; " << r.text << "; " << r.cause << "; " << r.effect << "\n";
}

}  // namespace testsupport

#endif
