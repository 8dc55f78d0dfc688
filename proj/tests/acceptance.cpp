// Acceptance suite: one pass/fail line per criterion.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cebio/bio.hpp"
#include "cebio/corpus.hpp"
#include "cebio/ensemble.hpp"
#include "cebio/pos.hpp"
#include "cebio/preproc_io.hpp"
#include "cebio/scorer.hpp"
#include "cebio/tagger.hpp"
#include "cebio/tokenize.hpp"
#include "support/fixture.hpp"
#include "support/synthetic.hpp"
#include "support/tmpdir.hpp"

using namespace cebio;

namespace {

struct CheckFailure {
  std::string message;
};

void expect(bool ok, const std::string& message) {
  if (!ok) throw CheckFailure{message};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Measured once on the first run of this suite (804 of 805 tokens) and
// frozen as the regression floor for the memorization criterion.
constexpr double kMemorizationFloor = 804.0 / 805.0;

// ---------------------------------------------------------------------------

std::string criterion_roundtrip() {
  testsupport::TempDir dir("acc1");
  const auto rows = testsupport::make_fixture_rows(220, 2025);
  testsupport::write_fixture_csv(dir.file("fixture.csv"), rows);
  const Corpus corpus = parse_corpus_file(dir.file("fixture.csv"), CorpusMode::training);
  expect(corpus.size() == 220, "fixture must keep all 220 instances");

  std::size_t aligned = 0, expected_aligned = 0;
  std::map<std::string, GoldPair> gold_pairs;
  std::map<std::string, std::optional<CausalPair>> replayed;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Instance& inst = corpus.instances[i];
    if (rows[i].aligned) ++expected_aligned;
    gold_pairs.emplace(inst.id, GoldPair{inst.cause->surface, inst.effect->surface});
    const auto tokens = tokenize(inst.text);
    try {
      const TagSequence tags = encode_bio(tokens, inst.cause, inst.effect, inst.id);
      const DecodedSpans decoded = decode_spans(tokens, tags, inst.text);
      expect(decoded.causes.size() == 1 && decoded.effects.size() == 1,
             "gold replay must yield exactly one candidate per slot");
      expect(decoded.causes[0].span.surface == inst.cause->surface,
             "decoded cause must equal the gold string byte-exactly (" + inst.id + ")");
      expect(decoded.effects[0].span.surface == inst.effect->surface,
             "decoded effect must equal the gold string byte-exactly (" + inst.id + ")");
      replayed[inst.id] = select_pair(decoded);
      ++aligned;
    } catch (const AlignmentError&) {
      replayed[inst.id] = std::nullopt;
    }
  }
  expect(aligned == expected_aligned, "audit alignment must match the fixture construction");
  expect(aligned < corpus.size(), "fixture must contain misaligned instances");
  expect(aligned * 2 > corpus.size(), "fixture must be mostly aligned");

  const double rate = static_cast<double>(aligned) / static_cast<double>(corpus.size());
  const double em = exact_match(gold_pairs, replayed);
  expect(std::abs(em - rate) <= 1e-9, "gold-replay exact match must equal the alignment rate");
  return "rate=" + fmt(rate) + ", replay_em=" + fmt(em);
}

std::string criterion_label_scheme() {
  const std::array<std::pair<int, std::string>, 5> table = {{
      {0, "-"}, {1, "B-C"}, {2, "I-C"}, {3, "B-E"}, {4, "I-E"},
  }};
  for (const auto& [id, name] : table) {
    const auto label = static_cast<BioLabel>(id);
    expect(bio_name(label) == name, "label id " + std::to_string(id) + " must be " + name);
    const auto parsed = parse_bio(name);
    expect(parsed.has_value() && *parsed == label, "name " + name + " must map back to " +
                                                       std::to_string(id));
  }
  expect(!parse_bio("O").has_value(), "outside tokens are written as padding, not as O");
  return "5/5 label ids";
}

std::string criterion_vote_oracle() {
  std::mt19937_64 rng(90210);
  std::size_t positions_checked = 0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t members = 2 + rng() % 6;   // 2..7
    const std::size_t length = 1 + rng() % 50;   // 1..50
    std::vector<TagSequence> preds(members);
    for (auto& p : preds) {
      p.instance_id = "r";
      for (std::size_t i = 0; i < length; ++i)
        p.labels.push_back(static_cast<BioLabel>(rng() % 5));
    }
    const std::size_t priority = rng() % members;
    EnsembleConfig config;
    for (std::size_t m = 0; m < members; ++m) config.members.push_back("m" + std::to_string(m));
    config.priority_model = "m" + std::to_string(priority);

    const TagSequence fused = vote(preds, config);
    for (std::size_t i = 0; i < length; ++i) {
      // brute force: count, collect argmax set, tie -> priority label
      std::map<int, int> counts;
      for (const auto& p : preds) counts[static_cast<int>(p.labels[i])]++;
      int max_count = 0;
      for (const auto& [label, count] : counts) max_count = std::max(max_count, count);
      std::vector<int> winners;
      for (const auto& [label, count] : counts)
        if (count == max_count) winners.push_back(label);
      const BioLabel want = winners.size() == 1 ? static_cast<BioLabel>(winners.front())
                                                : preds[priority].labels[i];
      expect(fused.labels[i] == want, "vote mismatch vs oracle at round " + std::to_string(round));
      ++positions_checked;
    }
  }
  return std::to_string(positions_checked) + " positions";
}

std::string criterion_scorer_oracle() {
  std::mt19937_64 rng(424242);
  for (int round = 0; round < 500; ++round) {
    std::vector<TagSequence> gold, pred;
    const std::size_t instances = 1 + rng() % 8;
    for (std::size_t k = 0; k < instances; ++k) {
      TagSequence g, p;
      g.instance_id = p.instance_id = "i" + std::to_string(k);
      const std::size_t len = 1 + rng() % 40;
      for (std::size_t i = 0; i < len; ++i) {
        g.labels.push_back(static_cast<BioLabel>(rng() % 5));
        p.labels.push_back(static_cast<BioLabel>(rng() % 5));
      }
      gold.push_back(std::move(g));
      pred.push_back(std::move(p));
    }

    // independent confusion-matrix computation
    long long confusion[kNumBioLabels][kNumBioLabels] = {};
    for (std::size_t k = 0; k < instances; ++k)
      for (std::size_t i = 0; i < gold[k].size(); ++i)
        confusion[static_cast<int>(gold[k].labels[i])][static_cast<int>(pred[k].labels[i])]++;
    double wp = 0, wr = 0, wf = 0;
    long long total = 0;
    for (int l = 0; l < kNumBioLabels; ++l) {
      long long tp = confusion[l][l], pred_count = 0, support = 0;
      for (int o = 0; o < kNumBioLabels; ++o) {
        pred_count += confusion[o][l];
        support += confusion[l][o];
      }
      const double p = pred_count ? double(tp) / double(pred_count) : 0.0;
      const double r = support ? double(tp) / double(support) : 0.0;
      const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
      wp += double(support) * p;
      wr += double(support) * r;
      wf += double(support) * f;
      total += support;
    }
    wp /= double(total);
    wr /= double(total);
    wf /= double(total);

    const ScoreReport report = token_prf(gold, pred);
    expect(std::abs(report.precision - wp) <= 1e-12, "precision differs from the oracle");
    expect(std::abs(report.recall - wr) <= 1e-12, "recall differs from the oracle");
    expect(std::abs(report.f1 - wf) <= 1e-12, "f1 differs from the oracle");

    const ScoreReport perfect = token_prf(gold, gold);
    expect(perfect.precision == 1.0 && perfect.recall == 1.0 && perfect.f1 == 1.0,
           "perfect predictions must score exactly 1.0");
  }
  return "500 random sets within 1e-12";
}

std::string criterion_merge_semantics() {
  // strict inequality at the threshold boundary
  auto seq_of = [](std::vector<int> ids) {
    TagSequence s;
    for (int v : ids) s.labels.push_back(static_cast<BioLabel>(v));
    return s;
  };
  for (std::size_t t = 1; t <= 4; ++t) {
    std::vector<int> gap_t{1};
    for (std::size_t k = 0; k < t; ++k) gap_t.push_back(0);
    gap_t.push_back(2);
    expect(merge_gapped_spans(seq_of(gap_t), t).labels == seq_of(gap_t).labels,
           "a gap of exactly the threshold must survive (t=" + std::to_string(t) + ")");

    std::vector<int> gap_below{1};
    for (std::size_t k = 0; k + 1 < t; ++k) gap_below.push_back(0);
    gap_below.push_back(2);
    const auto merged = merge_gapped_spans(seq_of(gap_below), t);
    for (BioLabel l : merged.labels)
      expect(l != BioLabel::Pad, "a gap below the threshold must be bridged");
  }

  std::mt19937_64 rng(5150);
  for (int round = 0; round < 1000; ++round) {
    TagSequence s;
    const std::size_t len = 1 + rng() % 40;
    for (std::size_t i = 0; i < len; ++i) s.labels.push_back(static_cast<BioLabel>(rng() % 5));
    const std::size_t threshold = rng() % 5;

    const TagSequence once = merge_gapped_spans(s, threshold);
    expect(merge_gapped_spans(once, threshold).labels == once.labels,
           "merge must be idempotent at fixpoint");
    if (threshold == 0)
      expect(once.labels == s.labels, "threshold 0 must be the identity");
    for (std::size_t i = 0; i < len; ++i) {
      if (s.labels[i] != BioLabel::Pad)
        expect(once.labels[i] != BioLabel::Pad, "merge must never erase a labeled token");
      if (once.labels[i] != s.labels[i])
        expect(once.labels[i] == BioLabel::InsideCause || once.labels[i] == BioLabel::InsideEffect,
               "every rewritten position must become an inside label");
    }

    // fixpoint shape: no same-type runs separated by a PAD gap below the threshold remain
    if (threshold > 0) {
      struct Run {
        std::size_t first, last;
        bool cause;
      };
      std::vector<Run> runs;
      for (std::size_t i = 0; i < len;) {
        if (once.labels[i] == BioLabel::Pad) {
          ++i;
          continue;
        }
        const bool cause = is_cause(once.labels[i]);
        std::size_t j = i + 1;
        while (j < len && once.labels[j] != BioLabel::Pad &&
               is_cause(once.labels[j]) == cause && !is_begin(once.labels[j]))
          ++j;
        runs.push_back(Run{i, j - 1, cause});
        i = j;
      }
      for (std::size_t r = 0; r + 1 < runs.size(); ++r)
        if (runs[r].cause == runs[r + 1].cause)
          expect(runs[r + 1].first - runs[r].last - 1 >= threshold,
                 "fixpoint must not leave a mergeable PAD gap");
    }
  }
  return "1000 sequences";
}

std::string criterion_loss_masking() {
  const auto rows = testsupport::make_fixture_rows(12, 31);
  const std::size_t msl = 96;
  std::vector<TrainSequence> base;
  for (const auto& row : rows) {
    if (!row.aligned) continue;
    const auto tokens = pos_tag(tokenize(row.text));
    const CharSpan cause{row.text.find(row.cause), row.text.find(row.cause) + row.cause.size(),
                         row.cause};
    const CharSpan effect{row.text.find(row.effect), row.text.find(row.effect) + row.effect.size(),
                          row.effect};
    const TagSequence tags = encode_bio(tokens, cause, effect, row.id);
    base.push_back(TrainSequence{tokens, to_loss_ids(tags, msl, Bracketing::start_end)});
  }

  std::vector<TrainSequence> variant = base;
  std::mt19937_64 rng(8);
  for (TrainSequence& seq : variant)
    for (int& id : seq.label_ids)
      if (id == kLossMaskId) id = static_cast<int>(rng() % 5);  // garbage at masked positions

  TrainOptions opts;
  opts.max_seq_len = msl;
  opts.epochs = 5;
  opts.seed = 99;

  std::ostringstream a, b;
  save_model(a, train(base, opts));
  save_model(b, train(variant, opts));
  expect(a.str() == b.str(), "masked-position labels must never reach the trained weights");
  return std::to_string(base.size()) + " sequences, byte-identical models";
}

std::string criterion_pos_fusion(double* with_pos_acc, double* ablated_acc) {
  const auto data =
      testsupport::make_pos_determined_data(60, 20, 12, 13579, 16, Bracketing::start_end);
  TrainOptions opts;
  opts.max_seq_len = 16;
  opts.epochs = 30;
  opts.seed = 7;

  const auto t0 = std::chrono::steady_clock::now();
  const auto with_pos = train(data.train, opts);
  const double acc_with = testsupport::eval_accuracy(with_pos, data);
  const auto t1 = std::chrono::steady_clock::now();

  opts.use_pos = false;
  const auto without_pos = train(data.train, opts);
  const double acc_without = testsupport::eval_accuracy(without_pos, data);
  const auto t2 = std::chrono::steady_clock::now();

  *with_pos_acc = acc_with;
  *ablated_acc = acc_without;
  expect(std::chrono::duration<double>(t1 - t0).count() < 60.0, "POS run must finish within 60 s");
  expect(std::chrono::duration<double>(t2 - t1).count() < 60.0,
         "ablation run must finish within 60 s");
  expect(acc_with >= 0.99, "POS-fused accuracy must reach 0.99, got " + fmt(acc_with));
  expect(acc_without <= 0.6, "ablated accuracy must stay at or below 0.6, got " + fmt(acc_without));
  return "with_pos=" + fmt(acc_with) + ", ablated=" + fmt(acc_without);
}

std::string criterion_memorization() {
  const auto rows = testsupport::make_fixture_rows(220, 2025);
  std::vector<TrainSequence> data;
  std::vector<std::pair<std::vector<Token>, std::vector<BioLabel>>> gold;
  const std::size_t msl = 128;
  std::set<std::string> seen_texts;
  for (const auto& row : rows) {
    if (!row.aligned) continue;
    // duplicate texts carry different gold pairs, so the same tokens would
    // demand conflicting labels; a memorization subset needs distinct texts
    if (!seen_texts.insert(row.text).second) continue;
    if (data.size() == 50) break;
    const auto tokens = pos_tag(tokenize(row.text));
    const CharSpan cause{row.text.find(row.cause), row.text.find(row.cause) + row.cause.size(),
                         row.cause};
    const CharSpan effect{row.text.find(row.effect), row.text.find(row.effect) + row.effect.size(),
                          row.effect};
    const TagSequence tags = encode_bio(tokens, cause, effect, row.id);
    data.push_back(TrainSequence{tokens, to_loss_ids(tags, msl, Bracketing::start_end)});
    gold.emplace_back(tokens, tags.labels);
  }
  expect(data.size() == 50, "memorization subset must hold 50 instances");

  TrainOptions opts;
  opts.max_seq_len = msl;
  opts.epochs = 1000;
  opts.seed = 42;
  const TaggerModel model = train(data, opts);

  std::size_t correct = 0, total = 0;
  for (const auto& [tokens, labels] : gold) {
    const TagSequence pred = predict(model, tokens);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      ++total;
      if (pred.labels[i] == labels[i]) ++correct;
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(total);
  expect(accuracy >= 0.99, "memorization accuracy must reach 0.99, got " + fmt(accuracy));
  expect(accuracy >= kMemorizationFloor,
         "memorization accuracy fell below the frozen floor " + fmt(kMemorizationFloor) +
             ", got " + fmt(accuracy));
  return "accuracy=" + std::to_string(correct) + "/" + std::to_string(total) + "=" + fmt(accuracy) + " on " + std::to_string(total) + " tokens";
}

std::string criterion_byte_stability() {
  testsupport::TempDir dir("acc9");
  auto rows = testsupport::make_fixture_rows(120, 777);
  std::vector<testsupport::FixtureRow> aligned;
  for (const auto& r : rows)
    if (r.aligned) aligned.push_back(r);
  testsupport::write_fixture_csv(dir.file("gold.csv"), aligned);
  const Corpus corpus = parse_corpus_file(dir.file("gold.csv"), CorpusMode::training);

  // three deterministic pseudo-members derived from the gold tags
  std::vector<std::string> member_files;
  for (int m = 0; m < 3; ++m) {
    std::vector<PreprocessedInstance> blocks;
    std::size_t counter = 0;
    for (const Instance& inst : corpus.instances) {
      PreprocessedInstance block;
      block.id = inst.id;
      block.tokens = pos_tag(tokenize(inst.text));
      block.labels = encode_bio(block.tokens, inst.cause, inst.effect, inst.id).labels;
      for (std::size_t i = 0; i < block.labels.size(); ++i, ++counter)
        if ((counter * 7 + static_cast<std::size_t>(m) * 3) % 11 == 0)
          block.labels[i] = static_cast<BioLabel>((static_cast<int>(block.labels[i]) + m + 1) % 5);
      blocks.push_back(std::move(block));
    }
    const auto path = dir.file("member" + std::to_string(m) + ".txt");
    write_preprocessed_file(path, blocks);
    member_files.push_back(path.string());
  }

  auto run_once = [&]() {
    std::vector<PredictionSet> sets;
    EnsembleConfig config;
    for (std::size_t m = 0; m < member_files.size(); ++m) {
      const std::string name = "m" + std::to_string(m);
      sets.push_back(import_predictions(member_files[m], corpus, name));
      config.members.push_back(name);
    }
    config.priority_model = "m0";
    config.merge_threshold = 3;
    const auto results = run_pipeline(sets, corpus, config);

    std::vector<TagSequence> gold_tags, fused_tags;
    std::map<std::string, GoldPair> gold_pairs;
    std::map<std::string, std::optional<CausalPair>> pred_pairs;
    for (const Instance& inst : corpus.instances) {
      const auto tokens = tokenize(inst.text);
      gold_tags.push_back(encode_bio(tokens, inst.cause, inst.effect, inst.id));
      gold_pairs.emplace(inst.id, GoldPair{inst.cause->surface, inst.effect->surface});
      fused_tags.push_back(results.at(inst.id).tags);
      fused_tags.back().instance_id = inst.id;
      pred_pairs[inst.id] = results.at(inst.id).pair;
    }
    const ScoreReport report = score_report(gold_tags, fused_tags, gold_pairs, pred_pairs);

    std::ostringstream blob;
    write_answers(blob, corpus, results);
    blob << render_report_kv(report);
    blob << render_report_text(report);
    return blob.str();
  };

  const std::string first = run_once();
  const std::string second = run_once();
  expect(first == second, "two runs over the same inputs must produce identical report bytes");
  expect(first.find("exact_match=") != std::string::npos, "report must carry the exact match");
  return std::to_string(aligned.size()) + " instances, identical across runs";
}

// ---------------------------------------------------------------------------

struct Criterion {
  int number;
  std::string title;
  double time_limit_s;  // 0 = no limit
  std::function<std::string()> body;
};

}  // namespace

int main() {
  double pos_acc = 0, ablated_acc = 0;
  const std::vector<Criterion> criteria = {
      {1, "round-trip fidelity and alignment-rate replay", 10.0, criterion_roundtrip},
      {2, "label-scheme conformance", 0.0, criterion_label_scheme},
      {3, "voting matches the brute-force oracle", 5.0, criterion_vote_oracle},
      {4, "scorer matches the confusion-matrix oracle", 0.0, criterion_scorer_oracle},
      {5, "merge thresholding semantics", 0.0, criterion_merge_semantics},
      {6, "loss masking keeps masked labels out of training", 0.0, criterion_loss_masking},
      {7, "POS fusion efficacy and ablation", 0.0,
       [&] { return criterion_pos_fusion(&pos_acc, &ablated_acc); }},
      {8, "memorization regression floor", 0.0, criterion_memorization},
      {9, "ensemble-and-score path is byte-stable", 0.0, criterion_byte_stability},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    std::string failure;
    try {
      detail = c.body();
    } catch (const CheckFailure& f) {
      failure = f.message;
    } catch (const std::exception& e) {
      failure = std::string("unexpected error: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failure.empty() && c.time_limit_s > 0 && elapsed > c.time_limit_s)
      failure = "exceeded the " + fmt(c.time_limit_s) + " s budget";

    std::ostringstream line;
    line.precision(2);
    line << std::fixed;
    if (failure.empty()) {
      line << "[PASS] " << c.number << ". " << c.title << " (" << detail << ", " << elapsed
           << "s)";
    } else {
      line << "[FAIL] " << c.number << ". " << c.title << ": " << failure;
      ++failed;
    }
    std::cout << line.str() << std::endl;
  }

  if (failed) {
    std::cout << failed << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
