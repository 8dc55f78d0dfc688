// cebio - cause/effect span tagging pipeline.
//
// Subcommands: preprocess, train, predict, ensemble, score, audit.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cebio/bio.hpp"
#include "cebio/corpus.hpp"
#include "cebio/ensemble.hpp"
#include "cebio/error.hpp"
#include "cebio/pos.hpp"
#include "cebio/preproc_io.hpp"
#include "cebio/scorer.hpp"
#include "cebio/tagger.hpp"
#include "cebio/tokenize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void require_writable(const std::filesystem::path& path, bool force) {
  if (!force && std::filesystem::exists(path))
    throw cebio::DataError("output file exists (use --force to overwrite): " + path.string());
}

cebio::CorpusMode parse_mode(const std::string& mode) {
  if (mode == "training") return cebio::CorpusMode::training;
  if (mode == "test") return cebio::CorpusMode::test;
  throw CLI::ValidationError("--mode must be 'training' or 'test'");
}

char parse_delimiter(const std::string& s) {
  if (s.size() != 1) throw CLI::ValidationError("--delimiter must be a single character");
  return s[0];
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw cebio::DataError("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw cebio::DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessArgs {
  std::string corpus_path;
  std::string mode = "training";
  std::string out_path;
  std::string delimiter = ";";
  bool loose_align = false;
  bool force = false;
};

int cmd_preprocess(const PreprocessArgs& args) {
  const cebio::CorpusMode mode = parse_mode(args.mode);
  require_writable(args.out_path, args.force);
  require_writable(args.out_path + ".tagset", args.force);
  const cebio::Corpus corpus =
      cebio::parse_corpus_file(args.corpus_path, mode, parse_delimiter(args.delimiter));

  std::vector<cebio::PreprocessedInstance> blocks;
  std::vector<std::string> failures;
  for (const cebio::Instance& inst : corpus.instances) {
    cebio::PreprocessedInstance block;
    block.id = inst.id;
    block.tokens = cebio::pos_tag(cebio::tokenize(inst.text));
    try {
      if (mode == cebio::CorpusMode::training)
        block.labels =
            cebio::encode_bio(block.tokens, inst.cause, inst.effect, inst.id, args.loose_align)
                .labels;
      else
        block.labels.assign(block.tokens.size(), cebio::BioLabel::Pad);
    } catch (const cebio::AlignmentError& e) {
      failures.push_back(inst.id + ": " + e.what());
      continue;
    }
    blocks.push_back(std::move(block));
  }

  std::cout << "instances: " << corpus.size() << "\n";
  std::cout << "alignment failures: " << failures.size() << "\n";
  if (!failures.empty()) {
    for (const std::string& f : failures) std::cerr << "alignment failure: " << f << "\n";
    std::cerr << "no output written\n";
    return kExitData;
  }
  cebio::write_preprocessed_file(args.out_path, blocks);
  cebio::write_tagset_file(args.out_path + ".tagset");
  std::cout << "wrote " << args.out_path << " and " << args.out_path << ".tagset\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data_path;
  std::string out_path;
  int epochs = 30;
  std::uint64_t seed = 42;
  int window = 2;
  std::size_t max_seq_len = 256;
  std::string bracketing = "start_end";
  bool no_pos = false;
  bool force = false;
};

int cmd_train(const TrainArgs& args) {
  require_writable(args.out_path, args.force);
  const auto bracketing = cebio::parse_bracketing(args.bracketing);
  if (!bracketing) throw CLI::ValidationError("--bracketing must be none, start_end or end_only");

  cebio::TrainOptions opts;
  opts.epochs = args.epochs;
  opts.seed = args.seed;
  opts.window = args.window;
  opts.use_pos = !args.no_pos;
  opts.max_seq_len = args.max_seq_len;
  opts.bracketing = *bracketing;
  std::cout << "config: seed=" << opts.seed << " epochs=" << opts.epochs
            << " window=" << opts.window << " max_seq_len=" << opts.max_seq_len
            << " bracketing=" << cebio::bracketing_name(opts.bracketing)
            << " use_pos=" << (opts.use_pos ? 1 : 0) << "\n";

  std::vector<cebio::TrainSequence> data;
  std::size_t truncated_total = 0;
  for (const auto& inst : cebio::read_preprocessed_file(args.data_path)) {
    cebio::TagSequence tags{inst.id, inst.labels};
    std::size_t truncated = 0;
    auto ids = cebio::to_loss_ids(tags, opts.max_seq_len, opts.bracketing, &truncated);
    if (truncated) {
      std::cerr << "warning: instance " << inst.id << " truncated by " << truncated
                << " tokens\n";
      truncated_total += truncated;
    }
    data.push_back(cebio::TrainSequence{inst.tokens, std::move(ids)});
  }

  const cebio::TaggerModel model = cebio::train(data, opts);
  cebio::save_model_file(args.out_path, model);
  std::cout << "sequences: " << data.size() << "\n";
  if (truncated_total) std::cout << "truncated tokens: " << truncated_total << "\n";
  std::cout << "held-in accuracy: " << model.train_accuracy << "\n";
  std::cout << "wrote " << args.out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  bool force = false;
};

int cmd_predict(const PredictArgs& args) {
  require_writable(args.out_path, args.force);
  const cebio::TaggerModel model = cebio::load_model_file(args.model_path);

  std::vector<cebio::PreprocessedInstance> blocks = cebio::read_preprocessed_file(args.data_path);
  for (auto& block : blocks)
    block.labels = cebio::predict(model, block.tokens, block.id).labels;
  cebio::write_preprocessed_file(args.out_path, blocks);
  std::cout << "instances: " << blocks.size() << "\n";
  std::cout << "wrote " << args.out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// ensemble

struct EnsembleArgs {
  std::string corpus_path;
  std::string mode = "test";
  std::vector<std::string> member_paths;
  std::vector<std::string> names;
  std::string priority_model;
  std::size_t merge_threshold = 3;
  std::string out_tags;
  std::string out_pairs;
  std::string delimiter = ";";
  bool force = false;
};

int cmd_ensemble(const EnsembleArgs& args) {
  if (!args.out_tags.empty()) require_writable(args.out_tags, args.force);
  if (!args.out_pairs.empty()) require_writable(args.out_pairs, args.force);
  const cebio::Corpus corpus =
      cebio::parse_corpus_file(args.corpus_path, parse_mode(args.mode), parse_delimiter(args.delimiter));

  if (!args.names.empty() && args.names.size() != args.member_paths.size())
    throw CLI::ValidationError("--names must list one name per member file");

  cebio::EnsembleConfig config;
  std::vector<cebio::PredictionSet> sets;
  for (std::size_t i = 0; i < args.member_paths.size(); ++i) {
    const std::string name =
        i < args.names.size() ? args.names[i]
                              : std::filesystem::path(args.member_paths[i]).stem().string();
    sets.push_back(cebio::import_predictions(args.member_paths[i], corpus, name));
    config.members.push_back(name);
  }
  config.priority_model = args.priority_model.empty() && !config.members.empty()
                              ? config.members.front()
                              : args.priority_model;
  config.merge_threshold = args.merge_threshold;
  std::cout << "config: members=" << config.members.size()
            << " priority=" << config.priority_model
            << " merge_threshold=" << config.merge_threshold << "\n";

  const auto results = cebio::run_pipeline(sets, corpus, config);

  std::size_t extracted = 0;
  for (const auto& [id, result] : results)
    if (result.pair) ++extracted;
  std::cout << "instances: " << corpus.size() << "\n";
  std::cout << "extracted pairs: " << extracted << "\n";

  if (!args.out_tags.empty()) {
    std::vector<cebio::PreprocessedInstance> blocks;
    for (const cebio::Instance& inst : corpus.instances) {
      cebio::PreprocessedInstance block;
      block.id = inst.id;
      block.tokens = cebio::pos_tag(cebio::tokenize(inst.text));
      block.labels = results.at(inst.id).tags.labels;
      blocks.push_back(std::move(block));
    }
    cebio::write_preprocessed_file(args.out_tags, blocks);
    std::cout << "wrote " << args.out_tags << "\n";
  }
  if (!args.out_pairs.empty()) {
    std::ostringstream out;
    cebio::write_answers(out, corpus, results, parse_delimiter(args.delimiter));
    write_text_file(args.out_pairs, out.str());
    std::cout << "wrote " << args.out_pairs << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string corpus_path;
  std::string pred_path;
  std::string pairs_path;
  std::string out_prefix;
  std::string delimiter = ";";
  bool loose_align = false;
  bool force = false;
};

int cmd_score(const ScoreArgs& args) {
  const std::string text_path = args.out_prefix + ".txt";
  const std::string kv_path = args.out_prefix + ".kv";
  require_writable(text_path, args.force);
  require_writable(kv_path, args.force);

  const cebio::Corpus corpus = cebio::parse_corpus_file(
      args.corpus_path, cebio::CorpusMode::training, parse_delimiter(args.delimiter));

  // gold tags replayed over this tokenizer
  std::vector<cebio::TagSequence> gold_tags;
  std::map<std::string, cebio::GoldPair> gold_pairs;
  for (const cebio::Instance& inst : corpus.instances) {
    const auto tokens = cebio::tokenize(inst.text);
    try {
      gold_tags.push_back(
          cebio::encode_bio(tokens, inst.cause, inst.effect, inst.id, args.loose_align));
    } catch (const cebio::AlignmentError& e) {
      throw cebio::AlignmentError("instance \"" + inst.id + "\": " + e.what() +
                                  " (rerun with --loose-align to snap gold spans)");
    }
    gold_pairs.emplace(inst.id,
                       cebio::GoldPair{inst.cause ? inst.cause->surface : std::string(),
                                       inst.effect ? inst.effect->surface : std::string()});
  }

  const cebio::PredictionSet pred = cebio::import_predictions(args.pred_path, corpus);
  std::vector<cebio::TagSequence> pred_tags;
  for (const auto& [id, seq] : pred.sequences) pred_tags.push_back(seq);

  // predicted pairs: from the answers file when given, else decoded from tags
  std::map<std::string, std::optional<cebio::CausalPair>> pred_pairs;
  if (!args.pairs_path.empty()) {
    pred_pairs = cebio::read_answer_pairs_file(args.pairs_path, parse_delimiter(args.delimiter));
  } else {
    for (const cebio::Instance& inst : corpus.instances) {
      const auto tokens = cebio::tokenize(inst.text);
      const auto decoded = cebio::decode_spans(tokens, pred.sequences.at(inst.id), inst.text);
      pred_pairs[inst.id] = cebio::select_pair(decoded);
    }
  }

  const cebio::ScoreReport report = cebio::score_report(gold_tags, pred_tags, gold_pairs, pred_pairs);
  write_text_file(text_path, cebio::render_report_text(report));
  write_text_file(kv_path, cebio::render_report_kv(report));
  std::cout << cebio::render_report_text(report);
  std::cout << "wrote " << text_path << " and " << kv_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
  std::string corpus_path;
  std::string delimiter = ";";
};

int cmd_audit(const AuditArgs& args) {
  const cebio::Corpus corpus = cebio::parse_corpus_file(
      args.corpus_path, cebio::CorpusMode::training, parse_delimiter(args.delimiter));
  if (corpus.instances.empty()) throw cebio::DataError("empty corpus");

  std::size_t aligned = 0;
  std::map<std::string, cebio::GoldPair> gold_pairs;
  std::map<std::string, std::optional<cebio::CausalPair>> replayed;
  for (const cebio::Instance& inst : corpus.instances) {
    gold_pairs.emplace(inst.id,
                       cebio::GoldPair{inst.cause ? inst.cause->surface : std::string(),
                                       inst.effect ? inst.effect->surface : std::string()});
    const auto tokens = cebio::tokenize(inst.text);
    try {
      const auto tags = cebio::encode_bio(tokens, inst.cause, inst.effect, inst.id);
      const auto decoded = cebio::decode_spans(tokens, tags, inst.text);
      replayed[inst.id] = cebio::select_pair(decoded);
      ++aligned;
    } catch (const cebio::AlignmentError& e) {
      std::cerr << "not token-aligned: " << e.what() << "\n";
      replayed[inst.id] = std::nullopt;
    }
  }

  const double rate = static_cast<double>(aligned) / static_cast<double>(corpus.size());
  const double em = cebio::exact_match(gold_pairs, replayed);
  std::cout << "instances: " << corpus.size() << "\n";
  std::cout << "token-aligned: " << aligned << "\n";
  std::cout << "alignment_rate=" << rate << "\n";
  std::cout << "gold_replay_exact_match=" << em << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cause/effect span tagging pipeline"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* sub_pre = app.add_subcommand("preprocess", "corpus file -> token/POS/BIO text format");
  sub_pre->add_option("--corpus", pre.corpus_path, "corpus file")->required();
  sub_pre->add_option("--mode", pre.mode, "training or test");
  sub_pre->add_option("--out", pre.out_path, "output path")->required();
  sub_pre->add_option("--delimiter", pre.delimiter, "field delimiter (default ';')");
  sub_pre->add_flag("--loose-align", pre.loose_align, "snap span boundaries to token boundaries");
  sub_pre->add_flag("--force", pre.force, "overwrite existing outputs");

  TrainArgs tr;
  auto* sub_tr = app.add_subcommand("train", "preprocessed file -> baseline tagger model");
  sub_tr->add_option("--data", tr.data_path, "preprocessed training file")->required();
  sub_tr->add_option("--out", tr.out_path, "model output path")->required();
  sub_tr->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
  sub_tr->add_option("--seed", tr.seed);
  sub_tr->add_option("--window", tr.window)->check(CLI::NonNegativeNumber);
  sub_tr->add_option("--max-seq-len", tr.max_seq_len)->check(CLI::PositiveNumber);
  sub_tr->add_option("--bracketing", tr.bracketing, "none | start_end | end_only");
  sub_tr->add_flag("--no-pos", tr.no_pos, "ablate POS features");
  sub_tr->add_flag("--force", tr.force, "overwrite existing outputs");

  PredictArgs pr;
  auto* sub_pr = app.add_subcommand("predict", "model + preprocessed file -> prediction file");
  sub_pr->add_option("--model", pr.model_path)->required();
  sub_pr->add_option("--data", pr.data_path)->required();
  sub_pr->add_option("--out", pr.out_path)->required();
  sub_pr->add_flag("--force", pr.force, "overwrite existing outputs");

  EnsembleArgs en;
  auto* sub_en = app.add_subcommand("ensemble", "fuse member predictions and extract pairs");
  sub_en->add_option("--corpus", en.corpus_path)->required();
  sub_en->add_option("--mode", en.mode, "training or test");
  sub_en->add_option("--members", en.member_paths, "prediction files")->required()->expected(-1);
  sub_en->add_option("--names", en.names, "member names (default: file stems)");
  sub_en->add_option("--priority-model", en.priority_model, "tie-breaking member (default: first)");
  sub_en->add_option("--merge-threshold", en.merge_threshold, "PAD-gap merge threshold");
  sub_en->add_option("--out-tags", en.out_tags, "fused prediction file");
  sub_en->add_option("--out-pairs", en.out_pairs, "answer-shape pairs file");
  sub_en->add_option("--delimiter", en.delimiter);
  sub_en->add_flag("--force", en.force, "overwrite existing outputs");

  ScoreArgs sc;
  auto* sub_sc = app.add_subcommand("score", "gold corpus + predictions -> score report");
  sub_sc->add_option("--corpus", sc.corpus_path, "gold corpus (training mode)")->required();
  sub_sc->add_option("--pred", sc.pred_path, "prediction file")->required();
  sub_sc->add_option("--pairs", sc.pairs_path, "answer-shape pairs file (optional)");
  sub_sc->add_option("--out", sc.out_prefix, "report path prefix")->required();
  sub_sc->add_option("--delimiter", sc.delimiter);
  sub_sc->add_flag("--loose-align", sc.loose_align, "snap gold spans to token boundaries");
  sub_sc->add_flag("--force", sc.force, "overwrite existing outputs");

  AuditArgs au;
  auto* sub_au = app.add_subcommand("audit", "gold round-trip alignment audit");
  sub_au->add_option("--corpus", au.corpus_path)->required();
  sub_au->add_option("--delimiter", au.delimiter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sub_pre->parsed()) return cmd_preprocess(pre);
    if (sub_tr->parsed()) return cmd_train(tr);
    if (sub_pr->parsed()) return cmd_predict(pr);
    if (sub_en->parsed()) return cmd_ensemble(en);
    if (sub_sc->parsed()) return cmd_score(sc);
    if (sub_au->parsed()) return cmd_audit(au);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cebio::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
