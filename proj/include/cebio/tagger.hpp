#ifndef CEBIO_TAGGER_HPP
#define CEBIO_TAGGER_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cebio/bio.hpp"
#include "cebio/corpus.hpp"
#include "cebio/error.hpp"
#include "cebio/features.hpp"
#include "cebio/preproc_io.hpp"

namespace cebio {

/// Multinomial logistic-regression token classifier over the five BIO
/// classes, with window features fusing lexical context and POS one-hots.
struct TaggerModel {
  FeatureOptions features;
  Vocabulary vocab;
  std::vector<double> weights;  // [feature_id * kNumBioLabels + label_id]
  int epochs = 0;
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;

  double weight(std::uint32_t feature, int label) const {
    return weights[static_cast<std::size_t>(feature) * kNumBioLabels + static_cast<std::size_t>(label)];
  }
};

/// One training instance: its tokens plus the padded label-id layout
/// (length max_seq_len). Only ids at real-token positions enter the loss;
/// bracketing and tail-padding positions are skipped no matter what value
/// they hold (canonically -100).
struct TrainSequence {
  std::vector<Token> tokens;
  std::vector<int> label_ids;
};

struct TrainOptions {
  int epochs = 30;
  std::uint64_t seed = 42;
  int window = 2;
  bool use_pos = true;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::size_t batch_size = 64;
  std::size_t max_seq_len = 256;
  Bracketing bracketing = Bracketing::start_end;
};

inline TrainSequence make_train_sequence(const PreprocessedInstance& inst,
                                         std::size_t max_seq_len, Bracketing bracketing) {
  TagSequence tags{inst.id, inst.labels};
  return TrainSequence{inst.tokens, to_loss_ids(tags, max_seq_len, bracketing)};
}

namespace detail {

struct TrainPosition {
  std::uint32_t sequence;
  std::uint32_t token;
  int label;
};

inline int argmax_label(const std::array<double, kNumBioLabels>& scores) {
  int best = 0;
  for (int c = 1; c < kNumBioLabels; ++c)
    if (scores[c] > scores[best]) best = c;  // ties keep the lowest label id
  return best;
}

}  // namespace detail

/// Mini-batch SGD on the cross-entropy objective with L2 regularization.
/// Masked positions never contribute to the loss. Fully deterministic
/// given the seed: fixed shuffle order, fixed accumulation order.
inline TaggerModel train(std::span<const TrainSequence> data, const TrainOptions& opts) {
  if (opts.epochs < 1) throw DataError("epochs must be at least 1");
  if (opts.batch_size < 1) throw DataError("batch_size must be at least 1");
  if (opts.max_seq_len < 1) throw DataError("max_seq_len must be at least 1");
  if (data.empty()) throw DataError("no training data");

  TaggerModel model;
  model.features = FeatureOptions{opts.window, opts.use_pos};
  model.epochs = opts.epochs;
  model.seed = opts.seed;

  // Collect trainable positions and intern their features up front.
  std::vector<detail::TrainPosition> positions;
  std::vector<FeatureVector> feats;
  const std::size_t offset = bracketing_offset(opts.bracketing);
  for (std::size_t s = 0; s < data.size(); ++s) {
    const TrainSequence& seq = data[s];
    if (seq.label_ids.size() != opts.max_seq_len)
      throw DataError("sequence " + std::to_string(s) + ": label id layout has length " +
                      std::to_string(seq.label_ids.size()) + ", expected max_seq_len " +
                      std::to_string(opts.max_seq_len));
    const std::size_t real = real_token_capacity(seq.tokens.size(), opts.max_seq_len, opts.bracketing);
    for (std::size_t i = 0; i < real; ++i) {
      const int label = seq.label_ids[offset + i];
      if (label == kLossMaskId) continue;
      if (label < 0 || label >= kNumBioLabels)
        throw DataError("sequence " + std::to_string(s) + ": label id " + std::to_string(label) +
                        " at token " + std::to_string(i) + " is outside 0.." +
                        std::to_string(kNumBioLabels - 1));
      positions.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(i), label});
      feats.push_back(featurize_grow(seq.tokens, i, model.features, model.vocab));
    }
  }
  if (positions.empty()) throw DataError("no trainable positions");

  std::vector<double> v(model.vocab.size() * kNumBioLabels, 0.0);
  double scale = 1.0;

  std::vector<std::size_t> order(positions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(opts.seed);

  std::array<double, kNumBioLabels> scores{};
  std::array<double, kNumBioLabels> probs{};
  std::map<std::uint32_t, std::array<double, kNumBioLabels>> grad;  // ordered: deterministic

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(cebio::detail::bounded_uint64(rng, i + 1));
      std::swap(order[i], order[j]);
    }
    for (std::size_t batch_start = 0; batch_start < order.size(); batch_start += opts.batch_size) {
      const std::size_t batch_end = std::min(batch_start + opts.batch_size, order.size());
      const double inv_batch = 1.0 / static_cast<double>(batch_end - batch_start);
      grad.clear();

      for (std::size_t k = batch_start; k < batch_end; ++k) {
        const auto& pos = positions[order[k]];
        const FeatureVector& fv = feats[order[k]];

        scores.fill(0.0);
        for (std::uint32_t f : fv)
          for (int c = 0; c < kNumBioLabels; ++c) scores[c] += v[f * kNumBioLabels + c];
        double max_score = scores[0];
        for (int c = 1; c < kNumBioLabels; ++c) max_score = std::max(max_score, scores[c]);
        double z = 0.0;
        for (int c = 0; c < kNumBioLabels; ++c) {
          probs[c] = std::exp(scale * (scores[c] - max_score));
          z += probs[c];
        }
        for (int c = 0; c < kNumBioLabels; ++c) probs[c] /= z;

        for (std::uint32_t f : fv) {
          auto& g = grad[f];
          for (int c = 0; c < kNumBioLabels; ++c)
            g[c] += (probs[c] - (c == pos.label ? 1.0 : 0.0)) * inv_batch;
        }
      }

      // weight decay folded into the scale, then the gradient step
      scale *= 1.0 - opts.learning_rate * opts.l2;
      for (const auto& [f, g] : grad)
        for (int c = 0; c < kNumBioLabels; ++c)
          v[f * kNumBioLabels + c] -= opts.learning_rate * g[c] / scale;
      if (scale < 1e-6) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
  }

  model.weights.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) model.weights[i] = v[i] * scale;

  // held-in accuracy over the trainable positions
  std::size_t correct = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    scores.fill(0.0);
    for (std::uint32_t f : feats[k])
      for (int c = 0; c < kNumBioLabels; ++c) scores[c] += model.weights[f * kNumBioLabels + c];
    if (detail::argmax_label(scores) == positions[k].label) ++correct;
  }
  model.train_accuracy = static_cast<double>(correct) / static_cast<double>(positions.size());
  return model;
}

/// Per-position argmax over class scores; ties break toward the lowest
/// label id. Pure function of (model, tokens).
inline TagSequence predict(const TaggerModel& model, std::span<const Token> tokens,
                           std::string instance_id = {}) {
  TagSequence seq;
  seq.instance_id = std::move(instance_id);
  seq.labels.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::array<double, kNumBioLabels> scores{};
    for (std::uint32_t f : featurize(tokens, i, model.features, model.vocab))
      for (int c = 0; c < kNumBioLabels; ++c) scores[c] += model.weight(f, c);
    seq.labels.push_back(static_cast<BioLabel>(detail::argmax_label(scores)));
  }
  return seq;
}

namespace detail {

inline std::string format_double_hex(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

inline double parse_double_hex(const std::string& s, std::size_t line) {
  double value = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("bad hex float \"" + s + "\"", line);
  return value;
}

}  // namespace detail

/// Versioned text serialization. Weights are written as hex floats, so a
/// save/load round trip reproduces predictions bit for bit.
inline void save_model(std::ostream& out, const TaggerModel& model) {
  out << "cebio-model 1\n";
  out << "window " << model.features.window << '\n';
  out << "use_pos " << (model.features.use_pos ? 1 : 0) << '\n';
  out << "epochs " << model.epochs << '\n';
  out << "seed " << model.seed << '\n';
  out << "train_accuracy " << detail::format_double_hex(model.train_accuracy) << '\n';
  const Tagset& ts = Tagset::instance();
  out << "tagset " << ts.size() << '\n';
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << i << '\t' << ts.name(PosTag{static_cast<std::uint16_t>(i)}) << '\n';
  out << "features " << model.vocab.size() << '\n';
  for (const std::string& name : model.vocab.names()) out << name << '\n';
  std::size_t nonzero = 0;
  for (double w : model.weights)
    if (w != 0.0) ++nonzero;
  out << "weights " << nonzero << '\n';
  for (std::size_t i = 0; i < model.weights.size(); ++i)
    if (model.weights[i] != 0.0)
      out << i / kNumBioLabels << '\t' << i % kNumBioLabels << '\t'
          << detail::format_double_hex(model.weights[i]) << '\n';
  out << "end\n";
}

inline void save_model_file(const std::filesystem::path& path, const TaggerModel& model) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + tmp.string());
    save_model(out, model);
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline TaggerModel load_model(std::istream& in) {
  std::size_t line_no = 0;
  auto next_line = [&]() {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("unexpected end of model file", line_no);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  auto expect_kv = [&](const std::string& key) {
    const std::string line = next_line();
    if (line.rfind(key + " ", 0) != 0)
      throw FormatError("expected \"" + key + " ...\" in model file", line_no);
    return line.substr(key.size() + 1);
  };
  auto to_u64 = [&](const std::string& s) -> std::uint64_t {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw FormatError("bad number \"" + s + "\" in model file", line_no);
    }
  };

  if (next_line() != "cebio-model 1") throw FormatError("not a cebio model file (bad magic)", 1);
  TaggerModel model;
  model.features.window = static_cast<int>(to_u64(expect_kv("window")));
  model.features.use_pos = expect_kv("use_pos") == "1";
  model.epochs = static_cast<int>(to_u64(expect_kv("epochs")));
  model.seed = to_u64(expect_kv("seed"));
  model.train_accuracy = detail::parse_double_hex(expect_kv("train_accuracy"), line_no);

  const auto tagset_size = to_u64(expect_kv("tagset"));
  const Tagset& ts = Tagset::instance();
  if (tagset_size != ts.size()) throw FormatError("model tagset size mismatch", line_no);
  for (std::size_t i = 0; i < tagset_size; ++i) {
    const std::string line = next_line();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.substr(tab + 1) != ts.name(PosTag{static_cast<std::uint16_t>(i)}))
      throw FormatError("model tagset entry does not match this build's tagset", line_no);
  }

  const auto feature_count = to_u64(expect_kv("features"));
  for (std::size_t i = 0; i < feature_count; ++i) model.vocab.add_or_get(next_line());
  if (model.vocab.size() != feature_count)
    throw FormatError("duplicate feature names in model file", line_no);

  model.weights.assign(model.vocab.size() * kNumBioLabels, 0.0);
  const auto weight_count = to_u64(expect_kv("weights"));
  for (std::size_t i = 0; i < weight_count; ++i) {
    const std::string line = next_line();
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) throw FormatError("bad weight line", line_no);
    const auto fid = to_u64(line.substr(0, tab1));
    const auto label = to_u64(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (fid >= model.vocab.size() || label >= kNumBioLabels)
      throw FormatError("weight index out of range", line_no);
    model.weights[fid * kNumBioLabels + label] =
        detail::parse_double_hex(line.substr(tab2 + 1), line_no);
  }
  if (next_line() != "end") throw FormatError("missing end marker in model file", line_no);
  return model;
}

inline TaggerModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());
  return load_model(in);
}

/// Named collection of tag sequences from one classifier over a corpus.
struct PredictionSet {
  std::string model_name;
  std::map<std::string, TagSequence> sequences;  // instance id -> tags
};

/// Loads a prediction file (preprocessed format with predicted BIO
/// column) and validates it against the corpus: every instance id must
/// resolve, token surfaces must match this tokenizer's output exactly,
/// and every corpus instance must be present.
inline PredictionSet import_predictions(const std::filesystem::path& path, const Corpus& corpus,
                                        std::string model_name = {}) {
  PredictionSet set;
  set.model_name = model_name.empty() ? path.stem().string() : std::move(model_name);

  std::map<std::string, const Instance*> by_id;
  for (const Instance& inst : corpus.instances) by_id.emplace(inst.id, &inst);

  for (const PreprocessedInstance& pre : read_preprocessed_file(path)) {
    auto it = by_id.find(pre.id);
    if (it == by_id.end())
      throw DataError("prediction file " + path.string() + ": unknown instance id \"" + pre.id + "\"");
    const std::vector<Token> tokens = tokenize(it->second->text);
    if (tokens.size() != pre.tokens.size())
      throw AlignmentError("instance " + pre.id + ": prediction has " +
                           std::to_string(pre.tokens.size()) + " tokens, corpus text tokenizes to " +
                           std::to_string(tokens.size()));
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i].surface != pre.tokens[i].surface)
        throw AlignmentError("instance " + pre.id + ": token " + std::to_string(i) +
                             " surface \"" + pre.tokens[i].surface +
                             "\" does not match corpus tokenization \"" + tokens[i].surface + "\"");
    if (!set.sequences.emplace(pre.id, TagSequence{pre.id, pre.labels}).second)
      throw DataError("prediction file " + path.string() + ": duplicate block for instance \"" +
                      pre.id + "\"");
  }

  for (const Instance& inst : corpus.instances)
    if (!set.sequences.count(inst.id))
      throw DataError("prediction file " + path.string() + " is missing instance id \"" + inst.id + "\"");
  return set;
}

}  // namespace cebio

#endif  // CEBIO_TAGGER_HPP
