#ifndef CEBIO_FEATURES_HPP
#define CEBIO_FEATURES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cebio/error.hpp"
#include "cebio/pos.hpp"
#include "cebio/tokenize.hpp"

namespace cebio {

/// Active feature ids for one token position; every active feature
/// contributes weight 1.
using FeatureVector = std::vector<std::uint32_t>;

struct FeatureOptions {
  int window = 2;
  bool use_pos = true;  // POS one-hot fusion; disabled for ablation runs

  friend bool operator==(const FeatureOptions&, const FeatureOptions&) = default;
};

namespace detail {

/// Capitalization/digit pattern: X for upper, x for lower, d for digit,
/// u for non-ASCII bytes; other characters kept as themselves.
inline std::string word_shape(std::string_view surface) {
  std::string shape;
  shape.reserve(surface.size());
  for (char c : surface) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) shape += 'u';
    else if (c >= 'A' && c <= 'Z') shape += 'X';
    else if (c >= 'a' && c <= 'z') shape += 'x';
    else if (c >= '0' && c <= '9') shape += 'd';
    else shape += c;
  }
  return shape;
}

}  // namespace detail

/// Expands the feature templates for one position: lowercased surface,
/// POS tag and word shape at every offset in [-window, +window], plus a
/// bias. Out-of-range offsets contribute boundary word features only.
inline std::vector<std::string> feature_names(std::span<const Token> tokens, std::size_t position,
                                              const FeatureOptions& opts) {
  if (position >= tokens.size())
    throw DataError("feature position " + std::to_string(position) + " out of range (" +
                    std::to_string(tokens.size()) + " tokens)");
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(2 * opts.window + 1) * 3 + 1);
  names.emplace_back("b");
  for (int d = -opts.window; d <= opts.window; ++d) {
    const std::string off = std::to_string(d);
    const auto idx = static_cast<long long>(position) + d;
    if (idx < 0) {
      names.push_back("w[" + off + "]=<BOS>");
      continue;
    }
    if (idx >= static_cast<long long>(tokens.size())) {
      names.push_back("w[" + off + "]=<EOS>");
      continue;
    }
    const Token& t = tokens[static_cast<std::size_t>(idx)];
    names.push_back("w[" + off + "]=" + detail::lower_word(t.surface));
    if (opts.use_pos && t.pos.id != 0)
      names.push_back("p[" + off + "]=" + Tagset::instance().name(t.pos));
    names.push_back("s[" + off + "]=" + detail::word_shape(t.surface));
  }
  return names;
}

/// Feature-name interning table. Ids are assigned in first-seen order
/// during training and frozen afterwards, so the same vocabulary file
/// always yields the same feature layout.
class Vocabulary {
public:
  std::uint32_t add_or_get(const std::string& name) {
    auto [it, inserted] = ids_.emplace(name, static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }

  std::optional<std::uint32_t> lookup(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
};

/// Training-time featurization: interns unseen features into the
/// vocabulary.
inline FeatureVector featurize_grow(std::span<const Token> tokens, std::size_t position,
                                    const FeatureOptions& opts, Vocabulary& vocab) {
  FeatureVector out;
  for (const std::string& name : feature_names(tokens, position, opts))
    out.push_back(vocab.add_or_get(name));
  return out;
}

/// Prediction-time featurization against a frozen vocabulary; unseen
/// features are dropped (they carry no weight anyway).
inline FeatureVector featurize(std::span<const Token> tokens, std::size_t position,
                               const FeatureOptions& opts, const Vocabulary& vocab) {
  FeatureVector out;
  for (const std::string& name : feature_names(tokens, position, opts))
    if (auto id = vocab.lookup(name)) out.push_back(*id);
  return out;
}

}  // namespace cebio

#endif  // CEBIO_FEATURES_HPP
