#ifndef CEBIO_POS_HPP
#define CEBIO_POS_HPP

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cebio/error.hpp"
#include "cebio/tokenize.hpp"

namespace cebio {

/// Fixed tagset: the 36 Penn Treebank word tags plus the padding
/// pseudo-tag "-" at id 0. The id layout is what external classifiers
/// must reproduce, so it never changes at runtime.
class Tagset {
public:
  static const Tagset& instance() {
    static const Tagset tagset;
    return tagset;
  }

  std::size_t size() const { return names_.size(); }

  const std::string& name(PosTag tag) const {
    if (tag.id >= names_.size()) throw DataError("POS tag id out of range: " + std::to_string(tag.id));
    return names_[tag.id];
  }

  std::optional<PosTag> find(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return PosTag{it->second};
  }

  PosTag require(const std::string& name) const {
    auto tag = find(name);
    if (!tag) throw DataError("unknown POS tag name: " + name);
    return *tag;
  }

  static constexpr PosTag pad() { return PosTag{0}; }

  const std::vector<std::string>& names() const { return names_; }

private:
  Tagset() {
    names_ = {"-",
              "CC",  "CD",  "DT",   "EX",   "FW",  "IN",  "JJ",  "JJR", "JJS",
              "LS",  "MD",  "NN",   "NNP",  "NNPS", "NNS", "PDT", "POS", "PRP",
              "PRP$", "RB", "RBR",  "RBS",  "RP",  "SYM", "TO",  "UH",  "VB",
              "VBD", "VBG", "VBN",  "VBP",  "VBZ", "WDT", "WP",  "WP$", "WRB"};
    for (std::size_t i = 0; i < names_.size(); ++i)
      ids_.emplace(names_[i], static_cast<std::uint16_t>(i));
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint16_t> ids_;
};

namespace detail {

inline std::string lower_word(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

/// Closed-class lexicon: determiners, pronouns, prepositions, auxiliaries,
/// conjunctions, number words and frequent irregular past forms.
inline const std::unordered_map<std::string, const char*>& pos_lexicon() {
  static const std::unordered_map<std::string, const char*> lex = {
      // determiners
      {"the", "DT"}, {"a", "DT"}, {"an", "DT"}, {"this", "DT"}, {"that", "DT"},
      {"these", "DT"}, {"those", "DT"}, {"each", "DT"}, {"every", "DT"}, {"either", "DT"},
      {"neither", "DT"}, {"some", "DT"}, {"any", "DT"}, {"no", "DT"}, {"all", "DT"},
      {"both", "DT"}, {"another", "DT"},
      // pronouns
      {"i", "PRP"}, {"you", "PRP"}, {"he", "PRP"}, {"she", "PRP"}, {"it", "PRP"},
      {"we", "PRP"}, {"they", "PRP"}, {"me", "PRP"}, {"him", "PRP"}, {"us", "PRP"},
      {"them", "PRP"}, {"itself", "PRP"}, {"himself", "PRP"}, {"herself", "PRP"},
      {"themselves", "PRP"}, {"my", "PRP$"}, {"your", "PRP$"}, {"his", "PRP$"},
      {"her", "PRP$"}, {"its", "PRP$"}, {"our", "PRP$"}, {"their", "PRP$"},
      // prepositions and subordinating conjunctions
      {"of", "IN"}, {"in", "IN"}, {"on", "IN"}, {"for", "IN"}, {"with", "IN"},
      {"at", "IN"}, {"by", "IN"}, {"from", "IN"}, {"about", "IN"}, {"into", "IN"},
      {"over", "IN"}, {"after", "IN"}, {"under", "IN"}, {"between", "IN"},
      {"through", "IN"}, {"during", "IN"}, {"before", "IN"}, {"against", "IN"},
      {"among", "IN"}, {"within", "IN"}, {"without", "IN"}, {"since", "IN"},
      {"until", "IN"}, {"while", "IN"}, {"although", "IN"}, {"because", "IN"},
      {"if", "IN"}, {"than", "IN"}, {"as", "IN"}, {"per", "IN"}, {"via", "IN"},
      {"despite", "IN"}, {"amid", "IN"}, {"upon", "IN"}, {"across", "IN"},
      {"toward", "IN"}, {"towards", "IN"}, {"beyond", "IN"}, {"except", "IN"},
      {"to", "TO"},
      // coordinating conjunctions
      {"and", "CC"}, {"or", "CC"}, {"but", "CC"}, {"nor", "CC"}, {"plus", "CC"},
      // modals
      {"can", "MD"}, {"could", "MD"}, {"will", "MD"}, {"would", "MD"}, {"shall", "MD"},
      {"should", "MD"}, {"may", "MD"}, {"might", "MD"}, {"must", "MD"},
      // be / have / do
      {"is", "VBZ"}, {"has", "VBZ"}, {"does", "VBZ"}, {"was", "VBD"}, {"were", "VBD"},
      {"are", "VBP"}, {"am", "VBP"}, {"have", "VBP"}, {"do", "VBP"}, {"be", "VB"},
      {"been", "VBN"}, {"being", "VBG"}, {"had", "VBD"}, {"did", "VBD"},
      // number words
      {"one", "CD"}, {"two", "CD"}, {"three", "CD"}, {"four", "CD"}, {"five", "CD"},
      {"six", "CD"}, {"seven", "CD"}, {"eight", "CD"}, {"nine", "CD"}, {"ten", "CD"},
      {"eleven", "CD"}, {"twelve", "CD"}, {"hundred", "CD"}, {"thousand", "CD"},
      {"million", "CD"}, {"billion", "CD"}, {"trillion", "CD"}, {"zero", "CD"},
      // wh-words, existential there
      {"there", "EX"}, {"which", "WDT"}, {"who", "WP"}, {"whom", "WP"}, {"what", "WP"},
      {"whose", "WP$"}, {"when", "WRB"}, {"where", "WRB"}, {"why", "WRB"}, {"how", "WRB"},
      // frequent adverbs and particles
      {"not", "RB"}, {"n't", "RB"}, {"very", "RB"}, {"also", "RB"}, {"just", "RB"},
      {"only", "RB"}, {"then", "RB"}, {"now", "RB"}, {"here", "RB"}, {"too", "RB"},
      {"well", "RB"}, {"still", "RB"}, {"already", "RB"}, {"never", "RB"},
      {"always", "RB"}, {"often", "RB"}, {"again", "RB"}, {"so", "RB"},
      {"up", "RP"}, {"down", "RP"}, {"out", "RP"}, {"off", "RP"},
      // frequent irregular past forms
      {"drew", "VBD"}, {"rose", "VBD"}, {"fell", "VBD"}, {"grew", "VBD"}, {"paid", "VBD"},
      {"made", "VBD"}, {"took", "VBD"}, {"came", "VBD"}, {"went", "VBD"}, {"got", "VBD"},
      {"gave", "VBD"}, {"told", "VBD"}, {"said", "VBD"}, {"saw", "VBD"}, {"knew", "VBD"},
      {"found", "VBD"}, {"left", "VBD"}, {"felt", "VBD"}, {"kept", "VBD"}, {"held", "VBD"},
      {"wrote", "VBD"}, {"stood", "VBD"}, {"heard", "VBD"}, {"met", "VBD"}, {"ran", "VBD"},
      {"sat", "VBD"}, {"led", "VBD"}, {"lost", "VBD"}, {"sent", "VBD"}, {"built", "VBD"},
      {"broke", "VBD"}, {"chose", "VBD"}, {"began", "VBD"}, {"became", "VBD"},
      {"brought", "VBD"}, {"thought", "VBD"}, {"drove", "VBD"}, {"won", "VBD"},
      {"sold", "VBD"}, {"bought", "VBD"}, {"spent", "VBD"}, {"struck", "VBD"},
  };
  return lex;
}

inline bool has_digit(std::string_view s) {
  for (char c : s)
    if (c >= '0' && c <= '9') return true;
  return false;
}

inline bool has_alnum(std::string_view s) {
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) return true;
  return false;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

/// Assigns a tag to one token. Stage 1: closed-class lexicon. Stage 2:
/// suffix/shape rules (digit-bearing, pure punctuation, capitalized
/// non-initial, -ly, -ed, -ing, -er/-est, plural -s). Stage 3: NN.
inline PosTag pos_tag_word(std::string_view surface, std::size_t position) {
  const Tagset& ts = Tagset::instance();
  const std::string lower = detail::lower_word(surface);

  const auto& lex = detail::pos_lexicon();
  if (auto it = lex.find(lower); it != lex.end()) return ts.require(it->second);

  if (detail::has_digit(surface)) return ts.require("CD");
  if (!detail::has_alnum(surface)) return ts.require("SYM");
  if (position > 0 && !surface.empty() && std::isupper(static_cast<unsigned char>(surface[0])))
    return ts.require("NNP");
  if (surface.size() >= 3 && detail::ends_with(lower, "ly")) return ts.require("RB");
  if (surface.size() >= 3 && detail::ends_with(lower, "ed")) return ts.require("VBD");
  if (surface.size() >= 4 && detail::ends_with(lower, "ing")) return ts.require("VBG");
  if (surface.size() >= 4 && detail::ends_with(lower, "est")) return ts.require("JJS");
  if (surface.size() >= 4 && detail::ends_with(lower, "er")) return ts.require("JJR");
  if (surface.size() >= 3 && detail::ends_with(lower, "s") && !detail::ends_with(lower, "ss"))
    return ts.require("NNS");
  return ts.require("NN");
}

/// Tags every token in place and returns the sequence.
inline std::vector<Token> pos_tag(std::vector<Token> tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i].pos = pos_tag_word(tokens[i].surface, i);
  return tokens;
}

/// One-hot encoding of a POS tag. The padding pseudo-tag (id 0) maps to
/// the all-zero vector so padding positions carry no POS evidence.
inline std::vector<int> pos_one_hot(PosTag tag, std::size_t tagset_size) {
  if (tag.id >= tagset_size)
    throw DataError("POS tag id " + std::to_string(tag.id) + " out of range for tagset size " +
                    std::to_string(tagset_size));
  std::vector<int> v(tagset_size, 0);
  if (tag.id != 0) v[tag.id] = 1;
  return v;
}

/// Sidecar table "id<TAB>name" so external classifiers can reproduce the
/// same one-hot layout.
inline void write_tagset(std::ostream& out, const Tagset& ts = Tagset::instance()) {
  for (std::size_t i = 0; i < ts.size(); ++i)
    out << i << '\t' << ts.name(PosTag{static_cast<std::uint16_t>(i)}) << '\n';
}

inline void write_tagset_file(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write tagset file: " + path.string());
  write_tagset(out);
}

/// Reads a sidecar table back and checks it against the built-in layout.
inline std::vector<std::string> read_tagset(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("tagset line lacks a TAB separator", line_no);
    std::size_t id = 0;
    try {
      id = std::stoull(line.substr(0, tab));
    } catch (const std::exception&) {
      throw FormatError("bad tagset id field", line_no);
    }
    if (id != names.size()) throw FormatError("tagset ids must be dense and ascending", line_no);
    names.push_back(line.substr(tab + 1));
  }
  return names;
}

}  // namespace cebio

#endif  // CEBIO_POS_HPP
