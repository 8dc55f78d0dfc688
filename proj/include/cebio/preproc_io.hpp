#ifndef CEBIO_PREPROC_IO_HPP
#define CEBIO_PREPROC_IO_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cebio/bio.hpp"
#include "cebio/error.hpp"
#include "cebio/pos.hpp"
#include "cebio/tokenize.hpp"

namespace cebio {

/// One instance in the preprocessed text format: aligned token / POS / BIO
/// triples. Byte offsets are not part of the file; tokens read back get
/// synthetic offsets from joining surfaces with single spaces.
struct PreprocessedInstance {
  std::string id;
  std::vector<Token> tokens;
  std::vector<BioLabel> labels;
};

/// File layout: an instance header comment "# id=<instance_id>", one
/// "surface<TAB>pos<TAB>bio" line per token, a blank line after each
/// block. Unknown comment lines are ignored by readers.
inline void write_preprocessed(std::ostream& out,
                               const std::vector<PreprocessedInstance>& instances) {
  const Tagset& ts = Tagset::instance();
  for (const auto& inst : instances) {
    if (inst.labels.size() != inst.tokens.size())
      throw DataError("instance " + inst.id + ": label count does not match token count");
    out << "# id=" << inst.id << '\n';
    for (std::size_t i = 0; i < inst.tokens.size(); ++i)
      out << inst.tokens[i].surface << '\t' << ts.name(inst.tokens[i].pos) << '\t'
          << bio_name(inst.labels[i]) << '\n';
    out << '\n';
  }
}

/// Whole-file atomic write: content goes to a temp file first, then is
/// renamed over the target.
inline void write_preprocessed_file(const std::filesystem::path& path,
                                    const std::vector<PreprocessedInstance>& instances) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    write_preprocessed(out, instances);
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<PreprocessedInstance> read_preprocessed(std::istream& in) {
  const Tagset& ts = Tagset::instance();
  std::vector<PreprocessedInstance> instances;
  bool in_block = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      in_block = false;
      continue;
    }
    if (line[0] == '#') {
      constexpr std::string_view kHeader = "# id=";
      if (line.rfind(kHeader, 0) == 0) {
        instances.push_back(PreprocessedInstance{line.substr(kHeader.size()), {}, {}});
        in_block = true;
      }
      continue;  // other comment lines are ignored
    }
    if (!in_block)
      throw FormatError("token line outside an instance block (missing \"# id=\" header)", line_no);

    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos)
      throw FormatError("expected exactly 3 TAB-separated columns", line_no);

    const std::string surface = line.substr(0, tab1);
    const std::string pos_name = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string bio_str = line.substr(tab2 + 1);
    if (surface.empty()) throw FormatError("empty token surface", line_no);

    const auto pos = ts.find(pos_name);
    if (!pos) throw FormatError("unknown POS tag name \"" + pos_name + "\"", line_no);
    const auto bio = parse_bio(bio_str);
    if (!bio) throw FormatError("unknown BIO tag name \"" + bio_str + "\"", line_no);

    PreprocessedInstance& inst = instances.back();
    const std::size_t start = inst.tokens.empty() ? 0 : inst.tokens.back().end + 1;
    inst.tokens.push_back(Token{surface, start, start + surface.size(), *pos});
    inst.labels.push_back(*bio);
  }
  return instances;
}

inline std::vector<PreprocessedInstance> read_preprocessed_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  return read_preprocessed(in);
}

}  // namespace cebio

#endif  // CEBIO_PREPROC_IO_HPP
