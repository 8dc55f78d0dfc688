#ifndef CEBIO_TOKENIZE_HPP
#define CEBIO_TOKENIZE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cebio {

/// Part-of-speech tag as an index into the fixed tagset (0 = padding pseudo-tag).
struct PosTag {
  std::uint16_t id = 0;

  friend bool operator==(const PosTag&, const PosTag&) = default;
};

/// Surface token anchored to its byte range in the original text.
struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  PosTag pos;
};

namespace detail {

/// Punctuation split off token edges. Currency marks and hyphens stay
/// attached so amounts like "$0.03" and compounds survive as one token.
inline bool is_edge_punct(char c) {
  switch (c) {
    case '.':
    case ',':
    case ';':
    case ':':
    case '!':
    case '?':
    case '"':
    case '\'':
    case '(':
    case ')':
    case '%':
      return true;
    default:
      return false;
  }
}

inline bool is_space_codepoint(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x20: case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

/// Decodes the UTF-8 codepoint at `i`, advancing `len` to its byte length.
/// Invalid bytes are treated as one-byte opaque (non-space) units.
inline std::uint32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  len = 1;
  if (b0 < 0x80) return b0;
  std::size_t need = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    return 0xFFFD;
  }
  if (i + need >= s.size()) return 0xFFFD;
  for (std::size_t k = 1; k <= need; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0xFFFD;
    cp = (cp << 6) | (b & 0x3F);
  }
  len = need + 1;
  return cp;
}

}  // namespace detail

/// Splits text on Unicode whitespace, then peels leading/trailing
/// punctuation into separate tokens. Offsets are byte positions; every
/// surface equals the text slice at its offsets.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t start, std::size_t end) {
    tokens.push_back(Token{std::string(text.substr(start, end - start)), start, end, PosTag{}});
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    std::size_t len = 1;
    if (detail::is_space_codepoint(detail::decode_utf8(text, i, len))) {
      i += len;
      continue;
    }
    // scan the whitespace-delimited chunk
    std::size_t chunk_start = i;
    std::size_t j = i;
    while (j < n) {
      std::size_t l = 1;
      if (detail::is_space_codepoint(detail::decode_utf8(text, j, l))) break;
      j += l;
    }
    std::size_t chunk_end = j;
    i = j;

    std::size_t b = chunk_start, e = chunk_end;
    while (b < e && detail::is_edge_punct(text[b])) {
      emit(b, b + 1);
      ++b;
    }
    std::size_t trail_begin = e;
    while (trail_begin > b && detail::is_edge_punct(text[trail_begin - 1])) --trail_begin;
    if (b < trail_begin) emit(b, trail_begin);
    for (std::size_t k = trail_begin; k < e; ++k) emit(k, k + 1);
  }
  return tokens;
}

}  // namespace cebio

#endif  // CEBIO_TOKENIZE_HPP
