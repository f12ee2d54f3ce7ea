#pragma once

// Shared text utilities: UTF-8 iteration, tokenization, number formatting
// and parsing, small file helpers.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "clir/error.hpp"

namespace clir {

/// Decodes the UTF-8 codepoint starting at `pos`, advancing `pos` past it.
/// Invalid sequences are consumed one byte at a time and returned verbatim
/// as their byte value (never throws; garbage in, garbage out).
inline char32_t utf8_next(std::string_view s, std::size_t& pos) {
  unsigned char b0 = static_cast<unsigned char>(s[pos]);
  std::size_t len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0)
    len = 4, cp = b0 & 0x07;
  else if (b0 >= 0xE0)
    len = 3, cp = b0 & 0x0F;
  else if (b0 >= 0xC0)
    len = 2, cp = b0 & 0x1F;
  if (pos + len > s.size()) {
    ++pos;
    return b0;
  }
  for (std::size_t i = 1; i < len; ++i) {
    unsigned char c = static_cast<unsigned char>(s[pos + i]);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return b0;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += len;
  return cp;
}

inline bool ascii_alnum(char32_t cp) {
  return (cp >= U'0' && cp <= U'9') || (cp >= U'A' && cp <= U'Z') ||
         (cp >= U'a' && cp <= U'z');
}

/// Token characters: ASCII letters/digits plus every codepoint above 0x7F.
/// Non-ASCII scripts (Devanagari, accented Latin, ...) are kept whole; only
/// ASCII punctuation, whitespace and control characters split tokens.
inline bool is_token_char(char32_t cp) { return cp > 0x7F || ascii_alnum(cp); }

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

/// ASCII-only case folding; bytes above 0x7F pass through untouched.
inline std::string fold_ascii(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(ascii_lower(c));
  return out;
}

/// Splits UTF-8 text into tokens on runs of non-token characters.
/// With `fold` set, ASCII letters are lowercased.
inline std::vector<std::string> tokenize(std::string_view text, bool fold) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t start = pos;
    char32_t cp = utf8_next(text, pos);
    if (is_token_char(cp)) {
      for (std::size_t i = start; i < pos; ++i)
        cur.push_back(fold ? ascii_lower(text[i]) : text[i]);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

/// Shortest decimal representation that round-trips the value.
template <typename Float>
std::string format_number(Float v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename Float>
std::optional<Float> parse_number(std::string_view s) {
  Float v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return {};
  return v;
}

inline std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return {};
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw data_error("short write: " + path.string());
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xF];
  return out;
}

}  // namespace clir
