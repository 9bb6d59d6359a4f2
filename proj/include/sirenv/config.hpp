#pragma once

// Plain-text key/value documents:
//
//   # comment
//   key = value
//
// Keys are unique; order is kept so that a document serializes back to the
// same bytes. Lists are comma-separated values.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sirenv/distribution.hpp"
#include "sirenv/error.hpp"

namespace sirenv {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text) {
    KeyValueDoc doc;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      ++line_no;
      start = end + 1;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw error(errc::parse_error, "config line " + std::to_string(line_no) + " is not 'key = value'");
      const auto key = detail::trim(line.substr(0, eq));
      const auto value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw error(errc::parse_error, "config line " + std::to_string(line_no) + " has an empty key");
      if (doc.find(key)) throw error(errc::parse_error, "config key '" + std::string(key) + "' appears twice");
      doc.set(std::string(key), std::string(value));
    }
    return doc;
  }

  static KeyValueDoc load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::parse_error, "cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return &v;
    return nullptr;
  }

  void set(std::string key, std::string value) {
    for (auto& [k, v] : entries_)
      if (k == key) {
        v = std::move(value);
        return;
      }
    entries_.emplace_back(std::move(key), std::move(value));
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  std::string to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// FNV-1a, printed as 16 hex digits.
inline std::string content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  auto res = std::to_chars(buf, buf + 16, h, 16);
  std::string hex(buf, res.ptr);
  return std::string(16 - hex.size(), '0') + hex;
}

namespace kv {

inline std::uint64_t to_u64(std::string_view text, std::string_view key) {
  std::uint64_t v = 0;
  auto t = detail::trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw error(errc::parse_error, std::string(key) + " expects a nonnegative integer, got '" + std::string(text) + "'");
  return v;
}

inline double to_double(std::string_view text, std::string_view key) {
  try {
    return detail::parse_number(detail::trim(text), key);
  } catch (const error&) {
    throw error(errc::parse_error, std::string(key) + " expects a finite number, got '" + std::string(text) + "'");
  }
}

inline std::vector<std::string_view> list(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto part : detail::split(text, ',')) {
    part = detail::trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? ", " : "") + parts[k];
  return out;
}

}  // namespace kv

}  // namespace sirenv
