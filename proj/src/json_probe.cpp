// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/json_probe.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "fluid/simd/kernels.hpp"

namespace fluid {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::optional<std::uint32_t> hex4(std::string_view s) {
  if (s.size() < 4) return std::nullopt;
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const char c = s[static_cast<std::size_t>(i)];
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
    else return std::nullopt;
  }
  return v;
}

// Decodes the body of a JSON string (between the quotes).
bool decode_string(std::string_view body, std::string& out) {
  out.clear();
  std::size_t i = 0;
  while (i < body.size()) {
    const std::size_t bs = body.find('\\', i);
    if (bs == std::string_view::npos) {
      out.append(body.substr(i));
      return true;
    }
    out.append(body.substr(i, bs - i));
    if (bs + 1 >= body.size()) return false;
    const char e = body[bs + 1];
    i = bs + 2;
    switch (e) {
      case '"': out.push_back('"'); break;
      case '\\': out.push_back('\\'); break;
      case '/': out.push_back('/'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      case 'u': {
        auto cp = hex4(body.substr(i));
        if (!cp) return false;
        i += 4;
        if (*cp >= 0xD800 && *cp < 0xDC00 && i + 6 <= body.size() && body[i] == '\\' && body[i + 1] == 'u') {
          if (auto lo = hex4(body.substr(i + 2)); lo && *lo >= 0xDC00 && *lo < 0xE000) {
            *cp = 0x10000 + ((*cp - 0xD800) << 10) + (*lo - 0xDC00);
            i += 6;
          }
        }
        append_utf8(out, *cp);
        break;
      }
      default: return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    parts.emplace_back(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

FieldExtractor::FieldExtractor(std::vector<std::string> paths) : paths_(std::move(paths)) {
  nodes_.push_back(Node{});
  for (std::size_t slot = 0; slot < paths_.size(); ++slot) {
    int cur = 0;
    for (const auto& part : split_path(paths_[slot])) {
      int next = -1;
      for (int child : nodes_[static_cast<std::size_t>(cur)].children) {
        if (nodes_[static_cast<std::size_t>(child)].key == part) next = child;
      }
      if (next < 0) {
        next = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{part, -1, {}});
        nodes_[static_cast<std::size_t>(cur)].children.push_back(next);
      }
      cur = next;
    }
    // Duplicate paths share the first slot; extract() copies into the rest.
    if (nodes_[static_cast<std::size_t>(cur)].slot < 0) nodes_[static_cast<std::size_t>(cur)].slot = static_cast<int>(slot);
  }
}

struct FieldExtractor::Parser {
  const FieldExtractor& ex;
  std::span<FieldValue> out;
  const char* p;
  const char* end;
  std::size_t remaining;

  void ws() {
    while (p < end && is_ws(*p)) ++p;
  }

  // p at opening quote; leaves p after the closing quote. Returns body.
  std::optional<std::string_view> string_body(bool& escaped) {
    const char* start = ++p;
    escaped = false;
    while (p < end) {
      const std::size_t i = simd::find_any(std::string_view(p, static_cast<std::size_t>(end - p)), "\"\\");
      if (i == simd::npos) return std::nullopt;
      p += i;
      if (*p == '"') {
        std::string_view body(start, static_cast<std::size_t>(p - start));
        ++p;
        return body;
      }
      escaped = true;
      p += 2;
    }
    return std::nullopt;
  }

  bool skip_nested() {
    int depth = 0;
    while (p < end) {
      const std::size_t i = simd::find_any(std::string_view(p, static_cast<std::size_t>(end - p)), "\"{}[]");
      if (i == simd::npos) return false;
      p += i;
      switch (*p) {
        case '"': {
          bool esc;
          if (!string_body(esc)) return false;
          continue;
        }
        case '{':
        case '[': ++depth; break;
        default:
          if (--depth == 0) {
            ++p;
            return true;
          }
      }
      ++p;
    }
    return false;
  }

  bool skip_scalar() {
    const char* start = p;
    while (p < end && *p != ',' && *p != '}' && *p != ']' && !is_ws(*p)) ++p;
    return p > start;
  }

  bool skip_value() {
    ws();
    if (p >= end) return false;
    if (*p == '"') {
      bool esc;
      return string_body(esc).has_value();
    }
    if (*p == '{' || *p == '[') return skip_nested();
    return skip_scalar();
  }

  void capture(const Node& node, std::string_view text, bool is_string, bool escaped) {
    FieldValue& fv = out[static_cast<std::size_t>(node.slot)];
    if (fv.found) return;
    if (is_string && escaped) {
      if (!decode_string(text, fv.value)) return;
    } else {
      fv.value.assign(text);
    }
    fv.found = true;
    --remaining;
  }

  bool value(const Node& node) {
    ws();
    if (p >= end) return false;
    const char* start = p;
    if (*p == '"') {
      bool esc;
      auto body = string_body(esc);
      if (!body) return false;
      if (node.slot >= 0) capture(node, *body, true, esc);
      return true;
    }
    if (*p == '{' && !node.children.empty()) {
      if (!object(node)) return false;
    } else if (*p == '{' || *p == '[') {
      if (!skip_nested()) return false;
    } else if (!skip_scalar()) {
      return false;
    }
    if (node.slot >= 0) capture(node, std::string_view(start, static_cast<std::size_t>(p - start)), false, false);
    return true;
  }

  // p at '{'. Returns false on malformed input or when every path is found.
  bool object(const Node& node) {
    ++p;
    ws();
    if (p < end && *p == '}') {
      ++p;
      return true;
    }
    while (p < end) {
      ws();
      if (p >= end || *p != '"') return false;
      bool esc;
      auto key = string_body(esc);
      if (!key) return false;
      ws();
      if (p >= end || *p != ':') return false;
      ++p;
      const Node* child = nullptr;
      for (int c : node.children) {
        const Node& n = ex.nodes_[static_cast<std::size_t>(c)];
        if (n.key == *key) {
          child = &n;
          break;
        }
      }
      if (child != nullptr) {
        if (!value(*child)) return false;
        if (remaining == 0) return false;
      } else if (!skip_value()) {
        return false;
      }
      ws();
      if (p >= end) return false;
      if (*p == ',') {
        ++p;
        continue;
      }
      if (*p == '}') {
        ++p;
        return true;
      }
      return false;
    }
    return false;
  }
};

std::size_t FieldExtractor::extract(std::string_view doc, std::span<FieldValue> out) const {
  for (auto& fv : out) fv.found = false;
  if (paths_.empty()) return 0;
  Parser parser{*this, out, doc.data(), doc.data() + doc.size(), paths_.size()};
  // Count distinct slots; duplicates are filled in below.
  std::size_t distinct = 0;
  for (const auto& n : nodes_) distinct += n.slot >= 0 ? 1 : 0;
  parser.remaining = distinct;
  parser.ws();
  if (parser.p < parser.end && *parser.p == '{') parser.object(nodes_[0]);
  std::size_t found = 0;
  for (std::size_t i = 0; i < paths_.size(); ++i) {
    if (!out[i].found) {
      for (std::size_t j = 0; j < i; ++j) {
        if (paths_[j] == paths_[i] && out[j].found) out[i] = out[j];
      }
    }
    found += out[i].found ? 1 : 0;
  }
  return found;
}

std::optional<std::string> extract_field(std::string_view doc, std::string_view path) {
  FieldExtractor ex({std::string(path)});
  FieldValue v;
  if (ex.extract(doc, std::span<FieldValue>(&v, 1)) == 0) return std::nullopt;
  return std::move(v.value);
}

void append_escaped(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
}

namespace {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool digits(std::string_view s, std::size_t pos, std::size_t n, int& v) {
  if (pos + n > s.size()) return false;
  v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
  int y, mo, d, h, mi, sec;
  if (!digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !digits(s, 5, 2, mo) || s[7] != '-' ||
      !digits(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !digits(s, 11, 2, h) || s[13] != ':' ||
      !digits(s, 14, 2, mi) || s[16] != ':' || !digits(s, 17, 2, sec)) {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) return std::nullopt;
  std::size_t pos = 19;
  std::int64_t frac_ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      frac_ms += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
  }
  std::int64_t offset_min = 0;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    int oh, om;
    if (!digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' || !digits(s, pos + 4, 2, om)) {
      return std::nullopt;
    }
    offset_min = (s[pos] == '+' ? 1 : -1) * (oh * 60 + om);
  }
  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  const std::int64_t secs = days * 86400 + h * 3600 + mi * 60 + sec - offset_min * 60;
  return secs * 1000 + frac_ms;
}

std::string format_iso8601(std::int64_t ms) {
  std::int64_t secs = ms >= 0 ? ms / 1000 : (ms - 999) / 1000;
  std::int64_t days = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
  std::int64_t rem = secs - days * 86400;
  // civil_from_days
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const auto doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

std::optional<std::int64_t> probe_timestamp_ms(std::string_view doc, std::string_view key) {
  std::string needle;
  needle.reserve(key.size() + 2);
  needle.push_back('"');
  needle.append(key);
  needle.push_back('"');
  const std::size_t at = simd::rfind(doc, needle);
  if (at == simd::npos) return std::nullopt;
  std::size_t i = at + needle.size();
  while (i < doc.size() && is_ws(doc[i])) ++i;
  if (i >= doc.size() || doc[i] != ':') return std::nullopt;
  ++i;
  while (i < doc.size() && is_ws(doc[i])) ++i;
  if (i >= doc.size()) return std::nullopt;
  if (doc[i] == '"') {
    const std::size_t close = doc.find('"', i + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return parse_iso8601_ms(doc.substr(i + 1, close - i - 1));
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(doc.data() + i, doc.data() + doc.size(), v);
  if (ec != std::errc{} || ptr == doc.data() + i) return std::nullopt;
  return v;
}

}  // namespace fluid
