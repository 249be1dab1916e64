// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fluid {

// One extracted field. `value` holds canonical text: string contents with
// escapes decoded, any other JSON value as its literal source text.
struct FieldValue {
  bool found = false;
  std::string value;
};

// Pulls a fixed set of dotted field paths ("repo.id", "payload.action") out
// of a JSON document in a single forward pass, skipping everything else.
// Malformed input never throws: whatever was found before the damage is
// reported and the rest stays `found == false`.
class FieldExtractor {
 public:
  FieldExtractor() = default;
  explicit FieldExtractor(std::vector<std::string> paths);

  const std::vector<std::string>& paths() const { return paths_; }
  std::size_t size() const { return paths_.size(); }

  // out.size() must equal size(). Returns the number of paths found.
  std::size_t extract(std::string_view doc, std::span<FieldValue> out) const;

 private:
  struct Node {
    std::string key;
    int slot = -1;
    std::vector<int> children;
  };
  struct Parser;

  std::vector<std::string> paths_;
  std::vector<Node> nodes_;  // nodes_[0] is the document root
};

std::optional<std::string> extract_field(std::string_view doc, std::string_view path);

std::vector<std::string> split_path(std::string_view path);

// Appends the JSON-escaped form of `s` (without quotes).
void append_escaped(std::string& out, std::string_view s);

// Event timestamp probe: finds the last `"key"` occurrence and parses an
// ISO-8601 UTC string ("2015-01-01T15:04:05Z", optional fraction/offset) or an
// integer of epoch milliseconds. Not a JSON parse.
std::optional<std::int64_t> probe_timestamp_ms(std::string_view doc, std::string_view key);

std::optional<std::int64_t> parse_iso8601_ms(std::string_view text);
std::string format_iso8601(std::int64_t ms);

}  // namespace fluid
