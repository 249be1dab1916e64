// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace fluid {

// Newline-delimited JSON reader. gzip input is detected from the stream, so
// plain and .gz files go through the same path. Empty lines are skipped.
class NdjsonReader {
 public:
  explicit NdjsonReader(const std::string& path);
  ~NdjsonReader();
  NdjsonReader(const NdjsonReader&) = delete;
  NdjsonReader& operator=(const NdjsonReader&) = delete;

  // Next line without the trailing newline; nullopt at end of input.
  std::optional<std::string> next();

 private:
  bool refill();

  void* gz_ = nullptr;
  std::string buf_;
  std::size_t pos_ = 0;
  bool eof_ = false;
};

// Writes lines, gzip-compressed when the path ends in ".gz".
class NdjsonWriter {
 public:
  explicit NdjsonWriter(const std::string& path);
  ~NdjsonWriter();
  NdjsonWriter(const NdjsonWriter&) = delete;
  NdjsonWriter& operator=(const NdjsonWriter&) = delete;

  void write(std::string_view line);
  void close();

 private:
  void* gz_ = nullptr;
  std::FILE* fp_ = nullptr;
};

}  // namespace fluid
