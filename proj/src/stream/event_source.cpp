// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/stream/event_source.hpp"

#include <zlib.h>

#include <cstdio>

#include "fluid/types.hpp"

namespace fluid {

NdjsonReader::NdjsonReader(const std::string& path) {
  gz_ = gzopen(path.c_str(), "rb");
  if (gz_ == nullptr) throw Error(ErrorCode::Io, "cannot open " + path);
  gzbuffer(static_cast<gzFile>(gz_), 1 << 17);
}

NdjsonReader::~NdjsonReader() {
  if (gz_ != nullptr) gzclose(static_cast<gzFile>(gz_));
}

bool NdjsonReader::refill() {
  if (eof_) return false;
  buf_.erase(0, pos_);
  pos_ = 0;
  const std::size_t old = buf_.size();
  buf_.resize(old + (1 << 16));
  const int n = gzread(static_cast<gzFile>(gz_), buf_.data() + old, 1 << 16);
  if (n < 0) throw Error(ErrorCode::Io, "read error in ndjson input");
  buf_.resize(old + static_cast<std::size_t>(n));
  if (n == 0) eof_ = true;
  return n > 0;
}

std::optional<std::string> NdjsonReader::next() {
  while (true) {
    const std::size_t nl = buf_.find('\n', pos_);
    if (nl != std::string::npos) {
      std::string line = buf_.substr(pos_, nl - pos_);
      pos_ = nl + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      return line;
    }
    if (!refill()) {
      if (pos_ < buf_.size()) {
        std::string line = buf_.substr(pos_);
        pos_ = buf_.size();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return line;
      }
      return std::nullopt;
    }
  }
}

NdjsonWriter::NdjsonWriter(const std::string& path) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gz_ = gzopen(path.c_str(), "wb6");
    if (gz_ == nullptr) throw Error(ErrorCode::Io, "cannot create " + path);
  } else {
    fp_ = std::fopen(path.c_str(), "wb");
    if (fp_ == nullptr) throw Error(ErrorCode::Io, "cannot create " + path);
  }
}

NdjsonWriter::~NdjsonWriter() { close(); }

void NdjsonWriter::write(std::string_view line) {
  if (gz_ != nullptr) {
    gzwrite(static_cast<gzFile>(gz_), line.data(), static_cast<unsigned>(line.size()));
    gzputc(static_cast<gzFile>(gz_), '\n');
  } else if (fp_ != nullptr) {
    std::fwrite(line.data(), 1, line.size(), fp_);
    std::fputc('\n', fp_);
  }
}

void NdjsonWriter::close() {
  if (gz_ != nullptr) gzclose(static_cast<gzFile>(gz_));
  if (fp_ != nullptr) std::fclose(fp_);
  gz_ = nullptr;
  fp_ = nullptr;
}

}  // namespace fluid
