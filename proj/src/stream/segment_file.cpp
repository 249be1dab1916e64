// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/stream/segment_file.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace fluid {
namespace {

template <class T>
void put(std::string& buf, T v) {
  unsigned char bytes[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(u & 0xFF);
    u = static_cast<decltype(u)>(u >> 8);
  }
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(const char* p) {
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    u = static_cast<decltype(u)>(u << 8) | static_cast<unsigned char>(p[i]);
  }
  return static_cast<T>(u);
}

}  // namespace

std::string sealed_segment_name(Offset lo, Offset hi) {
  return "segment-" + std::to_string(lo) + "-" + std::to_string(hi) + ".log";
}

std::string active_segment_name(Offset lo) { return "segment-" + std::to_string(lo) + "-active.log"; }

SegmentFile::SegmentFile(std::filesystem::path dir, Offset lo) : dir_(std::move(dir)), lo_(lo) {
  const auto path = dir_ / active_segment_name(lo_);
  fp_ = std::fopen(path.c_str(), "ab");
  if (fp_ == nullptr) throw Error(ErrorCode::Io, "cannot open " + path.string());
}

SegmentFile::~SegmentFile() {
  if (fp_ != nullptr) std::fclose(fp_);
}

void SegmentFile::append(TimestampMs ingest_ts, TimestampMs event_ts, std::string_view payload) {
  std::string header;
  header.reserve(kRecordHeaderSize);
  put<std::uint32_t>(header, static_cast<std::uint32_t>(payload.size()));
  put<std::int64_t>(header, ingest_ts);
  put<std::int64_t>(header, event_ts);
  if (std::fwrite(header.data(), 1, header.size(), fp_) != header.size() ||
      std::fwrite(payload.data(), 1, payload.size(), fp_) != payload.size()) {
    throw Error(ErrorCode::Io, "segment write failed");
  }
}

void SegmentFile::flush() {
  if (fp_ != nullptr) std::fflush(fp_);
}

std::string SegmentFile::seal(std::uint64_t count, TimestampMs min_ts, TimestampMs max_ts) {
  std::string footer(kSegmentFooterMagic, sizeof kSegmentFooterMagic);
  put<std::uint64_t>(footer, lo_);
  put<std::uint64_t>(footer, count);
  put<std::int64_t>(footer, min_ts);
  put<std::int64_t>(footer, max_ts);
  if (std::fwrite(footer.data(), 1, footer.size(), fp_) != footer.size() || std::fclose(fp_) != 0) {
    fp_ = nullptr;
    throw Error(ErrorCode::Io, "segment seal failed");
  }
  fp_ = nullptr;
  const std::string name = sealed_segment_name(lo_, lo_ + count);
  std::filesystem::rename(dir_ / active_segment_name(lo_), dir_ / name);
  return name;
}

SegmentFileContents read_segment_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  SegmentFileContents out;
  std::size_t end = data.size();
  std::uint64_t footer_count = 0;
  if (data.size() >= kSegmentFooterSize &&
      std::memcmp(data.data() + data.size() - kSegmentFooterSize, kSegmentFooterMagic, 8) == 0) {
    const char* f = data.data() + data.size() - kSegmentFooterSize + 8;
    out.has_footer = true;
    out.lo = get<std::uint64_t>(f);
    footer_count = get<std::uint64_t>(f + 8);
    out.min_event_ts = get<std::int64_t>(f + 16);
    out.max_event_ts = get<std::int64_t>(f + 24);
    end -= kSegmentFooterSize;
    out.records.reserve(footer_count);
  }
  std::size_t pos = 0;
  while (pos + kRecordHeaderSize <= end) {
    const auto len = get<std::uint32_t>(data.data() + pos);
    if (pos + kRecordHeaderSize + len > end) break;
    StoredRecord r;
    r.ingest_ts = get<std::int64_t>(data.data() + pos + 4);
    r.event_ts = get<std::int64_t>(data.data() + pos + 12);
    r.payload.assign(data.data() + pos + kRecordHeaderSize, len);
    out.records.push_back(std::move(r));
    pos += kRecordHeaderSize + len;
  }
  if (out.has_footer && (pos != end || out.records.size() != footer_count)) {
    throw Error(ErrorCode::Io, "corrupt segment " + path.string());
  }
  return out;
}

}  // namespace fluid
