// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/dpr/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

namespace fluid {

using nlohmann::json;

namespace {

bool is_word(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

class Lowercase : public TransformFn {
 public:
  bool apply(std::string_view in, std::string& out) const override {
    out.assign(in);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return true;
  }
};

// Crude suffix stripper. `rounds` repeats the normalization pass over each
// token; more rounds cost more and change nothing once a token is stable.
void stem(std::string& w) {
  static const char* kSuffixes[] = {"ingly", "edly", "ing", "ies", "ed", "ly", "es", "s"};
  for (const char* suf : kSuffixes) {
    std::string_view s(suf);
    if (w.size() > s.size() + 2 && std::string_view(w).substr(w.size() - s.size()) == s) {
      w.resize(w.size() - s.size());
      if (s == "ies") w.push_back('y');
      return;
    }
  }
}

class Tokenize : public TransformFn {
 public:
  explicit Tokenize(int rounds) : rounds_(rounds) {}
  bool apply(std::string_view in, std::string& out) const override {
    out.clear();
    std::string word;
    std::uint64_t mix = 0;
    auto flush = [&] {
      if (word.empty()) return;
      for (int r = 0; r < rounds_; ++r) {
        std::string w = word;
        stem(w);
        for (unsigned char c : w) mix = (mix ^ c) * 0x100000001b3ULL;
        if (r + 1 == rounds_) word = std::move(w);
      }
      if (!out.empty()) out.push_back(' ');
      out += word;
      word.clear();
    };
    for (unsigned char c : in) {
      if (is_word(c)) {
        word.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();
    sink_ = mix;
    return true;
  }

 private:
  int rounds_;
  static thread_local std::uint64_t sink_;
};

thread_local std::uint64_t Tokenize::sink_ = 0;

class KeywordFlag : public TransformFn {
 public:
  explicit KeywordFlag(std::unordered_set<std::string> kw) : kw_(std::move(kw)) {}
  bool apply(std::string_view in, std::string& out) const override {
    std::size_t i = 0;
    while (i < in.size()) {
      while (i < in.size() && !is_word(static_cast<unsigned char>(in[i]))) ++i;
      std::size_t j = i;
      while (j < in.size() && is_word(static_cast<unsigned char>(in[j]))) ++j;
      if (j > i && kw_.count(std::string(in.substr(i, j - i)))) {
        out = "true";
        return true;
      }
      i = j;
    }
    out = "false";
    return true;
  }

 private:
  std::unordered_set<std::string> kw_;
};

class HashMod : public TransformFn {
 public:
  explicit HashMod(std::uint64_t mod) : mod_(mod) {}
  bool apply(std::string_view in, std::string& out) const override {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : in) h = (h ^ c) * 0x100000001b3ULL;
    out = std::to_string(h % mod_);
    return true;
  }

 private:
  std::uint64_t mod_;
};

class LengthBucket : public TransformFn {
 public:
  explicit LengthBucket(std::uint64_t width) : width_(width) {}
  bool apply(std::string_view in, std::string& out) const override {
    out = std::to_string(in.size() / width_ * width_);
    return true;
  }

 private:
  std::uint64_t width_;
};

int rounds_of(const json& p) {
  int r = p.value("rounds", 1);
  if (r < 1 || r > 1000) throw std::invalid_argument("tokenize rounds must be in [1, 1000]");
  return r;
}

std::uint64_t positive(const json& p, const char* key, std::uint64_t dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  if (!it->is_number_integer() || it->get<std::int64_t>() <= 0)
    throw std::invalid_argument(std::string(key) + " must be a positive integer");
  return it->get<std::uint64_t>();
}

std::vector<CatalogEntry> build() {
  std::vector<CatalogEntry> c;
  c.push_back({"lowercase", "ASCII lowercase of the input field",
               [](const json&) { return 1.0; },
               [](const json&) -> std::unique_ptr<TransformFn> { return std::make_unique<Lowercase>(); },
               {}});
  c.push_back({"tokenize", "lowercased, stemmed word tokens joined by spaces; cost grows with rounds",
               [](const json& p) { return 4.0 + 4.0 * rounds_of(p); },
               [](const json& p) -> std::unique_ptr<TransformFn> { return std::make_unique<Tokenize>(rounds_of(p)); },
               {}});
  c.push_back({"keyword_flag", "\"true\" when any whitespace/punctuation separated word is a keyword",
               [](const json&) { return 2.0; },
               [](const json& p) -> std::unique_ptr<TransformFn> {
                 auto it = p.find("keywords");
                 if (it == p.end() || !it->is_array()) throw std::invalid_argument("keywords must be an array");
                 std::unordered_set<std::string> kw;
                 for (const auto& k : *it) {
                   if (!k.is_string()) throw std::invalid_argument("keywords must be strings");
                   kw.insert(k.get<std::string>());
                 }
                 return std::make_unique<KeywordFlag>(std::move(kw));
               },
               {"keywords"}});
  c.push_back({"hash_mod", "FNV-1a hash of the input modulo `mod`",
               [](const json&) { return 1.0; },
               [](const json& p) -> std::unique_ptr<TransformFn> {
                 return std::make_unique<HashMod>(positive(p, "mod", 16));
               },
               {}});
  c.push_back({"length_bucket", "input length rounded down to a multiple of `width`",
               [](const json&) { return 1.0; },
               [](const json& p) -> std::unique_ptr<TransformFn> {
                 return std::make_unique<LengthBucket>(positive(p, "width", 64));
               },
               {}});
  return c;
}

}  // namespace

const std::vector<CatalogEntry>& transform_catalog() {
  static const std::vector<CatalogEntry> c = build();
  return c;
}

const CatalogEntry* find_transform(std::string_view token) {
  for (const auto& e : transform_catalog())
    if (e.token == token) return &e;
  return nullptr;
}

}  // namespace fluid
