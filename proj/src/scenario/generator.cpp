// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/scenario/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluid/json_probe.hpp"
#include "fluid/stream/event_source.hpp"

namespace fluid {

using nlohmann::json;

namespace {

constexpr TimestampMs kHourMs = 3'600'000;

// Relative hourly activity, UTC. Hours 6, 7 and 12 are the (equal) maxima.
constexpr double kDiurnalShape[24] = {0.46, 0.42, 0.40, 0.42, 0.52, 0.70, 1.00, 1.00, 0.86, 0.80, 0.84, 0.90,
                                      1.00, 0.92, 0.88, 0.84, 0.78, 0.72, 0.66, 0.62, 0.58, 0.54, 0.52, 0.48};

const std::vector<std::pair<std::string, double>> kDefaultMix = {
    {"PushEvent", 0.45},  {"WatchEvent", 0.12},  {"IssueCommentEvent", 0.12}, {"PullRequestEvent", 0.10},
    {"CreateEvent", 0.08}, {"IssuesEvent", 0.06}, {"ForkEvent", 0.04},         {"DeleteEvent", 0.03},
};

const char* const kLanguages[] = {"JavaScript", "Python", "Go",     "Java", "TypeScript", "C++",
                                  "Rust",       "Ruby",   "PHP",    "C#",   "Shell",      "Kotlin"};

const char* const kWords[] = {
    "the",     "a",      "this",     "fix",     "bug",      "crash",  "when",    "using",  "thanks",  "lgtm",
    "please",  "merge",  "rebase",   "test",    "fails",    "on",     "windows", "linux",  "macos",   "build",
    "error",   "could",  "you",      "add",     "docs",     "for",    "new",     "option", "works",   "now",
    "repro",   "steps",  "version",  "latest",  "release",  "broken", "again",   "still",  "seeing",  "issue",
    "memory",  "leak",   "slow",     "startup", "config",   "file",   "missing", "null",   "pointer", "panic",
    "stupid",  "garbage", "useless", "spam",    "awesome",  "great",  "idea",    "agree",  "nit",     "typo",
    "ci",      "green",  "flaky",    "retry",   "ping",     "review", "approve", "closing", "duplicate", "of",
    "\"quoted\"", "C:\\tmp", "line\nbreak", "tab\there", "naïve", "emoji🙂"};

constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

std::vector<double> zipf_cdf(std::size_t n, double s) {
  std::vector<double> cdf(n);
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
    cdf[i] = acc;
  }
  for (auto& c : cdf) c /= acc;
  return cdf;
}

// Bijective rank -> entity index scramble so that popular ranks are not
// adjacent ids.
std::size_t scramble(std::size_t rank, std::size_t n) {
  return static_cast<std::size_t>((static_cast<std::uint64_t>(rank) * 2654435761ULL + 12345) % n);
}

void append_str(std::string& out, std::string_view key, std::string_view v) {
  out += '"';
  out += key;
  out += "\":\"";
  append_escaped(out, v);
  out += '"';
}

void append_int(std::string& out, std::string_view key, std::int64_t v) {
  out += '"';
  out += key;
  out += "\":";
  out += std::to_string(v);
}

}  // namespace

std::vector<double> diurnal_curve(double peak_per_hour) {
  std::vector<double> out(24);
  for (int h = 0; h < 24; ++h) out[h] = std::round(kDiurnalShape[h] * peak_per_hour);
  return out;
}

std::vector<double> parse_rate_curve(const std::string& text) {
  auto num = [&](std::string_view s) {
    try {
      std::size_t used = 0;
      double v = std::stod(std::string(s), &used);
      if (used != s.size() || v < 0) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad rate curve: " + text);
    }
  };
  if (text.rfind("diurnal:", 0) == 0) return diurnal_curve(num(std::string_view(text).substr(8)));
  if (text.rfind("flat:", 0) == 0) return {num(std::string_view(text).substr(5))};
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::round(num(item)));
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty rate curve");
  return out;
}

json GeneratorParams::to_json() const {
  json mix = json::object();
  for (const auto& [t, w] : type_mix) mix[t] = w;
  return {{"seed", seed},
          {"start_ms", start_ms},
          {"rate_curve", rate_curve},
          {"hours", hours},
          {"repos", repos},
          {"actors", actors},
          {"orgs", orgs},
          {"zipf_s", zipf_s},
          {"disorder_ms", disorder_ms},
          {"type_mix", mix},
          {"plant", plant},
          {"spike_repo_rank", spike_repo_rank},
          {"spike_from_hour", spike_from_hour},
          {"spike_to_hour", spike_to_hour},
          {"spike_share", spike_share},
          {"spam_actor_rank", spam_actor_rank},
          {"spam_share", spam_share}};
}

GeneratorParams GeneratorParams::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "generator params must be an object");
  GeneratorParams p;
  try {
    p.seed = j.value("seed", p.seed);
    if (j.contains("start")) {
      auto t = parse_iso8601_ms(j.at("start").get<std::string>());
      if (!t) throw Error(ErrorCode::InvalidArgument, "bad generator start");
      p.start_ms = *t;
    }
    p.start_ms = j.value("start_ms", p.start_ms);
    if (j.contains("rate_curve")) {
      const auto& rc = j.at("rate_curve");
      p.rate_curve = rc.is_string() ? parse_rate_curve(rc.get<std::string>()) : rc.get<std::vector<double>>();
    }
    p.hours = j.value("hours", p.hours);
    p.repos = j.value("repos", p.repos);
    p.actors = j.value("actors", p.actors);
    p.orgs = j.value("orgs", p.orgs);
    p.zipf_s = j.value("zipf_s", p.zipf_s);
    p.disorder_ms = j.value("disorder_ms", p.disorder_ms);
    if (j.contains("type_mix")) p.type_mix = j.at("type_mix").get<std::map<std::string, double>>();
    p.plant = j.value("plant", p.plant);
    p.spike_repo_rank = j.value("spike_repo_rank", p.spike_repo_rank);
    p.spike_from_hour = j.value("spike_from_hour", p.spike_from_hour);
    p.spike_to_hour = j.value("spike_to_hour", p.spike_to_hour);
    p.spike_share = j.value("spike_share", p.spike_share);
    p.spam_actor_rank = j.value("spam_actor_rank", p.spam_actor_rank);
    p.spam_share = j.value("spam_share", p.spam_share);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("generator params: ") + e.what());
  }
  if (p.hours <= 0 || p.repos == 0 || p.actors == 0 || p.orgs == 0 || p.disorder_ms < 0)
    throw Error(ErrorCode::InvalidArgument, "generator params out of range");
  if (p.spike_repo_rank >= p.repos || p.spam_actor_rank >= p.actors)
    throw Error(ErrorCode::InvalidArgument, "planted rank outside the population");
  return p;
}

std::uint64_t GeneratorParams::total_events() const {
  const auto curve = rate_curve.empty() ? diurnal_curve(10000) : rate_curve;
  std::uint64_t n = 0;
  for (int h = 0; h < hours; ++h) n += static_cast<std::uint64_t>(curve[h % curve.size()]);
  return n;
}

EventGenerator::EventGenerator(GeneratorParams p) : p_(std::move(p)), rng_(p_.seed) {
  if (p_.rate_curve.empty()) p_.rate_curve = diurnal_curve(10000);
  repo_cdf_ = zipf_cdf(p_.repos, p_.zipf_s);
  actor_cdf_ = zipf_cdf(p_.actors, p_.zipf_s);
  if (p_.type_mix.empty()) {
    mix_ = kDefaultMix;
  } else {
    for (const auto& kv : p_.type_mix)
      if (kv.second > 0) mix_.push_back(kv);
  }
  if (mix_.empty()) throw Error(ErrorCode::InvalidArgument, "event type mix has no positive weight");
  double total = 0;
  for (auto& [t, w] : mix_) total += w;
  double acc = 0;
  for (auto& [t, w] : mix_) {
    acc += w / total;
    w = acc;
  }
  mix_.back().second = 1.0;

  planted_.spike_repo = repo(p_.spike_repo_rank);
  planted_.spam_actor = actor(p_.spam_actor_rank);
  planted_.spam_repo = planted_.spike_repo;
}

Repo EventGenerator::repo(std::size_t rank) const {
  const std::size_t i = scramble(rank, p_.repos);
  Repo r;
  r.id = 10'000'000 + static_cast<std::int64_t>(i);
  r.name = "org" + std::to_string(i % p_.orgs) + "/repo" + std::to_string(i);
  r.language = kLanguages[(i * 7 + 3) % (sizeof(kLanguages) / sizeof(kLanguages[0]))];
  return r;
}

Actor EventGenerator::actor(std::size_t rank) const {
  const std::size_t i = scramble(rank, p_.actors);
  return Actor{50'000'000 + static_cast<std::int64_t>(i), "user" + std::to_string(i)};
}

std::size_t EventGenerator::zipf(const std::vector<double>& cdf) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  return static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) % cdf.size();
}

const std::string& EventGenerator::pick_type(TimestampMs) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  for (const auto& [t, c] : mix_)
    if (u < c) return t;
  return mix_.back().first;
}

std::string EventGenerator::comment_body() {
  const int n = std::uniform_int_distribution<int>(3, 30)(rng_);
  std::string body;
  for (int i = 0; i < n; ++i) {
    if (i) body += ' ';
    body += kWords[std::uniform_int_distribution<std::size_t>(0, kWordCount - 1)(rng_)];
  }
  return body;
}

void EventGenerator::fill_hour() {
  pending_.clear();
  next_ = 0;
  const auto n = static_cast<std::uint64_t>(p_.rate_curve[static_cast<std::size_t>(hour_) % p_.rate_curve.size()]);
  const TimestampMs h0 = p_.start_ms + hour_ * kHourMs;
  std::uniform_int_distribution<TimestampMs> at(0, kHourMs - 1);
  std::uniform_int_distribution<TimestampMs> late(0, p_.disorder_ms);
  pending_.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const TimestampMs ts = h0 + at(rng_);
    // Arrival is the event time plus bounded delay, kept inside the hour so
    // per-hour counts stay exact on the ingest side as well.
    const TimestampMs arrival = std::min(ts + late(rng_), h0 + kHourMs - 1);
    pending_.push_back({ts, arrival, seq_++});
  }
  std::sort(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.seq < b.seq;
  });
}

bool EventGenerator::next(std::string& line) {
  while (next_ >= pending_.size()) {
    if (hour_ >= p_.hours) return false;
    fill_hour();
    ++hour_;
  }
  line = render(pending_[next_++].event_ts);
  ++emitted_;
  return true;
}

std::string EventGenerator::render(TimestampMs ts) {
  const int hour = static_cast<int>((ts - p_.start_ms) / kHourMs);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::string type = pick_type(ts);
  Repo r = repo(zipf(repo_cdf_));
  Actor a = actor(zipf(actor_cdf_));
  if (p_.plant) {
    if (u01(rng_) < p_.spam_share) {
      type = "IssueCommentEvent";
      a = planted_.spam_actor;
      r = planted_.spam_repo;
    } else if (type == "PullRequestEvent" && hour >= p_.spike_from_hour && hour < p_.spike_to_hour &&
               u01(rng_) < p_.spike_share) {
      r = planted_.spike_repo;
    }
  }

  const std::uint64_t id = 30'000'000'000ULL + emitted_;
  const int number = std::uniform_int_distribution<int>(1, 5000)(rng_);
  std::string out;
  out.reserve(512);
  out += "{\"id\":\"" + std::to_string(id) + "\",";
  append_str(out, "type", type);
  out += ",\"actor\":{";
  append_int(out, "id", a.id);
  out += ',';
  append_str(out, "login", a.login);
  out += "},\"repo\":{";
  append_int(out, "id", r.id);
  out += ',';
  append_str(out, "name", r.name);
  out += "},\"payload\":{";

  if (type == "PushEvent") {
    append_int(out, "push_id", static_cast<std::int64_t>(id) * 3);
    out += ',';
    append_int(out, "size", std::uniform_int_distribution<int>(1, 12)(rng_));
    out += ",\"ref\":\"refs/heads/main\"";
  } else if (type == "PullRequestEvent") {
    static const char* const kActions[] = {"opened", "closed", "reopened", "synchronize"};
    append_str(out, "action", kActions[std::uniform_int_distribution<int>(0, 3)(rng_)]);
    out += ',';
    append_int(out, "number", number);
    out += ",\"pull_request\":{";
    append_int(out, "id", static_cast<std::int64_t>(id) * 7);
    out += ',';
    append_str(out, "title", "Update " + std::to_string(number));
    out += ",\"base\":{\"repo\":{";
    append_int(out, "id", r.id);
    out += ',';
    append_str(out, "language", r.language);
    out += "}}}";
  } else if (type == "IssueCommentEvent") {
    out += "\"action\":\"created\",\"issue\":{";
    append_int(out, "number", number);
    out += "},\"comment\":{";
    append_int(out, "id", static_cast<std::int64_t>(id) * 5);
    out += ',';
    append_str(out, "body", comment_body());
    out += '}';
  } else if (type == "IssuesEvent") {
    append_str(out, "action", u01(rng_) < 0.6 ? "opened" : "closed");
    out += ",\"issue\":{";
    append_int(out, "number", number);
    out += '}';
  } else if (type == "WatchEvent") {
    out += "\"action\":\"started\"";
  } else if (type == "CreateEvent") {
    out += u01(rng_) < 0.7 ? "\"ref_type\":\"branch\",\"ref\":\"feature-" + std::to_string(number) + "\""
                           : std::string("\"ref_type\":\"tag\",\"ref\":\"v1.") + std::to_string(number % 40) + "\"";
  } else if (type == "ForkEvent") {
    out += "\"forkee\":{";
    append_int(out, "id", static_cast<std::int64_t>(id) * 11);
    out += '}';
  } else if (type == "DeleteEvent") {
    out += "\"ref_type\":\"branch\",\"ref\":\"feature-" + std::to_string(number) + "\"";
  }
  out += "},\"public\":true,";
  append_str(out, "created_at", format_iso8601(ts));
  // Only a subset of repos belongs to an organization.
  const std::size_t org = static_cast<std::size_t>(r.id - 10'000'000) % p_.orgs;
  if (org % 3 == 0) {
    out += ",\"org\":{";
    append_int(out, "id", 900'000 + static_cast<std::int64_t>(org));
    out += ',';
    append_str(out, "login", "org" + std::to_string(org));
    out += '}';
  }
  out += '}';
  return out;
}

std::uint64_t generate_file(const GeneratorParams& p, const std::string& path) {
  EventGenerator gen(p);
  NdjsonWriter w(path);
  std::string line;
  while (gen.next(line)) w.write(line);
  w.close();
  return gen.emitted();
}

}  // namespace fluid
