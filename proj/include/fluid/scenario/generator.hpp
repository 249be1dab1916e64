// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluid/types.hpp"

namespace fluid {

// Synthetic GitHub-activity stream in the GH Archive event shape.
struct GeneratorParams {
  std::uint64_t seed = 42;
  TimestampMs start_ms = 1709251200000;  // 2024-03-01T00:00:00Z
  // Events per hour; hour h uses rate_curve[h % size]. Counts are exact.
  std::vector<double> rate_curve;
  int hours = 24;
  std::size_t repos = 20000;
  std::size_t actors = 50000;
  std::size_t orgs = 2000;
  double zipf_s = 1.1;
  TimestampMs disorder_ms = 2000;
  std::map<std::string, double> type_mix;  // empty: GH-like default

  // Planted entities. A share of PullRequestEvents in [spike_from, spike_to)
  // hours goes to the spike repo; the spam actor posts comments to one repo.
  bool plant = true;
  std::size_t spike_repo_rank = 700;
  int spike_from_hour = 8;
  int spike_to_hour = 16;
  double spike_share = 0.3;
  std::size_t spam_actor_rank = 4000;
  double spam_share = 0.004;

  nlohmann::json to_json() const;
  static GeneratorParams from_json(const nlohmann::json& j);
  std::uint64_t total_events() const;
};

// "diurnal:<peak>" (peaks at hours 6, 7 and 12), "flat:<n>", or a comma list
// of per-hour counts.
std::vector<double> parse_rate_curve(const std::string& text);
std::vector<double> diurnal_curve(double peak_per_hour);

struct Repo {
  std::int64_t id = 0;
  std::string name;
  std::string language;
};

struct Actor {
  std::int64_t id = 0;
  std::string login;
};

struct PlantedEntities {
  Repo spike_repo;
  Actor spam_actor;
  Repo spam_repo;
};

// Deterministic for a given parameter set: same seed, same bytes.
class EventGenerator {
 public:
  explicit EventGenerator(GeneratorParams p);

  // Next event line in arrival order; false at the end.
  bool next(std::string& line);
  std::uint64_t emitted() const { return emitted_; }
  const PlantedEntities& planted() const { return planted_; }
  const GeneratorParams& params() const { return p_; }

  Repo repo(std::size_t rank) const;
  Actor actor(std::size_t rank) const;

 private:
  struct Pending {
    TimestampMs event_ts;
    TimestampMs arrival;
    std::uint64_t seq;
  };

  void fill_hour();
  std::string render(TimestampMs ts);
  std::size_t zipf(const std::vector<double>& cdf);
  const std::string& pick_type(TimestampMs ts);
  std::string comment_body();

  GeneratorParams p_;
  std::mt19937_64 rng_;
  std::vector<double> repo_cdf_, actor_cdf_;
  std::vector<std::pair<std::string, double>> mix_;
  PlantedEntities planted_;

  int hour_ = 0;
  std::vector<Pending> pending_;
  std::size_t next_ = 0;
  std::uint64_t emitted_ = 0;
  std::uint64_t seq_ = 0;
};

// Writes the whole stream (gzip when the path ends in .gz); returns the count.
std::uint64_t generate_file(const GeneratorParams& p, const std::string& path);

}  // namespace fluid
