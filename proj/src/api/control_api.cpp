// Copyright 2026 The Fluidstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "fluid/api/control_api.hpp"

#include <charconv>

#include "fluid/fusion/fusion.hpp"
#include "fluid/structures/coverage.hpp"

namespace fluid {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::AlreadyExists: return 409;
    case ErrorCode::FailedPrecondition: return 409;
    case ErrorCode::StorageFull: return 507;
    case ErrorCode::Io: return 500;
    case ErrorCode::Internal: return 500;
  }
  return 500;
}

json error_body(ErrorCode code, const std::string& message) {
  return {{"code", error_code_name(code)}, {"message", message}};
}

namespace {

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON");
  return j;
}

json coverage_json(const Coverage& c) {
  json out = json::array();
  for (const auto& r : c.intervals()) out.push_back({r.lo, r.hi});
  return out;
}

}  // namespace

ApiResponse ControlApi::handle(const std::string& method, const std::string& path,
                               const std::map<std::string, std::string>& params, const std::string& body) {
  try {
    if (path == "/dprs") {
      if (method == "POST") return post_dpr(parse_body(body));
      if (method == "GET") return list_dprs();
    } else if (path.rfind("/dprs/", 0) == 0 && path.size() > 6) {
      if (method == "DELETE") return delete_dpr(path.substr(6));
    } else if (path == "/registry") {
      if (method == "GET") return registry(params);
    } else if (path == "/query") {
      if (method == "POST") return query(parse_body(body));
    } else if (path == "/metrics") {
      if (method == "GET") return metrics(params);
    } else if (path == "/manager") {
      if (method == "POST") return set_manager(parse_body(body));
      if (method == "GET") return get_manager();
    } else if (path == "/stream/status") {
      if (method == "GET") return {200, engine_.stream_status()};
    } else if (path == "/fusion") {
      if (method == "GET") return fusion();
      if (method == "POST") return set_fusion(parse_body(body));
    } else if (path == "/ingest") {
      if (method == "POST") return ingest(body);
    } else {
      return {404, error_body(ErrorCode::NotFound, "no route " + path)};
    }
    return {405, error_body(ErrorCode::InvalidArgument, method + " not allowed on " + path)};
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(e.code(), e.what())};
  } catch (const json::exception& e) {
    return {400, error_body(ErrorCode::InvalidArgument, e.what())};
  } catch (const std::exception& e) {
    return {500, error_body(ErrorCode::Internal, e.what())};
  }
}

ApiResponse ControlApi::post_dpr(const json& body) {
  DprSpec spec = spec_from_json(body);
  const std::string id = engine_.runtime().start(std::move(spec), "user");
  auto info = engine_.runtime().instance(id);
  return {201, {{"instance_id", id}, {"activation_offset", info->activation}, {"structures", info->structure_ids}}};
}

ApiResponse ControlApi::delete_dpr(const std::string& id) {
  Coverage c = engine_.runtime().stop(id);
  auto info = engine_.runtime().instance(id);
  return {200, {{"instance_id", info ? info->id : id}, {"coverage", coverage_json(c)}}};
}

ApiResponse ControlApi::list_dprs() {
  const RegistrySnapshot reg = engine_.registry().snapshot();
  json out = json::array();
  for (const auto& i : engine_.runtime().instances()) {
    json j = i.to_json();
    // Coverage as seen by the query engine: what has been processed so far.
    Coverage cov;
    for (const auto& sid : i.structure_ids)
      if (const auto* e = reg.find(sid)) cov = cov.unite(e->coverage());
    j["coverage"] = coverage_json(cov);
    j["target_coverage"] = i.deactivation ? coverage_json(Coverage(OffsetRange{i.activation, *i.deactivation}))
                                          : json({{i.activation, nullptr}});
    out.push_back(std::move(j));
  }
  return {200, {{"instances", out}, {"hi_watermark", engine_.log().hi_watermark()}}};
}

ApiResponse ControlApi::registry(const std::map<std::string, std::string>& params) {
  const RegistrySnapshot reg = engine_.registry().snapshot();
  const LogSnapshot snap = engine_.log().snapshot();
  std::optional<StructureKind> kind;
  if (auto it = params.find("kind"); it != params.end() && !it->second.empty())
    kind = parse_structure_kind(it->second);
  std::string field;
  if (auto it = params.find("field"); it != params.end()) field = it->second;

  json out = json::array();
  for (const auto& e : reg.entries()) {
    if (kind && e.descriptor.kind != *kind) continue;
    if (!field.empty()) {
      const auto& d = e.descriptor;
      bool match = d.field == field || d.group_by == field;
      for (const auto& f : d.stored_fields) match = match || f == field;
      for (const auto& p : d.filters) match = match || p.field == field;
      if (!match) continue;
    }
    json j = e.to_json();
    json bounds = json::array();
    for (const auto& b : event_time_bounds(e.coverage(), snap)) {
      json bj = {{"range", {b.range.lo, b.range.hi}}};
      if (b.has_events) {
        bj["min_event_ts"] = b.min_event_ts;
        bj["max_event_ts"] = b.max_event_ts;
      }
      bounds.push_back(bj);
    }
    j["event_time_bounds"] = bounds;
    out.push_back(std::move(j));
  }
  return {200, {{"structures", out}}};
}

ApiResponse ControlApi::query(const json& body) {
  Query q = query_from_json(body);
  PlanMode mode = PlanMode::Stitched;
  if (body.value("plan", std::string()) == "raw") mode = PlanMode::RawOnly;
  QueryResult r = engine_.query(q, mode);
  return {200, r.to_json()};
}

ApiResponse ControlApi::metrics(const std::map<std::string, std::string>& params) {
  std::optional<std::int64_t> cursor;
  if (auto it = params.find("cursor"); it != params.end() && !it->second.empty()) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size())
      throw Error(ErrorCode::InvalidArgument, "cursor must be an integer");
    cursor = v;
  }
  return {200, engine_.metrics(cursor)};
}

ApiResponse ControlApi::set_manager(const json& body) {
  if (!body.is_object() || !body.contains("mode") || !body["mode"].is_string())
    throw Error(ErrorCode::InvalidArgument, "expected {\"mode\": \"auto\"|\"manual\"}");
  engine_.manager().set_mode(parse_manager_mode(body["mode"].get<std::string>()));
  return {200, {{"mode", manager_mode_name(engine_.manager().mode())}}};
}

ApiResponse ControlApi::get_manager() { return {200, engine_.manager().state(engine_.now())}; }

ApiResponse ControlApi::fusion() {
  auto [dag, specs] = engine_.runtime().current_dag();
  return {200, fusedump(dag, specs)};
}

ApiResponse ControlApi::set_fusion(const json& body) {
  if (!body.is_object() || !body.contains("level") || !body["level"].is_number_integer())
    throw Error(ErrorCode::InvalidArgument, "expected {\"level\": 0|1|2}");
  engine_.runtime().set_fusion_level(fusion_level_from_int(body["level"].get<int>()));
  return fusion();
}

ApiResponse ControlApi::ingest(const std::string& body) {
  std::size_t n = 0;
  std::size_t b = 0;
  while (b < body.size()) {
    std::size_t e = body.find('\n', b);
    if (e == std::string::npos) e = body.size();
    std::string_view line(body.data() + b, e - b);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      engine_.ingest(line);
      ++n;
    }
    b = e + 1;
  }
  return {200, {{"accepted", n}, {"hi_watermark", engine_.log().hi_watermark()}}};
}

}  // namespace fluid
